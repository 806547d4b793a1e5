#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <vector>

#include "pathbnb/deadline.hpp"
#include "pathbnb/graph.hpp"
#include "pathbnb/instance.hpp"

namespace pathbnb {

// Planning domain over states s = (start, dest, M). Moving along an edge
// (start, start') leads to (start', dest, M \ {start'}); the goal is an end
// state (i, i, {}).

struct Transition {
    Instance state;
    double cost = 0.0;
};

inline bool is_end_state(const Instance& s) { return s.start == s.dest && s.mandatory.empty(); }

inline std::vector<Transition> successors(const Instance& s, const WeightedGraph& g) {
    if (is_end_state(s)) throw InvalidInput("successors of an end state");
    std::vector<Transition> out;
    out.reserve(g.neighbors(s.start).size());
    for (const Neighbor& nb : g.neighbors(s.start))
        out.push_back({{nb.node, s.dest, s.mandatory.without(nb.node)}, nb.weight});
    return out;
}

/// Reverse transitions. For each neighbor start' of s.start two candidates
/// exist: (start', dest, M) when start' is not in M, and
/// (start', dest, M + {start}) when start != dest. Candidates that are end
/// states are dropped. A state whose start is still in M has no
/// predecessors, since arriving at a node removes it from M.
inline std::vector<Transition> predecessors(const Instance& s, const WeightedGraph& g) {
    std::vector<Transition> out;
    if (s.mandatory.contains(s.start)) return out;
    for (const Neighbor& nb : g.neighbors(s.start)) {
        if (!s.mandatory.contains(nb.node)) {
            Instance keep{nb.node, s.dest, s.mandatory};
            if (!is_end_state(keep)) out.push_back({keep, nb.weight});
        }
        if (s.start != s.dest) {
            Instance add{nb.node, s.dest, s.mandatory.with(s.start)};
            if (!is_end_state(add)) out.push_back({add, nb.weight});
        }
    }
    return out;
}

struct SearchResult {
    std::vector<NodeId> path;
    double cost = 0.0;
    std::size_t states_visited = 0;
    Clock::duration elapsed{};
};

/// Checks the solution-path invariants of `r` for instance `s`. Returns an
/// empty string when valid, otherwise a description of the first violation.
inline std::string validate_result(const WeightedGraph& g, const Instance& s, const SearchResult& r,
                                   double rel_tol = 1e-12) {
    if (r.path.empty()) return "empty path";
    if (r.path.front() != s.start) return "path does not begin at start";
    if (r.path.back() != s.dest) return "path does not end at dest";
    double sum = 0.0;
    NodeSet seen;
    seen.insert(r.path.front());
    for (std::size_t i = 1; i < r.path.size(); ++i) {
        auto w = g.edge_weight(r.path[i - 1], r.path[i]);
        if (!w) return "consecutive nodes " + std::to_string(r.path[i - 1]) + "," + std::to_string(r.path[i]) + " not adjacent";
        sum += *w;
        seen.insert(r.path[i]);
    }
    if ((s.mandatory & seen) != s.mandatory) return "mandatory node missed";
    if (std::abs(sum - r.cost) > rel_tol * std::max(1.0, std::abs(sum))) return "cost does not match edge sum";
    return {};
}

/// MST lower bound on the remaining cost of a state: MST weight of M in the
/// metric closure, plus the cheapest start -> M and M -> dest connections.
/// With M empty the exact value cost(start, dest) is returned.
inline double mst_heuristic(const Instance& s, const ShortestPathTable& t, double mst_of_mandatory) {
    if (s.mandatory.empty()) return t.cost(s.start, s.dest);
    double to_tree = kInfinity;
    double from_tree = kInfinity;
    s.mandatory.for_each([&](NodeId m) {
        to_tree = std::min(to_tree, t.cost(s.start, m));
        from_tree = std::min(from_tree, t.cost(m, s.dest));
    });
    return mst_of_mandatory + to_tree + from_tree;
}

inline double mst_heuristic(const Instance& s, const ShortestPathTable& t) {
    return mst_heuristic(s, t, mst_weight(t, s.mandatory));
}

/// mst_heuristic with the MST weight memoized per mandatory set.
class MstHeuristic {
public:
    explicit MstHeuristic(const ShortestPathTable& t) : table_(&t) {}

    double operator()(const Instance& s) {
        auto it = cache_.find(s.mandatory.mask());
        if (it == cache_.end()) it = cache_.emplace(s.mandatory.mask(), mst_weight(*table_, s.mandatory)).first;
        return mst_heuristic(s, *table_, it->second);
    }

private:
    const ShortestPathTable* table_;
    std::unordered_map<std::uint64_t, double> cache_;
};

struct ZeroHeuristic {
    double operator()(const Instance&) const { return 0.0; }
};

/// Forward A* over the planning domain. Among equal f values deeper states
/// (larger g) are expanded first, then insertion order. States reached again
/// with a strictly lower g are reopened, so an admissible (not necessarily
/// consistent) heuristic yields an optimal result. `states_visited` counts
/// expansions.
template <typename Heuristic>
SearchResult forward_astar(const Instance& s, const WeightedGraph& g, Heuristic&& h,
                           const Deadline& deadline = Deadline::none()) {
    check_instance(s, g.node_count());
    Stopwatch clock;

    struct Record {
        Instance state;
        double g;
        std::size_t parent;
    };
    struct OpenEntry {
        double f;
        double g;
        std::uint64_t seq;
        std::size_t record;
    };
    struct Worse {
        bool operator()(const OpenEntry& a, const OpenEntry& b) const {
            if (a.f != b.f) return a.f > b.f;
            if (a.g != b.g) return a.g < b.g;
            return a.seq > b.seq;
        }
    };
    constexpr std::size_t kNoParent = static_cast<std::size_t>(-1);

    std::vector<Record> records;
    std::unordered_map<Instance, std::size_t> index;
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, Worse> open;
    std::uint64_t seq = 0;

    records.push_back({s, 0.0, kNoParent});
    index.emplace(s, 0);
    open.push({h(s), 0.0, seq++, 0});

    SearchResult result;
    while (!open.empty()) {
        const OpenEntry top = open.top();
        open.pop();
        const Record current = records[top.record];
        if (top.g > current.g) continue;  // stale
        ++result.states_visited;
        if ((result.states_visited & 1023U) == 0) deadline.check();

        if (is_end_state(current.state)) {
            result.cost = current.g;
            for (std::size_t r = top.record; r != kNoParent; r = records[r].parent) result.path.push_back(records[r].state.start);
            std::reverse(result.path.begin(), result.path.end());
            result.elapsed = clock.elapsed();
            return result;
        }
        for (const Transition& tr : successors(current.state, g)) {
            const double g_next = current.g + tr.cost;
            auto [it, inserted] = index.try_emplace(tr.state, records.size());
            if (inserted) {
                records.push_back({tr.state, g_next, top.record});
            } else if (g_next < records[it->second].g) {
                records[it->second].g = g_next;
                records[it->second].parent = top.record;
            } else {
                continue;
            }
            open.push({g_next + h(tr.state), g_next, seq++, it->second});
        }
    }
    throw InvalidInput("unsolvable instance");
}

}  // namespace pathbnb
