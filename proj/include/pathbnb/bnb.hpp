#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "pathbnb/deadline.hpp"
#include "pathbnb/graph.hpp"
#include "pathbnb/instance.hpp"

namespace pathbnb {

// Mandatory search tree: the root is `start`, each root-to-leaf path is an
// order (m1, ..., mq) of M, and every leaf is `dest`. Moving between tree
// nodes costs the shortest-path cost between the two graph nodes.

using Order = std::vector<NodeId>;

inline bool is_permutation_of(const Order& o, NodeSet m) {
    if (o.size() != m.size()) return false;
    NodeSet seen;
    for (NodeId v : o) {
        if (!m.contains(v) || seen.contains(v)) return false;
        seen.insert(v);
    }
    return true;
}

inline double order_cost(const Instance& s, const Order& o, const ShortestPathTable& t) {
    double total = 0.0;
    NodeId at = s.start;
    for (NodeId m : o) {
        total += t.cost(at, m);
        at = m;
    }
    return total + t.cost(at, s.dest);
}

struct PathAndCost {
    std::vector<NodeId> path;
    double cost = 0.0;
};

/// Concatenates the shortest paths start -> m1 -> ... -> mq -> dest.
inline PathAndCost order_to_path(const Instance& s, const Order& o, const ShortestPathTable& t) {
    if (!is_permutation_of(o, s.mandatory)) throw InvalidInput("order is not a permutation of the mandatory set");
    PathAndCost out{{s.start}, 0.0};
    NodeId at = s.start;
    auto append = [&](NodeId to) {
        const auto seg = reconstruct_path(t, at, to);
        out.path.insert(out.path.end(), seg.begin() + 1, seg.end());
        out.cost += t.cost(at, to);
        at = to;
    };
    for (NodeId m : o) append(m);
    append(s.dest);
    return out;
}

struct MinPair {
    double first = kInfinity;
    double second = kInfinity;
};

/// Two smallest shortest-path costs from x to the other nodes of `d`.
inline MinPair min1_min2(NodeId x, NodeSet d, const ShortestPathTable& t) {
    const NodeSet others = d.without(x);
    if (others.empty()) throw InvalidInput("min1: no other node in D");
    if (others.size() < 2) throw InvalidInput("min2 undefined: fewer than two other nodes in D");
    MinPair out;
    others.for_each([&](NodeId y) {
        const double c = t.cost(x, y);
        if (c < out.first) {
            out.second = out.first;
            out.first = c;
        } else if (c < out.second) {
            out.second = c;
        }
    });
    return out;
}

/// Half-sum lower bound on the cost of completing a tree node v with
/// remaining mandatory set R: over D = {v} + R + {dest}, v and dest add their
/// cheapest incident metric-closure edge, every r in R its two cheapest.
///
/// When v == dest the completion is a closed walk; an r whose only other
/// node in D is v then contributes min1 twice.
inline double pi_heuristic(NodeId v, NodeSet remaining, NodeId dest, const ShortestPathTable& t) {
    if (remaining.empty()) return t.cost(v, dest);
    NodeId nodes[NodeSet::kMaxNodes + 2];
    std::size_t k = 0;
    remaining.for_each([&](NodeId r) { nodes[k++] = r; });
    const std::size_t r_count = k;
    if (!remaining.contains(v)) nodes[k++] = v;
    if (dest != v && !remaining.contains(dest)) nodes[k++] = dest;

    auto min1_of = [&](NodeId x) {
        double best = kInfinity;
        for (std::size_t i = 0; i < k; ++i)
            if (nodes[i] != x) best = std::min(best, t.cost(x, nodes[i]));
        return best;
    };
    double sum = min1_of(v) + min1_of(dest);
    for (std::size_t a = 0; a < r_count; ++a) {
        const NodeId r = nodes[a];
        double m1 = kInfinity;
        double m2 = kInfinity;
        for (std::size_t b = 0; b < k; ++b) {
            if (b == a) continue;
            const double c = t.cost(r, nodes[b]);
            if (c < m1) {
                m2 = m1;
                m1 = c;
            } else if (c < m2) {
                m2 = c;
            }
        }
        sum += m1 + (m2 == kInfinity ? m1 : m2);
    }
    return 0.5 * sum;
}

struct SearchStats {
    std::size_t node_visits = 0;
    std::size_t cuts = 0;
    /// (node_visits when recorded, incumbent cost); costs strictly decrease.
    std::vector<std::pair<std::size_t, double>> incumbent_trace;
    Clock::duration elapsed{};
};

/// Order in which the children of a tree node are tried.
enum class ChildOrder {
    ByIndex,       ///< ascending node index
    NearestFirst,  ///< ascending shortest-path cost from the parent, ties by index
};

struct InitialBound {
    double cost = kInfinity;
    Order order;
};

struct TreeSearchResult {
    Order order;
    double cost = kInfinity;
    SearchStats stats;
};

namespace detail {

class DepthFirstBnb {
public:
    DepthFirstBnb(const ShortestPathTable& t, NodeId dest, ChildOrder order, const Deadline& deadline)
        : t_(t), dest_(dest), order_(order), deadline_(deadline) {}

    void seed(const InitialBound& ub) {
        incumbent_ = ub.cost;
        best_ = ub.order;
        stats_.incumbent_trace.emplace_back(0, ub.cost);
    }

    void run(NodeId start, NodeSet mandatory) {
        if (mandatory.empty()) {
            leaf(t_.cost(start, dest_));
            return;
        }
        expand(start, mandatory, 0.0);
    }

    TreeSearchResult result() && { return {std::move(best_), incumbent_, std::move(stats_)}; }

private:
    void leaf(double total) {
        if (total >= incumbent_) {
            ++stats_.cuts;
            return;
        }
        ++stats_.node_visits;
        incumbent_ = total;
        best_ = prefix_;
        stats_.incumbent_trace.emplace_back(stats_.node_visits, total);
    }

    void expand(NodeId v, NodeSet remaining, double g) {
        NodeId children[NodeSet::kMaxNodes];
        std::size_t k = 0;
        remaining.for_each([&](NodeId c) { children[k++] = c; });
        if (order_ == ChildOrder::NearestFirst) {
            std::sort(children, children + k, [&](NodeId a, NodeId b) {
                const double ca = t_.cost(v, a);
                const double cb = t_.cost(v, b);
                return ca != cb ? ca < cb : a < b;
            });
        }
        for (std::size_t i = 0; i < k; ++i) {
            const NodeId c = children[i];
            const NodeSet rest = remaining.without(c);
            const double g_child = g + t_.cost(v, c);
            if (g_child + pi_heuristic(c, rest, dest_, t_) >= incumbent_) {
                ++stats_.cuts;
                continue;
            }
            ++stats_.node_visits;
            if ((stats_.node_visits & 4095U) == 0) deadline_.check();
            prefix_.push_back(c);
            if (rest.empty())
                leaf(g_child + t_.cost(c, dest_));
            else
                expand(c, rest, g_child);
            prefix_.pop_back();
        }
    }

    const ShortestPathTable& t_;
    NodeId dest_;
    ChildOrder order_;
    const Deadline& deadline_;
    double incumbent_ = kInfinity;
    Order best_;
    Order prefix_;
    SearchStats stats_;
};

}  // namespace detail

/// Depth-first branch and bound over the mandatory search tree.
///
/// Children are tried in `child_order` (ascending node index by default; the
/// same policy must be used when comparing runs). A child is cut when
/// g_child + pi(child) >= incumbent. `node_visits` counts expanded mandatory
/// tree nodes plus completed leaves; the root is not counted. An initial
/// bound seeds the incumbent and is returned unchanged when nothing cheaper
/// exists.
inline TreeSearchResult dfs_branch_and_bound(const Instance& s, const ShortestPathTable& t,
                                             const std::optional<InitialBound>& initial_ub = std::nullopt,
                                             ChildOrder child_order = ChildOrder::ByIndex,
                                             const Deadline& deadline = Deadline::none()) {
    if (!s.is_normalized()) throw InvalidInput("instance must be normalized");
    Stopwatch clock;
    detail::DepthFirstBnb search(t, s.dest, child_order, deadline);
    if (initial_ub) {
        if (!is_permutation_of(initial_ub->order, s.mandatory))
            throw InvalidInput("initial bound order is not a permutation of the mandatory set");
        search.seed(*initial_ub);
    }
    search.run(s.start, s.mandatory);
    auto result = std::move(search).result();
    result.stats.elapsed = clock.elapsed();
    return result;
}

struct DpResult {
    Order order;
    double cost = kInfinity;
    std::size_t visits = 0;
    Clock::duration elapsed{};
};

/// Held-Karp subset DP over (visited subset of M, last mandatory node).
/// `visits` is the number of (subset, last) states evaluated. Memory grows as
/// 2^|M| * |M|, hence the cap.
inline DpResult dp_solve(const Instance& s, const ShortestPathTable& t, std::size_t max_mandatory = 20,
                         const Deadline& deadline = Deadline::none()) {
    if (!s.is_normalized()) throw InvalidInput("instance must be normalized");
    const std::size_t k = s.mandatory.size();
    if (k > max_mandatory) throw InvalidInput("mandatory count exceeds DP cap");
    Stopwatch clock;
    DpResult out;
    if (k == 0) {
        out.cost = t.cost(s.start, s.dest);
        out.elapsed = clock.elapsed();
        return out;
    }
    const auto nodes = s.mandatory.to_vector();
    const std::size_t full = (std::size_t{1} << k) - 1;
    std::vector<double> best((full + 1) * k, kInfinity);
    std::vector<std::uint8_t> parent((full + 1) * k, 0);
    for (std::size_t j = 0; j < k; ++j) {
        best[(std::size_t{1} << j) * k + j] = t.cost(s.start, nodes[j]);
        ++out.visits;
    }
    for (std::size_t subset = 1; subset <= full; ++subset) {
        if ((subset & (subset - 1)) == 0) continue;
        if ((subset & 1023U) == 0) deadline.check();
        for (std::size_t j = 0; j < k; ++j) {
            if (((subset >> j) & 1U) == 0) continue;
            ++out.visits;
            const std::size_t prev = subset & ~(std::size_t{1} << j);
            double value = kInfinity;
            std::uint8_t arg = 0;
            for (std::size_t i = 0; i < k; ++i) {
                if (((prev >> i) & 1U) == 0) continue;
                const double c = best[prev * k + i] + t.cost(nodes[i], nodes[j]);
                if (c < value) {
                    value = c;
                    arg = static_cast<std::uint8_t>(i);
                }
            }
            best[subset * k + j] = value;
            parent[subset * k + j] = arg;
        }
    }
    std::size_t last = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const double c = best[full * k + j] + t.cost(nodes[j], s.dest);
        if (c < out.cost) {
            out.cost = c;
            last = j;
        }
    }
    out.order.resize(k);
    for (std::size_t subset = full, pos = k; pos-- > 0;) {
        out.order[pos] = nodes[last];
        const std::size_t prev = subset & ~(std::size_t{1} << last);
        last = parent[subset * k + last];
        subset = prev;
    }
    out.elapsed = clock.elapsed();
    return out;
}

}  // namespace pathbnb
