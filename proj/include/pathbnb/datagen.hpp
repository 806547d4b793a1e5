#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pathbnb/deadline.hpp"
#include "pathbnb/graph.hpp"
#include "pathbnb/instance.hpp"
#include "pathbnb/planning.hpp"

namespace pathbnb {

/// A solved state and its label: the first mandatory node visited on an
/// optimal path from `state` to (dest, dest, {}).
struct TrainingPair {
    Instance state;
    NodeId label = 0;
    /// Optimal cost-to-go g(state) at emission. Not persisted; NaN after load.
    double cost = std::nan("");

    friend bool operator==(const TrainingPair& a, const TrainingPair& b) {
        return a.state == b.state && a.label == b.label;
    }
};

enum class StopReason { Exhausted, ExpansionCap, TimeBudget };

/// What one backwards run from a termination state covered.
struct TerminalCoverage {
    NodeId terminal = 0;
    std::size_t expanded = 0;
    std::size_t emitted = 0;
    StopReason stop = StopReason::Exhausted;
};

struct Dataset {
    std::string graph_id;
    std::uint64_t seed = 0;
    std::vector<TrainingPair> pairs;
    std::vector<TerminalCoverage> coverage;
    double budget_secs = 0.0;
};

struct DatagenConfig {
    /// Wall-clock budget per graph, split evenly across termination states.
    std::chrono::duration<double> budget = std::chrono::minutes(10);
    /// States whose mandatory set would exceed this size are not generated.
    std::size_t max_mandatory = 12;
    /// Expansion cap per termination state; 0 disables it. Unlike the time
    /// budget this cap is deterministic.
    std::size_t max_expansions_per_terminal = 0;
    std::size_t threads = 1;
};

namespace detail {

struct BackwardKey {
    std::uint64_t mask;
    NodeId start;
    friend bool operator==(const BackwardKey&, const BackwardKey&) = default;
};

struct BackwardKeyHash {
    std::size_t operator()(const BackwardKey& k) const noexcept {
        std::uint64_t h = k.mask * 0x9e3779b97f4a7c15ULL;
        h ^= (static_cast<std::uint64_t>(k.start) + 0x632be59bd9b4e019ULL) + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

inline constexpr NodeId kNoLabel = static_cast<NodeId>(-1);

/// Uniform-cost search over predecessor states from (terminal, terminal, {}).
/// Per state it keeps g and d(s); relaxing s' from s copies d(s) when the
/// mandatory sets agree and sets d(s') = start(s) otherwise. Popped states
/// with nonempty M are emitted with their final g.
///
/// Only normalized states (start not in M) are generated: a forward optimal
/// path from a normalized state never passes through any other kind, so
/// dropping them leaves every emitted label and cost unchanged.
inline TerminalCoverage backward_run(const WeightedGraph& g, NodeId terminal, const DatagenConfig& cfg,
                                     Clock::duration budget, std::vector<TrainingPair>& out) {
    struct Record {
        double g;
        NodeId label;
        bool closed;
    };
    struct OpenEntry {
        double g;
        NodeId start;
        std::uint64_t mask;
        std::uint32_t record;
    };
    struct Worse {
        bool operator()(const OpenEntry& a, const OpenEntry& b) const {
            if (a.g != b.g) return a.g > b.g;
            if (a.start != b.start) return a.start > b.start;
            return a.mask > b.mask;
        }
    };

    const Deadline deadline(budget);
    std::vector<Record> records;
    std::unordered_map<BackwardKey, std::uint32_t, BackwardKeyHash> index;
    std::priority_queue<OpenEntry, std::vector<OpenEntry>, Worse> open;

    records.push_back({0.0, kNoLabel, false});
    index.emplace(BackwardKey{0, terminal}, 0);
    open.push({0.0, terminal, 0, 0});

    TerminalCoverage cov{terminal, 0, 0, StopReason::Exhausted};
    while (!open.empty()) {
        if (cfg.max_expansions_per_terminal != 0 && cov.expanded >= cfg.max_expansions_per_terminal) {
            cov.stop = StopReason::ExpansionCap;
            break;
        }
        if ((cov.expanded & 1023U) == 0 && deadline.expired()) {
            cov.stop = StopReason::TimeBudget;
            break;
        }
        const OpenEntry top = open.top();
        open.pop();
        Record& rec = records[top.record];
        if (rec.closed || top.g > rec.g) continue;
        rec.closed = true;
        ++cov.expanded;

        const NodeSet mand = NodeSet::from_mask(top.mask);
        const double g_here = rec.g;
        const NodeId label_here = rec.label;
        if (!mand.empty()) {
            out.push_back({{top.start, terminal, mand}, label_here, g_here});
            ++cov.emitted;
        }

        auto relax = [&](NodeId start, NodeSet m, double w, NodeId label) {
            const double g_new = g_here + w;
            auto [it, inserted] = index.try_emplace(BackwardKey{m.mask(), start}, static_cast<std::uint32_t>(records.size()));
            if (inserted) {
                records.push_back({g_new, label, false});
            } else {
                Record& r = records[it->second];
                if (!(g_new < r.g)) return;
                if (r.closed) throw std::logic_error("backwards search: g decreased after a state was closed");
                r.g = g_new;
                r.label = label;
            }
            open.push({g_new, start, m.mask(), it->second});
        };

        const bool can_grow = top.start != terminal && mand.size() < cfg.max_mandatory;
        for (const Neighbor& nb : g.neighbors(top.start)) {
            if (mand.contains(nb.node)) continue;  // either candidate would be non-normalized
            if (!(nb.node == terminal && mand.empty())) relax(nb.node, mand, nb.weight, label_here);
            if (can_grow) relax(nb.node, mand.with(top.start), nb.weight, top.start);
        }
    }
    return cov;
}

}  // namespace detail

/// Self-supervised training data: one backwards uniform-cost run per
/// termination state (i, i, {}), collecting <s, d(s)> for every popped state
/// with a nonempty mandatory set. Runs are independent; results are merged
/// in terminal order so the output does not depend on `threads`.
inline Dataset backwards_astar_generate(const WeightedGraph& g, const DatagenConfig& cfg = {}) {
    check_instance(Instance{}, g.node_count());
    if (!(cfg.budget.count() > 0.0)) throw InvalidInput("data generation budget must be positive");
    const std::size_t n = g.node_count();
    const auto per_terminal =
        std::chrono::duration_cast<Clock::duration>(cfg.budget / static_cast<double>(n));

    std::vector<std::vector<TrainingPair>> per_run(n);
    std::vector<TerminalCoverage> coverage(n);
    auto work = [&](std::size_t first, std::size_t step) {
        for (std::size_t i = first; i < n; i += step)
            coverage[i] = detail::backward_run(g, static_cast<NodeId>(i), cfg, per_terminal, per_run[i]);
    };
    const std::size_t threads = std::clamp<std::size_t>(cfg.threads, 1, n);
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    }

    Dataset d;
    d.graph_id = graph_id(g);
    d.budget_secs = cfg.budget.count();
    d.coverage = std::move(coverage);
    std::size_t total = 0;
    for (const auto& run : per_run) total += run.size();
    d.pairs.reserve(total);
    for (auto& run : per_run) d.pairs.insert(d.pairs.end(), run.begin(), run.end());
    return d;
}

inline void shuffle_pairs(Dataset& d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::shuffle(d.pairs.begin(), d.pairs.end(), rng);
    d.seed = seed;
}

/// Deterministic partition into (train, held-out).
inline std::pair<Dataset, Dataset> shuffle_split(const Dataset& d, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidInput("train fraction must lie in (0, 1)");
    Dataset shuffled = d;
    shuffle_pairs(shuffled, seed);
    const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(d.pairs.size())));
    Dataset train{d.graph_id, seed, {}, d.coverage, d.budget_secs};
    Dataset held{d.graph_id, seed, {}, {}, d.budget_secs};
    train.pairs.assign(shuffled.pairs.begin(), shuffled.pairs.begin() + static_cast<std::ptrdiff_t>(cut));
    held.pairs.assign(shuffled.pairs.begin() + static_cast<std::ptrdiff_t>(cut), shuffled.pairs.end());
    return {std::move(train), std::move(held)};
}

/// "#graph <id> seed <seed>" header, then "start dest m1,m2,... label" lines.
inline std::string to_text(const Dataset& d) {
    std::string out = "#graph " + d.graph_id + " seed " + std::to_string(d.seed) + "\n";
    for (const TrainingPair& p : d.pairs) out += to_text(p.state) + " " + std::to_string(p.label) + "\n";
    return out;
}

inline Dataset parse_dataset(std::string_view text) {
    Dataset d;
    LineReader reader(text, /*skip_comments=*/false);
    auto header = reader.next();
    if (!header) throw ParseError("empty dataset file");
    const auto head = split_ws(header->text);
    if (head.size() != 4 || head[0] != "#graph" || head[2] != "seed")
        throw ParseError("expected \"#graph <graph_id> seed <seed>\" header", header->number);
    d.graph_id = std::string(head[1]);
    d.seed = parse_number<std::uint64_t>(head[3], header->number);
    while (auto line = reader.next()) {
        if (trim(line->text).front() == '#') continue;
        const auto f = split_ws(line->text);
        if (f.size() != 4) throw ParseError("expected \"start dest m1,m2,... label\"", line->number);
        TrainingPair p;
        p.state = {parse_number<NodeId>(f[0], line->number), parse_number<NodeId>(f[1], line->number),
                   parse_mandatory(f[2], line->number)};
        p.label = parse_number<NodeId>(f[3], line->number);
        if (!p.state.mandatory.contains(p.label)) throw ParseError("label not in mandatory set", line->number);
        d.pairs.push_back(p);
    }
    return d;
}

}  // namespace pathbnb
