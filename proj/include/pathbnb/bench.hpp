#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pathbnb/bnb.hpp"
#include "pathbnb/gcn.hpp"
#include "pathbnb/graph.hpp"
#include "pathbnb/instance.hpp"
#include "pathbnb/planning.hpp"

namespace pathbnb {

enum class Solver { Dp, BranchAndBound, AStarMst, BranchAndBoundGcn };

inline constexpr std::array<Solver, 4> kAllSolvers = {Solver::Dp, Solver::BranchAndBound, Solver::AStarMst,
                                                     Solver::BranchAndBoundGcn};

inline std::string_view solver_name(Solver s) {
    switch (s) {
        case Solver::Dp: return "dp";
        case Solver::BranchAndBound: return "bnb";
        case Solver::AStarMst: return "astar_mst";
        case Solver::BranchAndBoundGcn: return "bnb_gcn";
    }
    return "?";
}

inline std::optional<Solver> parse_solver(std::string_view name) {
    for (Solver s : kAllSolvers)
        if (solver_name(s) == name) return s;
    return std::nullopt;
}

/// A configuration value that cannot be used.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SolveOutcome {
    bool timed_out = false;
    double cost = kInfinity;
    Order order;
    std::vector<NodeId> path;
    /// Tree-node visits for the tree solvers, state expansions for A*.
    std::size_t visits = 0;
    Clock::duration elapsed{};
    /// Cost of the probe bound (GCN-bounded solver only).
    std::optional<double> probe_cost;
};

struct SolveOptions {
    Clock::duration timeout = std::chrono::seconds(300);
    ChildOrder child_order = ChildOrder::ByIndex;
    std::size_t dp_max_mandatory = 20;
};

namespace detail {

inline Order first_visits(const std::vector<NodeId>& path, NodeSet mandatory) {
    Order o;
    for (NodeId v : path)
        if (mandatory.contains(v)) {
            o.push_back(v);
            mandatory.erase(v);
        }
    return o;
}

}  // namespace detail

/// Runs one solver on one instance. A timeout is reported, not thrown. The
/// GCN-bounded solver needs `model`; its time includes the probe.
inline SolveOutcome solve(Solver solver, const Instance& instance, const WeightedGraph& g, const ShortestPathTable& t,
                          const gcn::GcnModel* model, const SolveOptions& opt = {}) {
    const Instance s = instance.normalized();
    check_instance(s, g.node_count());
    if (solver == Solver::BranchAndBoundGcn && model == nullptr) throw InvalidInput("bnb_gcn needs a model");
    SolveOutcome out;
    Stopwatch clock;
    const Deadline deadline(opt.timeout);
    try {
        switch (solver) {
            case Solver::Dp: {
                auto r = dp_solve(s, t, opt.dp_max_mandatory, deadline);
                out.cost = r.cost;
                out.order = std::move(r.order);
                out.visits = r.visits;
                break;
            }
            case Solver::BranchAndBound: {
                auto r = dfs_branch_and_bound(s, t, std::nullopt, opt.child_order, deadline);
                out.cost = r.cost;
                out.order = std::move(r.order);
                out.visits = r.stats.node_visits;
                break;
            }
            case Solver::BranchAndBoundGcn: {
                auto probe = gcn::probe_upper_bound(*model, s, t);
                out.probe_cost = probe.cost;
                auto r = dfs_branch_and_bound(s, t, InitialBound{probe.cost, std::move(probe.order)}, opt.child_order,
                                              deadline);
                out.cost = r.cost;
                out.order = std::move(r.order);
                out.visits = r.stats.node_visits;
                break;
            }
            case Solver::AStarMst: {
                auto r = forward_astar(s, g, MstHeuristic(t), deadline);
                out.cost = r.cost;
                out.order = detail::first_visits(r.path, s.mandatory);
                out.path = std::move(r.path);
                out.visits = r.states_visited;
                break;
            }
        }
    } catch (const SearchTimeout&) {
        out = SolveOutcome{};
        out.timed_out = true;
    }
    out.elapsed = clock.elapsed();
    if (!out.timed_out && out.path.empty()) out.path = order_to_path(s, out.order, t).path;
    return out;
}

struct BenchmarkConfig {
    double decimation_ratio = 0.8;
    std::vector<std::size_t> mandatory_counts{5, 6, 7, 8, 9, 10, 11, 12};
    std::size_t instances_per_pair_per_count = 1;
    std::vector<Solver> solvers{kAllSolvers.begin(), kAllSolvers.end()};
    double timeout_secs = 300.0;
    std::uint64_t seed = 0;
    /// With timing off every elapsed_us is written as 0, making the CSVs a
    /// pure function of the seeds.
    bool timing = true;
    std::size_t threads = 1;
    ChildOrder child_order = ChildOrder::ByIndex;
};

inline void validate(const BenchmarkConfig& cfg, std::size_t node_count) {
    if (!(cfg.decimation_ratio >= 0.0 && cfg.decimation_ratio < 1.0))
        throw ConfigError("decimation_ratio must lie in [0, 1)");
    if (cfg.mandatory_counts.empty()) throw ConfigError("mandatory_counts must not be empty");
    for (std::size_t k : cfg.mandatory_counts)
        if (k + 1 >= node_count || k > NodeSet::kMaxNodes)
            throw ConfigError("mandatory count " + std::to_string(k) + " is infeasible for a graph of " +
                              std::to_string(node_count) + " nodes");
    if (!(cfg.timeout_secs > 0.0)) throw ConfigError("timeout must be positive");
    if (cfg.threads == 0) throw ConfigError("threads must be positive");
    if (node_count < 2) throw ConfigError("benchmark needs at least two nodes");
    if (std::find(cfg.solvers.begin(), cfg.solvers.end(), Solver::Dp) != cfg.solvers.end())
        for (std::size_t k : cfg.mandatory_counts)
            if (k > SolveOptions{}.dp_max_mandatory) throw ConfigError("mandatory count " + std::to_string(k) + " exceeds the DP cap");
}

/// Ordered pairs (i != j) ranked by shortest-path cost, longest first, ties
/// in (i, j) order; only the top (1 - decimation_ratio) share is kept.
inline std::vector<std::pair<NodeId, NodeId>> longest_pairs(const ShortestPathTable& t, double decimation_ratio) {
    const auto n = static_cast<NodeId>(t.node_count());
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId i = 0; i < n; ++i)
        for (NodeId j = 0; j < n; ++j)
            if (i != j) pairs.emplace_back(i, j);
    std::stable_sort(pairs.begin(), pairs.end(),
                     [&](const auto& a, const auto& b) { return t.cost(a.first, a.second) > t.cost(b.first, b.second); });
    const double share = (1.0 - decimation_ratio) * static_cast<double>(pairs.size());
    const auto keep = static_cast<std::size_t>(std::ceil(share - 1e-9));
    pairs.resize(std::min(keep, pairs.size()));
    return pairs;
}

/// For every kept pair and mandatory count, draws uniform mandatory sets
/// that exclude start and dest.
inline std::vector<Instance> generate_instances(const ShortestPathTable& t, const BenchmarkConfig& cfg) {
    validate(cfg, t.node_count());
    std::mt19937_64 rng(cfg.seed);
    std::vector<Instance> out;
    std::vector<NodeId> pool;
    for (const auto& [start, dest] : longest_pairs(t, cfg.decimation_ratio)) {
        pool.clear();
        for (NodeId v = 0; v < t.node_count(); ++v)
            if (v != start && v != dest) pool.push_back(v);
        for (std::size_t k : cfg.mandatory_counts)
            for (std::size_t r = 0; r < cfg.instances_per_pair_per_count; ++r) {
                Instance s{start, dest, {}};
                for (std::size_t i = 0; i < k; ++i) {
                    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
                    std::swap(pool[i], pool[pick(rng)]);
                    s.mandatory.insert(pool[i]);
                }
                out.push_back(s);
            }
    }
    return out;
}

struct InstanceRow {
    std::size_t instance = 0;
    Solver solver = Solver::Dp;
    Instance state;
    SolveOutcome outcome;
    long long elapsed_us = 0;
};

struct Aggregate {
    Solver solver = Solver::Dp;
    std::size_t mandatory_count = 0;
    std::size_t instances = 0;
    std::size_t timeouts = 0;
    /// Means over the instances that finished; NaN when none did.
    double mean_visits = std::nan("");
    double mean_elapsed_us = std::nan("");
};

struct BenchmarkReport {
    std::string graph_id;
    std::vector<Instance> instances;
    std::vector<Solver> solvers;
    /// Instance-major, solvers in configuration order.
    std::vector<InstanceRow> rows;
    std::vector<Aggregate> aggregates;
};

/// Two solvers that finished report different optimal costs.
class SolverDisagreement : public std::runtime_error {
public:
    explicit SolverDisagreement(const std::string& dump) : std::runtime_error("cross-solver cost disagreement\n" + dump) {}
};

inline bool costs_agree(double a, double b, bool exact) {
    if (exact) return a == b;
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

inline std::vector<Aggregate> aggregate(const BenchmarkReport& r) {
    std::map<std::pair<std::size_t, std::size_t>, Aggregate> cells;  // (solver position, |M|)
    std::map<std::pair<std::size_t, std::size_t>, std::pair<double, double>> sums;
    for (const InstanceRow& row : r.rows) {
        const auto pos = static_cast<std::size_t>(std::find(r.solvers.begin(), r.solvers.end(), row.solver) - r.solvers.begin());
        const std::pair key{pos, row.state.mandatory.size()};
        Aggregate& a = cells[key];
        a.solver = row.solver;
        a.mandatory_count = key.second;
        ++a.instances;
        if (row.outcome.timed_out) {
            ++a.timeouts;
            continue;
        }
        sums[key].first += static_cast<double>(row.outcome.visits);
        sums[key].second += static_cast<double>(row.elapsed_us);
    }
    std::vector<Aggregate> out;
    for (auto& [key, a] : cells) {
        const std::size_t done = a.instances - a.timeouts;
        if (done > 0) {
            a.mean_visits = sums[key].first / static_cast<double>(done);
            a.mean_elapsed_us = sums[key].second / static_cast<double>(done);
        }
        out.push_back(a);
    }
    return out;
}

/// Runs every configured solver on every instance and cross-checks the
/// costs of the solvers that finished. Instances are distributed over
/// `cfg.threads` workers; rows are assembled in instance order.
inline BenchmarkReport run_benchmark(const WeightedGraph& g, const ShortestPathTable& t, std::vector<Instance> instances,
                                     const BenchmarkConfig& cfg, const gcn::GcnModel* model = nullptr) {
    validate(cfg, g.node_count());
    const bool needs_model = std::find(cfg.solvers.begin(), cfg.solvers.end(), Solver::BranchAndBoundGcn) != cfg.solvers.end();
    if (needs_model && model == nullptr) throw ConfigError("solver bnb_gcn needs a model");
    if (model != nullptr && model->graph_id != graph_id(g)) throw ConfigError("model was trained for graph " + model->graph_id);

    BenchmarkReport report;
    report.graph_id = graph_id(g);
    report.instances = std::move(instances);
    report.solvers = cfg.solvers;
    const std::size_t per = cfg.solvers.size();
    report.rows.resize(report.instances.size() * per);

    SolveOptions opt;
    opt.timeout = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(cfg.timeout_secs));
    opt.child_order = cfg.child_order;

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < report.instances.size(); i = next++)
            for (std::size_t k = 0; k < per; ++k) {
                InstanceRow& row = report.rows[i * per + k];
                row.instance = i;
                row.solver = cfg.solvers[k];
                row.state = report.instances[i];
                row.outcome = solve(row.solver, row.state, g, t, model, opt);
                row.elapsed_us = cfg.timing
                                     ? std::chrono::duration_cast<std::chrono::microseconds>(row.outcome.elapsed).count()
                                     : 0;
            }
    };
    const std::size_t threads = std::min(cfg.threads, std::max<std::size_t>(1, report.instances.size()));
    if (threads <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(work);
    }

    bool exact = true;
    for (const Edge& e : g.edges()) exact = exact && e.weight == std::round(e.weight);
    for (std::size_t i = 0; i < report.instances.size(); ++i) {
        const InstanceRow* first = nullptr;
        bool agree = true;
        for (std::size_t k = 0; k < per; ++k) {
            const InstanceRow& row = report.rows[i * per + k];
            if (row.outcome.timed_out) continue;
            if (first == nullptr) first = &row;
            else if (!costs_agree(first->outcome.cost, row.outcome.cost, exact)) agree = false;
        }
        if (agree) continue;
        std::string dump = "graph " + report.graph_id + " instance " + to_text(report.instances[i]) + "\n";
        for (std::size_t k = 0; k < per; ++k) {
            const InstanceRow& row = report.rows[i * per + k];
            dump += "  " + std::string(solver_name(row.solver)) + " cost " + format_double(row.outcome.cost) + " order";
            for (NodeId v : row.outcome.order) dump += " " + std::to_string(v);
            dump += "\n";
        }
        throw SolverDisagreement(dump);
    }
    report.aggregates = aggregate(report);
    return report;
}

inline BenchmarkReport run_benchmark(const WeightedGraph& g, const BenchmarkConfig& cfg, const gcn::GcnModel* model = nullptr) {
    const auto t = all_pairs_shortest_paths(g);
    return run_benchmark(g, t, generate_instances(t, cfg), cfg, model);
}

inline constexpr std::string_view kInstanceCsvHeader = "graph,solver,start,dest,mandatory_count,cost,visits,elapsed_us,timeout";
inline constexpr std::string_view kAggregateCsvHeader = "solver,mandatory_count,instances,timeouts,mean_visits,mean_elapsed_us";

/// Per-instance CSV. Rows that timed out leave cost and visits empty.
inline std::string instance_csv(const BenchmarkReport& r) {
    std::string out(kInstanceCsvHeader);
    out += '\n';
    for (const InstanceRow& row : r.rows) {
        out += r.graph_id + ',' + std::string(solver_name(row.solver)) + ',' + std::to_string(row.state.start) + ',' +
               std::to_string(row.state.dest) + ',' + std::to_string(row.state.mandatory.size()) + ',';
        if (!row.outcome.timed_out) out += format_double(row.outcome.cost) + ',' + std::to_string(row.outcome.visits);
        else out += ',';
        out += ',' + std::to_string(row.elapsed_us) + ',' + (row.outcome.timed_out ? "1" : "0") + '\n';
    }
    return out;
}

/// Aggregate CSV keyed by (solver, mandatory_count); means are empty when
/// every instance of the cell timed out.
inline std::string aggregate_csv(const BenchmarkReport& r) {
    std::string out(kAggregateCsvHeader);
    out += '\n';
    auto mean = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
    for (const Aggregate& a : r.aggregates)
        out += std::string(solver_name(a.solver)) + ',' + std::to_string(a.mandatory_count) + ',' +
               std::to_string(a.instances) + ',' + std::to_string(a.timeouts) + ',' + mean(a.mean_visits) + ',' +
               mean(a.mean_elapsed_us) + '\n';
    return out;
}

/// Human-readable table in the shape of the visits/time comparison.
inline std::string summary_table(const BenchmarkReport& r) {
    std::string out = "solver      |M|     n   T/O     mean visits  mean time (s)\n";
    for (const Aggregate& a : r.aggregates) {
        char line[160];
        if (std::isnan(a.mean_visits))
            std::snprintf(line, sizeof(line), "%-10s %4zu %5zu %5zu  %14s  %13s\n", std::string(solver_name(a.solver)).c_str(),
                          a.mandatory_count, a.instances, a.timeouts, "T/O", "T/O");
        else
            std::snprintf(line, sizeof(line), "%-10s %4zu %5zu %5zu  %14.1f  %13.6f\n", std::string(solver_name(a.solver)).c_str(),
                          a.mandatory_count, a.instances, a.timeouts, a.mean_visits, a.mean_elapsed_us / 1e6);
        out += line;
    }
    return out;
}

}  // namespace pathbnb
