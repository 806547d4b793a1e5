#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pathbnb/bench.hpp"
#include "pathbnb/pipeline.hpp"

using namespace pathbnb;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitDisagreement = 2;
constexpr int kExitInvalidConfig = 3;

struct Globals {
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string graph;
    std::string model;
    std::string out;
    double timeout_secs = 0.0;
    std::string config;
    std::vector<std::string> settings;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

/// Writes to --out when given, stdout otherwise.
void emit(const Globals& g, std::string_view text) {
    if (g.out.empty()) std::cout << text;
    else write_file(g.out, text);
}

PipelineConfig load_config(const Globals& g) {
    PipelineConfig c;
    if (!g.config.empty()) apply_config_text(c, read_file(g.config));
    for (const std::string& s : g.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got \"" + s + "\"");
        apply_setting(c, trim(std::string_view(s).substr(0, eq)), trim(std::string_view(s).substr(eq + 1)));
    }
    if (g.seed_given) c.seed = g.seed;
    if (g.timeout_secs > 0.0) c.bench.timeout_secs = g.timeout_secs;
    validate(c);
    return c;
}

WeightedGraph require_graph(const Globals& g) {
    if (g.graph.empty()) throw ConfigError("--graph is required");
    return load_graph(read_file(g.graph));
}

gcn::GcnModel require_model(const Globals& g, const WeightedGraph& graph) {
    if (g.model.empty()) throw ConfigError("--model is required");
    return gcn::load_model(read_file(g.model), graph);
}

std::string join(const std::vector<NodeId>& v, char sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += std::to_string(v[i]);
    }
    return out;
}

std::string aggregate_path(const std::string& out) {
    const auto dot = out.rfind('.');
    const auto slash = out.rfind('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return out + ".aggregate.csv";
    return out.substr(0, dot) + ".aggregate" + out.substr(dot);
}

int run_gen_graph(const Globals& g) {
    const PipelineConfig c = load_config(g);
    const auto graph = pipeline_graph(c);
    emit(g, to_text(graph));
    std::cerr << "graph " << graph_id(graph) << ": " << graph.node_count() << " nodes, " << graph.edge_count() << " edges\n";
    return 0;
}

int run_apsp(const Globals& g) {
    const auto graph = require_graph(g);
    const auto t = all_pairs_shortest_paths(graph);
    std::string text;
    for (NodeId i = 0; i < graph.node_count(); ++i) {
        for (NodeId j = 0; j < graph.node_count(); ++j) {
            if (j) text += ' ';
            text += format_double(t.cost(i, j));
        }
        text += '\n';
    }
    emit(g, text);
    return 0;
}

int run_gen_data(const Globals& g) {
    const PipelineConfig c = load_config(g);
    const auto graph = require_graph(g);
    const auto d = pipeline_dataset(graph, c);
    emit(g, to_text(d));
    std::size_t capped = 0, timed = 0;
    for (const auto& cov : d.coverage) {
        capped += cov.stop == StopReason::ExpansionCap;
        timed += cov.stop == StopReason::TimeBudget;
    }
    std::cerr << d.pairs.size() << " pairs from " << d.coverage.size() << " terminal states (" << capped
              << " hit the expansion cap, " << timed << " the time budget)\n";
    if (d.pairs.empty()) std::cerr << "warning: empty dataset, the budget is too small\n";
    return 0;
}

int run_train(const Globals& g, const std::string& data_path, const std::string& export_path) {
    const PipelineConfig c = load_config(g);
    const auto graph = require_graph(g);
    if (g.out.empty()) throw ConfigError("--out is required for the model file");
    const Dataset d = parse_dataset(read_file(data_path));
    const auto trained = pipeline_train(graph, d, c, [](std::size_t epoch, double loss) {
        std::cerr << "epoch " << epoch + 1 << " loss " << loss << "\n";
    });
    write_file(g.out, gcn::save_model(trained.model));
    if (!export_path.empty()) write_file(export_path, gcn::export_text(trained.model));
    std::cerr << "trained on " << trained.train_pairs << " pairs";
    if (trained.heldout_pairs > 0) std::cerr << ", held-out accuracy " << trained.heldout_accuracy << " on " << trained.heldout_pairs;
    std::cerr << "\n";
    return 0;
}

int run_solve(const Globals& g, const std::string& instance_text, const std::vector<std::string>& names) {
    const PipelineConfig c = load_config(g);
    const auto graph = require_graph(g);
    const auto t = all_pairs_shortest_paths(graph);
    const Instance s = parse_instance(instance_text);
    check_instance(s, graph.node_count());

    std::vector<Solver> solvers;
    for (const std::string& n : names) {
        const auto solver = parse_solver(n);
        if (!solver) throw ConfigError("unknown solver \"" + n + "\"");
        solvers.push_back(*solver);
    }
    if (solvers.empty())
        for (Solver sv : kAllSolvers)
            if (sv != Solver::BranchAndBoundGcn || !g.model.empty()) solvers.push_back(sv);
    std::optional<gcn::GcnModel> model;
    if (std::find(solvers.begin(), solvers.end(), Solver::BranchAndBoundGcn) != solvers.end()) model = require_model(g, graph);

    SolveOptions opt;
    opt.timeout = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(c.bench.timeout_secs));
    opt.child_order = c.bench.child_order;
    std::string text;
    std::optional<double> reference;
    bool exact = true;
    for (const Edge& e : graph.edges()) exact = exact && e.weight == std::round(e.weight);
    bool disagree = false;
    for (Solver sv : solvers) {
        const auto r = solve(sv, s, graph, t, model ? &*model : nullptr, opt);
        const auto us = std::chrono::duration_cast<std::chrono::microseconds>(r.elapsed).count();
        text += to_text(s) + " " + std::string(solver_name(sv)) + " ";
        if (r.timed_out) {
            text += "T/O - - " + std::to_string(us) + "\n";
            continue;
        }
        text += format_double(r.cost) + " " + (r.order.empty() ? "-" : join(r.order, ',')) + " " + std::to_string(r.visits) +
                " " + std::to_string(us) + "\n";
        if (!reference) reference = r.cost;
        else if (!costs_agree(*reference, r.cost, exact)) disagree = true;
    }
    emit(g, text);
    if (disagree) {
        std::cerr << "cross-solver cost disagreement on " << to_text(s) << "\n";
        return kExitDisagreement;
    }
    return 0;
}

int run_bench(const Globals& g) {
    const PipelineConfig c = load_config(g);
    const auto graph = g.graph.empty() ? pipeline_graph(c) : require_graph(g);
    const BenchmarkConfig cfg = pipeline_bench_config(c);
    std::optional<gcn::GcnModel> model;
    if (std::find(cfg.solvers.begin(), cfg.solvers.end(), Solver::BranchAndBoundGcn) != cfg.solvers.end())
        model = require_model(g, graph);
    const auto report = run_benchmark(graph, cfg, model ? &*model : nullptr);
    if (g.out.empty()) {
        std::cout << instance_csv(report);
    } else {
        write_file(g.out, instance_csv(report));
        write_file(aggregate_path(g.out), aggregate_csv(report));
    }
    std::cerr << summary_table(report);
    return 0;
}

int run_probe(const Globals& g, const std::string& instance_text) {
    const auto graph = require_graph(g);
    const auto model = require_model(g, graph);
    const auto t = all_pairs_shortest_paths(graph);
    const Instance s = parse_instance(instance_text);
    check_instance(s, graph.node_count());
    const auto r = gcn::probe_upper_bound(model, s, t);
    emit(g, "order " + (r.order.empty() ? std::string("-") : join(r.order, ',')) + "\npath " + join(r.path, ' ') +
                "\ncost " + format_double(r.cost) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mandatory-node shortest path planning: exact solvers, GCN-probed branch and bound, benchmarks"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Seed for every generator (overrides the config file)")
        ->each([&](const std::string&) { g.seed_given = true; });
    app.add_option("--graph", g.graph, "Graph file");
    app.add_option("--model", g.model, "Model file");
    app.add_option("--out", g.out, "Output file (stdout when omitted)");
    app.add_option("--timeout-secs", g.timeout_secs, "Per-instance solver timeout")->check(CLI::PositiveNumber);
    app.add_option("--config", g.config, "key=value config file");
    app.add_option("--set", g.settings, "Override one config key (key=value), repeatable");

    auto* gen_graph = app.add_subcommand("gen-graph", "Generate a random connected graph");
    auto* apsp = app.add_subcommand("apsp", "Print the all-pairs shortest-path cost matrix");
    auto* gen_data = app.add_subcommand("gen-data", "Generate training pairs by backwards search");
    auto* train = app.add_subcommand("train", "Train the GCN on a dataset");
    std::string data_path, export_path;
    train->add_option("--data", data_path, "Dataset file")->required();
    train->add_option("--export-text", export_path, "Also write a text dump of the model");
    auto* solve_cmd = app.add_subcommand("solve", "Solve one instance");
    std::string instance_text;
    std::vector<std::string> solver_names;
    solve_cmd->add_option("--instance", instance_text, "\"start dest m1,m2,...\" (\"-\" for no mandatory nodes)")->required();
    solve_cmd->add_option("--solver", solver_names, "dp, bnb, astar_mst or bnb_gcn; repeatable");
    auto* bench = app.add_subcommand("bench", "Run the solver benchmark and write CSVs");
    auto* probe = app.add_subcommand("probe", "Order and upper bound from recursive GCN calls");
    probe->add_option("--instance", instance_text, "\"start dest m1,m2,...\"")->required();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalidConfig;
    }

    try {
        if (*gen_graph) return run_gen_graph(g);
        if (*apsp) return run_apsp(g);
        if (*gen_data) return run_gen_data(g);
        if (*train) return run_train(g, data_path, export_path);
        if (*solve_cmd) return run_solve(g, instance_text, solver_names);
        if (*bench) return run_bench(g);
        if (*probe) return run_probe(g, instance_text);
    } catch (const ConfigError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return kExitInvalidConfig;
    } catch (const SolverDisagreement& e) {
        std::cerr << e.what();
        return kExitDisagreement;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitFailure;
}
