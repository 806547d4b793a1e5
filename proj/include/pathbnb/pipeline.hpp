#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "pathbnb/bench.hpp"
#include "pathbnb/datagen.hpp"
#include "pathbnb/gcn.hpp"
#include "pathbnb/graph.hpp"
#include "pathbnb/text.hpp"

namespace pathbnb {

// Settings for the graph -> data -> model -> benchmark workflow. Every stage
// draws from its own seed, which defaults to the global one.

struct PipelineConfig {
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> graph_seed;
    std::optional<std::uint64_t> data_seed;
    std::optional<std::uint64_t> train_seed;
    std::optional<std::uint64_t> bench_seed;

    std::size_t graph_nodes = 22;
    double graph_degree = 3.0;
    GraphGenConfig weights;

    DatagenConfig data;
    double holdout_fraction = 0.2;

    gcn::Hyperparameters hyper;
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    double learning_rate = 1e-4;

    BenchmarkConfig bench;

    std::uint64_t graph_seed_value() const { return graph_seed.value_or(seed); }
    std::uint64_t data_seed_value() const { return data_seed.value_or(seed); }
    std::uint64_t train_seed_value() const { return train_seed.value_or(seed); }
    std::uint64_t bench_seed_value() const { return bench_seed.value_or(seed); }
};

namespace detail {

template <typename T>
T config_number(std::string_view key, std::string_view value) {
    try {
        return parse_number<T>(value);
    } catch (const ParseError&) {
        throw ConfigError("invalid value \"" + std::string(value) + "\" for " + std::string(key));
    }
}

inline bool config_flag(std::string_view key, std::string_view value) {
    if (value == "on" || value == "true" || value == "1") return true;
    if (value == "off" || value == "false" || value == "0") return false;
    throw ConfigError("invalid value \"" + std::string(value) + "\" for " + std::string(key) + " (expected on/off)");
}

/// "5..12" or "5,7,9".
inline std::vector<std::size_t> config_counts(std::string_view key, std::string_view value) {
    std::vector<std::size_t> out;
    if (const auto dots = value.find(".."); dots != std::string_view::npos) {
        const auto lo = config_number<std::size_t>(key, value.substr(0, dots));
        const auto hi = config_number<std::size_t>(key, value.substr(dots + 2));
        if (hi < lo) throw ConfigError("empty range for " + std::string(key));
        for (std::size_t k = lo; k <= hi; ++k) out.push_back(k);
        return out;
    }
    for (std::string_view tok : split(value, ',')) out.push_back(config_number<std::size_t>(key, trim(tok)));
    return out;
}

}  // namespace detail

inline void apply_setting(PipelineConfig& c, std::string_view key, std::string_view value) {
    using detail::config_number;
    if (key == "seed") c.seed = config_number<std::uint64_t>(key, value);
    else if (key == "graph_seed") c.graph_seed = config_number<std::uint64_t>(key, value);
    else if (key == "data_seed") c.data_seed = config_number<std::uint64_t>(key, value);
    else if (key == "train_seed") c.train_seed = config_number<std::uint64_t>(key, value);
    else if (key == "bench_seed") c.bench_seed = config_number<std::uint64_t>(key, value);
    else if (key == "graph_nodes") c.graph_nodes = config_number<std::size_t>(key, value);
    else if (key == "graph_degree") c.graph_degree = config_number<double>(key, value);
    else if (key == "min_weight") c.weights.min_weight = config_number<int>(key, value);
    else if (key == "max_weight") c.weights.max_weight = config_number<int>(key, value);
    else if (key == "data_budget_secs") c.data.budget = std::chrono::duration<double>(config_number<double>(key, value));
    else if (key == "data_max_mandatory") c.data.max_mandatory = config_number<std::size_t>(key, value);
    else if (key == "data_max_expansions") c.data.max_expansions_per_terminal = config_number<std::size_t>(key, value);
    else if (key == "data_threads") c.data.threads = config_number<std::size_t>(key, value);
    else if (key == "holdout_fraction") c.holdout_fraction = config_number<double>(key, value);
    else if (key == "gcn_width") c.hyper.width = config_number<std::size_t>(key, value);
    else if (key == "gcn_layers") c.hyper.conv_layers = config_number<std::size_t>(key, value);
    else if (key == "dropout") c.hyper.dropout = config_number<double>(key, value);
    else if (key == "bn_decay") c.hyper.bn_decay = config_number<double>(key, value);
    else if (key == "epochs") c.epochs = config_number<std::size_t>(key, value);
    else if (key == "batch_size") c.batch_size = config_number<std::size_t>(key, value);
    else if (key == "learning_rate") c.learning_rate = config_number<double>(key, value);
    else if (key == "decimation_ratio") c.bench.decimation_ratio = config_number<double>(key, value);
    else if (key == "mandatory_counts") c.bench.mandatory_counts = detail::config_counts(key, value);
    else if (key == "instances_per_pair_per_count") c.bench.instances_per_pair_per_count = config_number<std::size_t>(key, value);
    else if (key == "timeout_secs") c.bench.timeout_secs = config_number<double>(key, value);
    else if (key == "timing") c.bench.timing = detail::config_flag(key, value);
    else if (key == "bench_threads") c.bench.threads = config_number<std::size_t>(key, value);
    else if (key == "child_order") {
        if (value == "index") c.bench.child_order = ChildOrder::ByIndex;
        else if (value == "nearest") c.bench.child_order = ChildOrder::NearestFirst;
        else throw ConfigError("child_order must be \"index\" or \"nearest\"");
    } else if (key == "solvers") {
        c.bench.solvers.clear();
        if (trim(value) == "none") return;
        for (std::string_view tok : split(value, ',')) {
            const auto s = parse_solver(trim(tok));
            if (!s) throw ConfigError("unknown solver \"" + std::string(trim(tok)) + "\"");
            c.bench.solvers.push_back(*s);
        }
    } else {
        throw ConfigError("unknown config key \"" + std::string(key) + "\"");
    }
}

/// One "key=value" per line; blank lines and '#' comments are skipped.
inline void apply_config_text(PipelineConfig& c, std::string_view text) {
    LineReader reader(text);
    while (auto line = reader.next()) {
        const auto eq = line->text.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line->number) + ": expected key=value");
        try {
            apply_setting(c, trim(line->text.substr(0, eq)), trim(line->text.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line->number) + ": " + e.what());
        }
    }
}

/// Range checks that do not need the graph.
inline void validate(const PipelineConfig& c) {
    if (c.graph_nodes == 0 || c.graph_nodes > NodeSet::kMaxNodes)
        throw ConfigError("graph_nodes must lie in [1, " + std::to_string(NodeSet::kMaxNodes) + "]");
    if (!(c.graph_degree >= 0.0)) throw ConfigError("graph_degree must be nonnegative");
    if (c.weights.min_weight < 1 || c.weights.max_weight < c.weights.min_weight) throw ConfigError("invalid weight range");
    if (!(c.data.budget.count() > 0.0)) throw ConfigError("data_budget_secs must be positive");
    if (c.data.threads == 0) throw ConfigError("data_threads must be positive");
    if (!(c.holdout_fraction >= 0.0 && c.holdout_fraction < 1.0)) throw ConfigError("holdout_fraction must lie in [0, 1)");
    if (c.hyper.width == 0 || c.hyper.conv_layers == 0) throw ConfigError("GCN width and layer count must be positive");
    if (!(c.hyper.dropout >= 0.0 && c.hyper.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    if (!(c.hyper.bn_decay >= 0.0 && c.hyper.bn_decay < 1.0)) throw ConfigError("bn_decay must lie in [0, 1)");
    if (c.batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
}

inline WeightedGraph pipeline_graph(const PipelineConfig& c) {
    return random_connected_graph(c.graph_nodes, c.graph_degree, c.graph_seed_value(), c.weights);
}

/// Generated pairs, shuffled under the data seed.
inline Dataset pipeline_dataset(const WeightedGraph& g, const PipelineConfig& c) {
    Dataset d = backwards_astar_generate(g, c.data);
    shuffle_pairs(d, c.data_seed_value());
    return d;
}

struct TrainedModel {
    gcn::GcnModel model;
    gcn::TrainReport report;
    std::size_t train_pairs = 0;
    std::size_t heldout_pairs = 0;
    /// Top-1 accuracy on the held-out split; NaN without one.
    double heldout_accuracy = std::nan("");
};

/// Splits off the held-out share, trains on the rest.
inline TrainedModel pipeline_train(const WeightedGraph& g, const Dataset& d, const PipelineConfig& c,
                                   std::function<void(std::size_t, double)> on_epoch = {}) {
    TrainedModel out{gcn::make_model(g, c.hyper, c.train_seed_value()), {}, 0, 0, std::nan("")};
    Dataset train = d;
    Dataset held;
    if (c.holdout_fraction > 0.0 && d.pairs.size() >= 2) std::tie(train, held) = shuffle_split(d, 1.0 - c.holdout_fraction, c.train_seed_value());
    gcn::TrainConfig tc;
    tc.epochs = c.epochs;
    tc.batch_size = c.batch_size;
    tc.seed = c.train_seed_value();
    tc.adam.learning_rate = c.learning_rate;
    tc.on_epoch = std::move(on_epoch);
    out.report = gcn::train(out.model, train, tc);
    out.train_pairs = train.pairs.size();
    out.heldout_pairs = held.pairs.size();
    if (!held.pairs.empty()) out.heldout_accuracy = gcn::accuracy(out.model, held);
    return out;
}

inline BenchmarkConfig pipeline_bench_config(const PipelineConfig& c) {
    BenchmarkConfig b = c.bench;
    b.seed = c.bench_seed_value();
    return b;
}

}  // namespace pathbnb
