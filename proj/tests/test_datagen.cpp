#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "oracles.hpp"
#include "pathbnb/datagen.hpp"

using namespace pathbnb;
using namespace std::chrono_literals;

namespace {

DatagenConfig exhaustive(std::size_t max_mandatory) {
    DatagenConfig cfg;
    cfg.budget = 1h;
    cfg.max_mandatory = max_mandatory;
    return cfg;
}

Dataset ten_pairs() {
    Dataset d;
    d.graph_id = "gtest";
    for (NodeId i = 0; i < 10; ++i) d.pairs.push_back({{i, i + 1, NodeSet{i + 2}}, i + 2});
    return d;
}

}  // namespace

TEST(Datagen, PathGraphPairs) {
    const auto d = backwards_astar_generate(oracle::path_graph(4), exhaustive(3));
    const auto has = [&](const Instance& s, NodeId label) {
        return std::find(d.pairs.begin(), d.pairs.end(), TrainingPair{s, label}) != d.pairs.end();
    };
    EXPECT_TRUE(has({0, 3, NodeSet{1, 2}}, 1));
    for (const TrainingPair& p : d.pairs) {
        EXPECT_FALSE(p.state.mandatory.empty());
        EXPECT_NE(p.state, (Instance{2, 3, {}}));
    }
    ASSERT_EQ(d.coverage.size(), 4u);
    for (const auto& c : d.coverage) EXPECT_EQ(c.stop, StopReason::Exhausted);
}

TEST(Datagen, LabelsAndCostsMatchForwardOracles) {
    std::size_t checked = 0;
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const std::size_t n = 4 + seed % 3;
        const auto g = random_connected_graph(n, 2.0 + static_cast<double>(seed % 3), seed);
        const auto dist = oracle::floyd_warshall(g);
        const auto d = backwards_astar_generate(g, exhaustive(4));
        std::set<std::pair<std::uint64_t, std::pair<NodeId, NodeId>>> seen;
        for (const TrainingPair& p : d.pairs) {
            ASSERT_TRUE(p.state.is_normalized());
            ASSERT_TRUE(p.state.mandatory.contains(p.label));
            ASSERT_LE(p.state.mandatory.size(), 4u);
            EXPECT_TRUE(seen.insert({p.state.mandatory.mask(), {p.state.start, p.state.dest}}).second) << "duplicate state";
            const auto best = oracle::best_order(dist, p.state);
            EXPECT_NE(std::find(best.optimal_first.begin(), best.optimal_first.end(), p.label), best.optimal_first.end())
                << to_text(p.state) << " label " << p.label;
            EXPECT_EQ(p.cost, best.cost) << to_text(p.state);
            EXPECT_EQ(p.cost, forward_astar(p.state, g, ZeroHeuristic{}).cost) << to_text(p.state);
            ++checked;
        }
    }
    EXPECT_GT(checked, 1000u);
}

TEST(Datagen, EveryNormalizedStateCoveredWhenExhaustive) {
    const auto g = random_connected_graph(6, 2.5, 3);
    const auto d = backwards_astar_generate(g, exhaustive(4));
    std::size_t expected = 0;
    for (NodeId start = 0; start < 6; ++start)
        for (NodeId dest = 0; dest < 6; ++dest)
            for (std::uint64_t mask = 1; mask < 64; ++mask) {
                const Instance s{start, dest, NodeSet::from_mask(mask)};
                if (s.is_normalized() && s.mandatory.size() <= 4) ++expected;
            }
    EXPECT_EQ(d.pairs.size(), expected);
}

TEST(Datagen, CoversEveryMandatoryBucket) {
    const auto g = random_connected_graph(10, 3.0, 8);
    const auto d = backwards_astar_generate(g, exhaustive(5));
    std::map<std::size_t, std::size_t> buckets;
    for (const TrainingPair& p : d.pairs) ++buckets[p.state.mandatory.size()];
    for (std::size_t k = 1; k <= 5; ++k) EXPECT_GT(buckets[k], 0u) << k;
    EXPECT_EQ(buckets.count(6), 0u);
}

TEST(Datagen, ThreadCountDoesNotChangeOutput) {
    const auto g = random_connected_graph(9, 3.0, 21);
    auto cfg = exhaustive(4);
    cfg.max_expansions_per_terminal = 500;
    const auto one = backwards_astar_generate(g, cfg);
    cfg.threads = 4;
    const auto four = backwards_astar_generate(g, cfg);
    EXPECT_EQ(one.pairs, four.pairs);
    for (const auto& c : one.coverage) EXPECT_EQ(c.stop, StopReason::ExpansionCap);
}

TEST(Datagen, TinyBudgetYieldsEmptyDataset) {
    DatagenConfig cfg;
    cfg.budget = std::chrono::duration<double>(1e-12);
    const auto d = backwards_astar_generate(random_connected_graph(12, 3.0, 1), cfg);
    EXPECT_TRUE(d.pairs.empty());
    for (const auto& c : d.coverage) EXPECT_EQ(c.stop, StopReason::TimeBudget);
    cfg.budget = std::chrono::duration<double>(0.0);
    EXPECT_THROW(backwards_astar_generate(oracle::path_graph(4), cfg), InvalidInput);
}

TEST(ShuffleSplit, SizesDeterminismAndPartition) {
    const Dataset d = ten_pairs();
    const auto [train, held] = shuffle_split(d, 0.8, 5);
    EXPECT_EQ(train.pairs.size(), 8u);
    EXPECT_EQ(held.pairs.size(), 2u);
    const auto [train2, held2] = shuffle_split(d, 0.8, 5);
    EXPECT_EQ(train.pairs, train2.pairs);
    EXPECT_EQ(held.pairs, held2.pairs);

    auto key = [](const TrainingPair& p) { return to_text(p.state) + " " + std::to_string(p.label); };
    std::multiset<std::string> original, merged;
    for (const auto& p : d.pairs) original.insert(key(p));
    for (const auto& p : train.pairs) merged.insert(key(p));
    for (const auto& p : held.pairs) merged.insert(key(p));
    EXPECT_EQ(original, merged);

    EXPECT_THROW(shuffle_split(d, 1.0, 5), InvalidInput);
    EXPECT_THROW(shuffle_split(d, 0.0, 5), InvalidInput);
}

TEST(DatasetText, RoundTrip) {
    auto d = backwards_astar_generate(oracle::path_graph(5), exhaustive(3));
    shuffle_pairs(d, 17);
    const std::string text = to_text(d);
    EXPECT_EQ(text.substr(0, text.find('\n')), "#graph " + d.graph_id + " seed 17");
    const auto back = parse_dataset(text);
    EXPECT_EQ(back.graph_id, d.graph_id);
    EXPECT_EQ(back.seed, 17u);
    EXPECT_EQ(back.pairs, d.pairs);
    EXPECT_EQ(to_text(back), text);
}

TEST(DatasetText, Errors) {
    EXPECT_THROW(parse_dataset(""), ParseError);
    EXPECT_THROW(parse_dataset("0 3 1,2 1\n"), ParseError);
    try {
        parse_dataset("#graph gx seed 1\n0 3 1,2 1\n0 3 1,2 0\n");
        FAIL() << "expected an error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
    }
}
