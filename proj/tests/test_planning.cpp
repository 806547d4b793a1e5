#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "pathbnb/planning.hpp"

using namespace pathbnb;

namespace {

bool has_transition(const std::vector<Transition>& ts, const Instance& s, double cost) {
    return std::any_of(ts.begin(), ts.end(), [&](const Transition& t) { return t.state == s && t.cost == cost; });
}

std::vector<std::pair<Instance, double>> as_pairs(const std::vector<Transition>& ts) {
    std::vector<std::pair<Instance, double>> out;
    for (const auto& t : ts) out.emplace_back(t.state, t.cost);
    return out;
}

}  // namespace

TEST(Instance, NormalizationAndText) {
    const Instance s{1, 3, NodeSet{1, 2, 3}};
    EXPECT_FALSE(s.is_normalized());
    EXPECT_EQ(s.normalized(), (Instance{1, 3, NodeSet{2}}));
    EXPECT_EQ(to_text(Instance{0, 3, NodeSet{1, 2}}), "0 3 1,2");
    EXPECT_EQ(to_text(Instance{4, 4, {}}), "4 4 -");
    EXPECT_EQ(parse_instance("0 3 2,1"), (Instance{0, 3, NodeSet{1, 2}}));
    EXPECT_EQ(parse_instance("5 2 -"), (Instance{5, 2, {}}));
    EXPECT_THROW(parse_instance("1 2"), ParseError);
    EXPECT_THROW(parse_instance("1 2 a"), ParseError);
    EXPECT_THROW(check_instance(Instance{0, 9, {}}, 4), InvalidInput);
    EXPECT_THROW(check_instance(Instance{0, 1, NodeSet{7}}, 4), InvalidInput);
}

TEST(Instance, EqualityAndHashAreValueBased) {
    std::unordered_map<Instance, int> m;
    m[Instance{0, 3, NodeSet{1, 2}}] = 1;
    m[Instance{0, 3, NodeSet{2, 1}}] = 2;
    EXPECT_EQ(m.size(), 1u);
}

TEST(EndState, Definition) {
    EXPECT_TRUE(is_end_state({3, 3, {}}));
    EXPECT_FALSE(is_end_state({3, 3, NodeSet{1}}));
    EXPECT_FALSE(is_end_state({0, 3, {}}));
}

TEST(Successors, PathGraph) {
    const auto g = oracle::path_graph(4);
    EXPECT_EQ(as_pairs(successors({0, 3, NodeSet{1, 2}}, g)),
              (std::vector<std::pair<Instance, double>>{{{1, 3, NodeSet{2}}, 1.0}}));
    const auto s1 = successors({1, 3, NodeSet{2}}, g);
    ASSERT_EQ(s1.size(), 2u);
    EXPECT_TRUE(has_transition(s1, {0, 3, NodeSet{2}}, 1.0));
    EXPECT_TRUE(has_transition(s1, {2, 3, {}}, 1.0));
    const auto s2 = successors({2, 3, {}}, g);
    ASSERT_EQ(s2.size(), 2u);
    EXPECT_TRUE(has_transition(s2, {1, 3, {}}, 1.0));
    EXPECT_TRUE(has_transition(s2, {3, 3, {}}, 1.0));
    EXPECT_THROW(successors({3, 3, {}}, g), InvalidInput);
}

TEST(Predecessors, PathGraph) {
    const auto g = oracle::path_graph(4);
    const auto p = predecessors({1, 3, NodeSet{2}}, g);
    ASSERT_EQ(p.size(), 3u);
    EXPECT_TRUE(has_transition(p, {0, 3, NodeSet{2}}, 1.0));
    EXPECT_TRUE(has_transition(p, {0, 3, NodeSet{1, 2}}, 1.0));
    EXPECT_TRUE(has_transition(p, {2, 3, NodeSet{1, 2}}, 1.0));
    EXPECT_FALSE(has_transition(p, {2, 3, NodeSet{2}}, 1.0));

    const auto end = predecessors({3, 3, {}}, g);
    ASSERT_EQ(end.size(), 1u);
    EXPECT_TRUE(has_transition(end, {2, 3, {}}, 1.0));
}

// Exhaustive duality over every normalized state of small graphs.
TEST(Predecessors, DualToSuccessors) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        const std::size_t n = 5 + seed % 2;
        const auto g = random_connected_graph(n, 2.5, seed);
        std::vector<Instance> states;
        for (NodeId start = 0; start < n; ++start)
            for (NodeId dest = 0; dest < n; ++dest)
                for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask)
                    if (std::popcount(mask) <= 3) {
                        const Instance s{start, dest, NodeSet::from_mask(mask)};
                        if (s.is_normalized()) states.push_back(s);
                    }
        for (const Instance& s : states) {
            for (const Transition& p : predecessors(s, g)) {
                ASSERT_FALSE(is_end_state(p.state));
                EXPECT_TRUE(has_transition(successors(p.state, g), s, p.cost)) << to_text(s) << " <- " << to_text(p.state);
            }
            if (is_end_state(s)) continue;
            for (const Transition& x : successors(s, g)) {
                if (x.state.mandatory.size() > 3) continue;
                EXPECT_TRUE(has_transition(predecessors(x.state, g), s, x.cost)) << to_text(s) << " -> " << to_text(x.state);
            }
        }
    }
}

TEST(ForwardAstar, PathGraph) {
    const auto g = oracle::path_graph(4);
    const auto r = forward_astar(Instance{0, 3, {}}, g, ZeroHeuristic{});
    EXPECT_EQ(r.path, (std::vector<NodeId>{0, 1, 2, 3}));
    EXPECT_EQ(r.cost, 3.0);
    EXPECT_EQ(forward_astar(Instance{0, 3, NodeSet{1, 2}}, g, ZeroHeuristic{}).cost, 3.0);
    const auto back = forward_astar(Instance{1, 3, NodeSet{0}}, g, ZeroHeuristic{});
    EXPECT_EQ(back.cost, 4.0);
    EXPECT_EQ(back.path, (std::vector<NodeId>{1, 0, 1, 2, 3}));
    EXPECT_EQ(validate_result(g, Instance{1, 3, NodeSet{0}}, back), "");
}

TEST(ForwardAstar, TimeoutHonored) {
    const auto g = random_connected_graph(22, 3.0, 3);
    std::mt19937_64 rng(1);
    const auto s = oracle::random_instance(22, 12, rng);
    EXPECT_THROW(forward_astar(s, g, ZeroHeuristic{}, Deadline(std::chrono::microseconds(1))), SearchTimeout);
}

TEST(ForwardAstar, HeuristicsAgreeWithBruteForce) {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 60; ++i) {
        const std::size_t n = 6 + static_cast<std::size_t>(i % 6);
        const auto g = random_connected_graph(n, 2.0 + (i % 3), static_cast<std::uint64_t>(i));
        const auto t = all_pairs_shortest_paths(g);
        const auto s = oracle::random_instance(n, static_cast<std::size_t>(i % 5), rng);
        const double expected = oracle::best_order(oracle::floyd_warshall(g), s).cost;
        const auto blind = forward_astar(s, g, ZeroHeuristic{});
        const auto informed = forward_astar(s, g, MstHeuristic(t));
        EXPECT_EQ(blind.cost, expected);
        EXPECT_EQ(informed.cost, expected);
        EXPECT_LE(informed.states_visited, blind.states_visited);
        EXPECT_EQ(validate_result(g, s, blind), "");
        EXPECT_EQ(validate_result(g, s, informed), "");
    }
}

TEST(MstHeuristic, PathGraph) {
    const auto t = all_pairs_shortest_paths(oracle::path_graph(4));
    EXPECT_EQ(mst_heuristic({0, 3, {}}, t), 3.0);
    EXPECT_EQ(mst_heuristic({0, 3, NodeSet{1, 2}}, t), 3.0);
    EXPECT_EQ(mst_heuristic({0, 3, NodeSet{2}}, t), 3.0);
}

TEST(MstHeuristic, AdmissibleAgainstBruteForce) {
    std::mt19937_64 rng(50);
    for (int i = 0; i < 50; ++i) {
        const std::size_t n = 9 + static_cast<std::size_t>(i % 6);
        const auto g = random_connected_graph(n, 3.0, 100 + static_cast<std::uint64_t>(i));
        const auto t = all_pairs_shortest_paths(g);
        const auto s = oracle::random_instance(n, static_cast<std::size_t>(i % 7), rng);
        EXPECT_LE(mst_heuristic(s, t), oracle::best_order(oracle::floyd_warshall(g), s).cost) << to_text(s);
    }
}

TEST(ValidateResult, DetectsViolations) {
    const auto g = oracle::path_graph(4);
    const Instance s{0, 3, NodeSet{1}};
    EXPECT_EQ(validate_result(g, s, {{0, 1, 2, 3}, 3.0, 0, {}}), "");
    EXPECT_NE(validate_result(g, s, {{0, 2, 3}, 2.0, 0, {}}), "");
    EXPECT_NE(validate_result(g, s, {{0, 1, 2}, 2.0, 0, {}}), "");
    EXPECT_NE(validate_result(g, s, {{0, 1, 2, 3}, 4.0, 0, {}}), "");
    EXPECT_NE(validate_result(g, Instance{0, 3, NodeSet{1}}, {{1, 2, 3}, 2.0, 0, {}}), "");
}
