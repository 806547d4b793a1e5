#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "pathbnb/bnb.hpp"
#include "pathbnb/planning.hpp"

using namespace pathbnb;

namespace {

Order random_order(NodeSet m, std::mt19937_64& rng) {
    Order o = m.to_vector();
    std::shuffle(o.begin(), o.end(), rng);
    return o;
}

}  // namespace

TEST(MinPair, PathGraph) {
    const auto t = all_pairs_shortest_paths(oracle::path_graph(4));
    const NodeSet all{0, 1, 2, 3};
    const auto a = min1_min2(0, all, t);
    EXPECT_EQ(a.first, 1.0);
    EXPECT_EQ(a.second, 2.0);
    const auto b = min1_min2(1, all, t);
    EXPECT_EQ(b.first, 1.0);
    EXPECT_EQ(b.second, 1.0);
    EXPECT_THROW(min1_min2(2, NodeSet{2, 3}, t), InvalidInput);
    EXPECT_THROW(min1_min2(2, NodeSet{2}, t), InvalidInput);
}

TEST(PiHeuristic, PathGraph) {
    const auto t = all_pairs_shortest_paths(oracle::path_graph(4));
    EXPECT_EQ(pi_heuristic(0, {}, 3, t), 3.0);
    EXPECT_EQ(pi_heuristic(0, NodeSet{1, 2}, 3, t), 3.0);
}

TEST(PiHeuristic, AdmissibleOnRandomTreeNodes) {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 8 + static_cast<std::size_t>(i % 8);
        const auto g = random_connected_graph(n, 2.0 + (i % 4), 300 + static_cast<std::uint64_t>(i));
        const auto t = all_pairs_shortest_paths(g);
        const auto dist = oracle::floyd_warshall(g);
        const std::size_t k = std::min<std::size_t>(n - 2, 1 + static_cast<std::size_t>(i % 7));
        const auto s = oracle::random_instance(n, k, rng);
        // Descend a random prefix of the tree, then bound the node reached.
        Order prefix = random_order(s.mandatory, rng);
        prefix.resize(rng() % (prefix.size() + 1));
        NodeId v = s.start;
        double g_cost = 0.0;
        NodeSet rest = s.mandatory;
        for (NodeId m : prefix) {
            g_cost += dist[v][m];
            v = m;
            rest.erase(m);
        }
        if (rest.size() > 6) continue;
        const double best = oracle::best_order(dist, Instance{v, s.dest, rest}).cost;
        EXPECT_LE(g_cost + pi_heuristic(v, rest, s.dest, t), g_cost + best) << to_text(s) << " at " << v;
    }
}

TEST(BranchAndBound, PathGraph) {
    const auto t = all_pairs_shortest_paths(oracle::path_graph(4));
    const Instance s{0, 3, NodeSet{1, 2}};
    const auto plain = dfs_branch_and_bound(s, t);
    EXPECT_EQ(plain.order, (Order{1, 2}));
    EXPECT_EQ(plain.cost, 3.0);

    const auto bounded = dfs_branch_and_bound(s, t, InitialBound{5.0, {2, 1}});
    EXPECT_EQ(bounded.cost, 3.0);
    EXPECT_EQ(bounded.order, (Order{1, 2}));
    EXPECT_LE(bounded.stats.node_visits, plain.stats.node_visits);

    const auto none = dfs_branch_and_bound(Instance{0, 3, {}}, t);
    EXPECT_TRUE(none.order.empty());
    EXPECT_EQ(none.cost, 3.0);
    EXPECT_EQ(none.stats.node_visits, 1u);
}

TEST(BranchAndBound, RejectsBadInput) {
    const auto t = all_pairs_shortest_paths(oracle::path_graph(4));
    EXPECT_THROW(dfs_branch_and_bound(Instance{1, 3, NodeSet{1, 2}}, t), InvalidInput);
    EXPECT_THROW(dfs_branch_and_bound(Instance{0, 3, NodeSet{1, 2}}, t, InitialBound{5.0, {2}}), InvalidInput);
}

TEST(BranchAndBound, IncumbentRetainedOnTie) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        const auto g = random_connected_graph(12, 2.5, 900 + static_cast<std::uint64_t>(i));
        const auto t = all_pairs_shortest_paths(g);
        const auto s = oracle::random_instance(12, 1 + static_cast<std::size_t>(i % 7), rng);
        const auto optimal = dp_solve(s, t);
        const auto r = dfs_branch_and_bound(s, t, InitialBound{optimal.cost, optimal.order});
        EXPECT_EQ(r.cost, optimal.cost);
        EXPECT_EQ(r.order, optimal.order);
        ASSERT_EQ(r.stats.incumbent_trace.size(), 1u);
        EXPECT_EQ(r.stats.incumbent_trace.front().first, 0u);
    }
}

TEST(BranchAndBound, MonotonePruningAndTrace) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 300; ++i) {
        const std::size_t n = 10 + static_cast<std::size_t>(i % 10);
        const auto g = random_connected_graph(n, 3.0, 2000 + static_cast<std::uint64_t>(i));
        const auto t = all_pairs_shortest_paths(g);
        const auto s = oracle::random_instance(n, static_cast<std::size_t>(i % 9), rng);
        const Order o = random_order(s.mandatory, rng);
        for (ChildOrder policy : {ChildOrder::ByIndex, ChildOrder::NearestFirst}) {
            const auto plain = dfs_branch_and_bound(s, t, std::nullopt, policy);
            const auto bounded = dfs_branch_and_bound(s, t, InitialBound{order_cost(s, o, t), o}, policy);
            EXPECT_EQ(plain.cost, bounded.cost);
            EXPECT_LE(bounded.stats.node_visits, plain.stats.node_visits) << to_text(s);
            EXPECT_EQ(bounded.stats.incumbent_trace.front().first, 0u);
            for (const auto* r : {&plain, &bounded}) {
                const auto& trace = r->stats.incumbent_trace;
                for (std::size_t j = 1; j < trace.size(); ++j) {
                    EXPECT_LT(trace[j].second, trace[j - 1].second);
                    EXPECT_GE(trace[j].first, trace[j - 1].first);
                }
                ASSERT_FALSE(trace.empty());
                EXPECT_EQ(trace.back().second, r->cost);
            }
        }
    }
}

TEST(BranchAndBound, TimeoutHonored) {
    const auto g = random_connected_graph(40, 3.0, 1);
    const auto t = all_pairs_shortest_paths(g);
    std::mt19937_64 rng(3);
    const auto s = oracle::random_instance(40, 30, rng);
    EXPECT_THROW(dfs_branch_and_bound(s, t, std::nullopt, ChildOrder::ByIndex, Deadline(std::chrono::milliseconds(20))),
                 SearchTimeout);
    const auto mid = oracle::random_instance(40, 18, rng);
    EXPECT_THROW(dp_solve(mid, t, 20, Deadline(std::chrono::microseconds(1))), SearchTimeout);
}

TEST(DynamicProgramming, SmallCases) {
    const auto t = all_pairs_shortest_paths(oracle::path_graph(4));
    const auto r = dp_solve(Instance{0, 3, NodeSet{1, 2}}, t);
    EXPECT_EQ(r.cost, 3.0);
    EXPECT_EQ(r.order, (Order{1, 2}));
    EXPECT_EQ(r.visits, 4u);
    const auto empty = dp_solve(Instance{2, 0, {}}, t);
    EXPECT_EQ(empty.cost, 2.0);
    EXPECT_TRUE(empty.order.empty());
    EXPECT_THROW(dp_solve(Instance{0, 3, NodeSet{1, 2}}, t, 1), InvalidInput);
}

TEST(DynamicProgramming, VisitCountIsSubsetLastPairs) {
    const auto g = random_connected_graph(16, 3.0, 4);
    const auto t = all_pairs_shortest_paths(g);
    std::mt19937_64 rng(4);
    for (std::size_t k = 1; k <= 9; ++k) {
        const auto r = dp_solve(oracle::random_instance(16, k, rng), t);
        EXPECT_EQ(r.visits, k << (k - 1));
    }
}

TEST(Exactness, SolversAgreeOnRandomInstances) {
    std::mt19937_64 rng(99);
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 10 + static_cast<std::size_t>(i % 8);
        const auto g = random_connected_graph(n, 2.0 + (i % 3), 5000 + static_cast<std::uint64_t>(i));
        const auto t = all_pairs_shortest_paths(g);
        const auto s = oracle::random_instance(n, static_cast<std::size_t>(i % 10), rng);
        const auto dp = dp_solve(s, t);
        const auto bnb = dfs_branch_and_bound(s, t);
        const Order o = random_order(s.mandatory, rng);
        const auto bounded = dfs_branch_and_bound(s, t, InitialBound{order_cost(s, o, t), o});
        ASSERT_EQ(bnb.cost, dp.cost) << to_text(s);
        ASSERT_EQ(bounded.cost, dp.cost) << to_text(s);
        EXPECT_EQ(order_cost(s, dp.order, t), dp.cost);
        EXPECT_EQ(order_cost(s, bnb.order, t), dp.cost);
        if (s.mandatory.size() <= 6) {
            EXPECT_EQ(forward_astar(s, g, MstHeuristic(t)).cost, dp.cost) << to_text(s);
            EXPECT_EQ(oracle::best_order(oracle::floyd_warshall(g), s).cost, dp.cost) << to_text(s);
        }
    }
}

TEST(OrderToPath, Examples) {
    const auto t = all_pairs_shortest_paths(oracle::path_graph(4));
    const auto direct = order_to_path(Instance{0, 3, {}}, {}, t);
    EXPECT_EQ(direct.path, (std::vector<NodeId>{0, 1, 2, 3}));
    EXPECT_EQ(direct.cost, 3.0);
    const auto via = order_to_path(Instance{0, 3, NodeSet{1, 2}}, {1, 2}, t);
    EXPECT_EQ(via.path, (std::vector<NodeId>{0, 1, 2, 3}));
    EXPECT_EQ(via.cost, 3.0);
    const auto back = order_to_path(Instance{0, 3, NodeSet{1, 2}}, {2, 1}, t);
    EXPECT_EQ(back.path, (std::vector<NodeId>{0, 1, 2, 1, 2, 3}));
    EXPECT_EQ(back.cost, 5.0);
    EXPECT_THROW(order_to_path(Instance{0, 3, NodeSet{1, 2}}, {1}, t), InvalidInput);
    EXPECT_THROW(order_to_path(Instance{0, 3, NodeSet{1, 2}}, {1, 1}, t), InvalidInput);
}

TEST(OrderToPath, CostMatchesSegmentsAndPathIsFeasible) {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
        const std::size_t n = 6 + static_cast<std::size_t>(i % 12);
        const auto g = random_connected_graph(n, 2.5, 7000 + static_cast<std::uint64_t>(i));
        const auto t = all_pairs_shortest_paths(g);
        const auto dist = oracle::floyd_warshall(g);
        const auto s = oracle::random_instance(n, static_cast<std::size_t>(i) % (n - 1), rng);
        const Order o = random_order(s.mandatory, rng);
        const auto pc = order_to_path(s, o, t);
        double expected = 0.0;
        NodeId at = s.start;
        for (NodeId m : o) {
            expected += dist[at][m];
            at = m;
        }
        expected += dist[at][s.dest];
        EXPECT_EQ(pc.cost, expected);
        EXPECT_EQ(validate_result(g, s, {pc.path, pc.cost, 0, {}}), "");
    }
}
