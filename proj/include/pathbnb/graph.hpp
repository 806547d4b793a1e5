#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pathbnb/error.hpp"
#include "pathbnb/node_set.hpp"
#include "pathbnb/text.hpp"

namespace pathbnb {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Edge {
    NodeId u = 0;
    NodeId v = 0;
    double weight = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct Neighbor {
    NodeId node = 0;
    double weight = 0.0;
};

/// Undirected, connected graph with strictly positive edge costs.
///
/// Each edge is stored once with u < v; parallel edges are collapsed to the
/// cheapest one at construction. Immutable afterwards.
class WeightedGraph {
public:
    WeightedGraph(std::size_t node_count, std::vector<Edge> edges) : node_count_(node_count) {
        if (node_count == 0) throw InvalidInput("graph must have at least one node");
        std::map<std::pair<NodeId, NodeId>, double> cheapest;
        for (const Edge& e : edges) {
            if (e.u >= node_count || e.v >= node_count) throw InvalidInput("edge endpoint out of range");
            if (e.u == e.v) throw InvalidInput("self-loop");
            if (!(e.weight > 0.0) || !std::isfinite(e.weight)) throw InvalidInput("nonpositive weight");
            auto key = std::minmax(e.u, e.v);
            auto [it, inserted] = cheapest.try_emplace({key.first, key.second}, e.weight);
            if (!inserted) it->second = std::min(it->second, e.weight);
        }
        edges_.reserve(cheapest.size());
        adjacency_.resize(node_count);
        for (const auto& [key, w] : cheapest) {
            edges_.push_back({key.first, key.second, w});
            adjacency_[key.first].push_back({key.second, w});
            adjacency_[key.second].push_back({key.first, w});
        }
        if (!is_connected()) throw InvalidInput("disconnected graph");
    }

    std::size_t node_count() const { return node_count_; }
    std::size_t edge_count() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }
    std::span<const Neighbor> neighbors(NodeId v) const { return adjacency_.at(v); }

    std::optional<double> edge_weight(NodeId u, NodeId v) const {
        for (const Neighbor& n : adjacency_.at(u))
            if (n.node == v) return n.weight;
        return std::nullopt;
    }

    friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
        return a.node_count_ == b.node_count_ && a.edges_ == b.edges_;
    }

private:
    bool is_connected() const {
        std::vector<bool> seen(node_count_, false);
        std::vector<NodeId> stack{0};
        seen[0] = true;
        std::size_t reached = 1;
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            for (const Neighbor& n : adjacency_[v]) {
                if (!seen[n.node]) {
                    seen[n.node] = true;
                    ++reached;
                    stack.push_back(n.node);
                }
            }
        }
        return reached == node_count_;
    }

    std::size_t node_count_;
    std::vector<Edge> edges_;
    std::vector<std::vector<Neighbor>> adjacency_;
};

/// Parses the "n m" / "u v w" graph text format. Lines starting with '#' and
/// blank lines are skipped.
inline WeightedGraph load_graph(std::string_view text) {
    LineReader reader(text);
    auto header = reader.next();
    if (!header) throw ParseError("empty graph file");
    auto head = split_ws(header->text);
    if (head.size() != 2) throw ParseError("expected \"n m\" header", header->number);
    const auto n = parse_number<std::size_t>(head[0], header->number);
    const auto m = parse_number<std::size_t>(head[1], header->number);

    std::vector<Edge> edges;
    edges.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto line = reader.next();
        if (!line) throw ParseError("expected " + std::to_string(m) + " edges, found " + std::to_string(i));
        auto fields = split_ws(line->text);
        if (fields.size() != 3) throw ParseError("expected \"u v w\"", line->number);
        Edge e{parse_number<NodeId>(fields[0], line->number), parse_number<NodeId>(fields[1], line->number),
               parse_number<double>(fields[2], line->number)};
        if (e.u >= n || e.v >= n) throw ParseError("node index out of range", line->number);
        if (!(e.weight > 0.0)) throw ParseError("nonpositive weight", line->number);
        edges.push_back(e);
    }
    if (auto extra = reader.next()) throw ParseError("trailing content after edge list", extra->number);
    return WeightedGraph(n, std::move(edges));
}

inline std::string to_text(const WeightedGraph& g) {
    std::string out = std::to_string(g.node_count()) + " " + std::to_string(g.edge_count()) + "\n";
    for (const Edge& e : g.edges())
        out += std::to_string(e.u) + " " + std::to_string(e.v) + " " + format_double(e.weight) + "\n";
    return out;
}

/// Content-derived identifier binding datasets and models to a graph.
inline std::string graph_id(const WeightedGraph& g) { return "g" + hex64(fnv1a(to_text(g))); }

struct GraphGenConfig {
    // Weights are drawn uniformly from the integers [min_weight, max_weight]
    // so that optimal costs compare exactly across solvers.
    int min_weight = 1;
    int max_weight = 100;
};

/// Seeded random connected graph: a random spanning tree plus uniformly drawn
/// extra edges up to round(avg_degree * n / 2) edges in total. The edge count
/// is clamped to [n - 1, n (n - 1) / 2].
inline WeightedGraph random_connected_graph(std::size_t n, double avg_degree, std::uint64_t seed,
                                            const GraphGenConfig& cfg = {}) {
    if (n == 0) throw InvalidInput("graph must have at least one node");
    if (cfg.min_weight < 1 || cfg.max_weight < cfg.min_weight) throw InvalidInput("invalid weight range");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> weight(cfg.min_weight, cfg.max_weight);

    const std::size_t max_edges = n * (n - 1) / 2;
    const double wanted = std::max(0.0, avg_degree) * static_cast<double>(n) / 2.0;
    const std::size_t target = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(wanted)), n - 1, max_edges);

    std::vector<NodeId> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<NodeId>(i);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
    std::vector<Edge> edges;
    edges.reserve(target);
    auto add = [&](NodeId a, NodeId b) {
        used[a][b] = used[b][a] = true;
        edges.push_back({std::min(a, b), std::max(a, b), static_cast<double>(weight(rng))});
    };
    for (std::size_t i = 1; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> parent(0, i - 1);
        add(order[i], order[parent(rng)]);
    }
    if (target > edges.size()) {
        std::vector<std::pair<NodeId, NodeId>> free;
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = a + 1; b < n; ++b)
                if (!used[a][b]) free.emplace_back(a, b);
        std::shuffle(free.begin(), free.end(), rng);
        for (std::size_t k = 0; edges.size() < target; ++k) add(free[k].first, free[k].second);
    }
    return WeightedGraph(n, std::move(edges));
}

/// Metric closure of a graph: all-pairs shortest-path costs plus a next-hop
/// matrix for path reconstruction.
class ShortestPathTable {
public:
    ShortestPathTable(std::size_t n, std::vector<double> cost, std::vector<NodeId> next_hop)
        : n_(n), cost_(std::move(cost)), next_hop_(std::move(next_hop)) {}

    std::size_t node_count() const { return n_; }
    double cost(NodeId i, NodeId j) const { return cost_[i * n_ + j]; }
    /// First node after i on a shortest i -> j path (i itself when i == j).
    NodeId next_hop(NodeId i, NodeId j) const { return next_hop_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<double> cost_;
    std::vector<NodeId> next_hop_;
};

/// One Dijkstra run per node. The run rooted at j fills column j: the
/// shortest-path tree parent of v is the next hop from v toward j.
inline ShortestPathTable all_pairs_shortest_paths(const WeightedGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<double> cost(n * n, kInfinity);
    std::vector<NodeId> next(n * n, 0);

    using Entry = std::pair<double, NodeId>;
    std::vector<double> dist(n);
    std::vector<NodeId> parent(n);
    for (NodeId root = 0; root < n; ++root) {
        std::fill(dist.begin(), dist.end(), kInfinity);
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
        dist[root] = 0.0;
        parent[root] = root;
        open.emplace(0.0, root);
        while (!open.empty()) {
            auto [d, v] = open.top();
            open.pop();
            if (d > dist[v]) continue;
            for (const Neighbor& nb : g.neighbors(v)) {
                const double alt = d + nb.weight;
                if (alt < dist[nb.node]) {
                    dist[nb.node] = alt;
                    parent[nb.node] = v;
                    open.emplace(alt, nb.node);
                }
            }
        }
        for (NodeId v = 0; v < n; ++v) {
            cost[v * n + root] = dist[v];
            next[v * n + root] = parent[v];
        }
    }
    // Floating-point sums along reversed paths may differ in the last ulp.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) cost[i * n + j] = cost[j * n + i] = std::min(cost[i * n + j], cost[j * n + i]);
    return ShortestPathTable(n, std::move(cost), std::move(next));
}

inline std::vector<NodeId> reconstruct_path(const ShortestPathTable& t, NodeId i, NodeId j) {
    std::vector<NodeId> path{i};
    for (NodeId v = i; v != j;) {
        v = t.next_hop(v, j);
        path.push_back(v);
    }
    return path;
}

/// Weight of a minimum spanning tree over `nodes` in the metric closure
/// (Prim; ties resolved toward the lowest node index).
inline double mst_weight(const ShortestPathTable& t, std::span<const NodeId> nodes) {
    const std::size_t k = nodes.size();
    if (k <= 1) return 0.0;
    std::vector<double> best(k, kInfinity);
    std::vector<bool> in_tree(k, false);
    best[0] = 0.0;
    double total = 0.0;
    for (std::size_t round = 0; round < k; ++round) {
        std::size_t pick = k;
        for (std::size_t i = 0; i < k; ++i)
            if (!in_tree[i] && (pick == k || best[i] < best[pick])) pick = i;
        in_tree[pick] = true;
        total += best[pick];
        for (std::size_t i = 0; i < k; ++i)
            if (!in_tree[i]) best[i] = std::min(best[i], t.cost(nodes[pick], nodes[i]));
    }
    return total;
}

inline double mst_weight(const ShortestPathTable& t, NodeSet nodes) {
    const auto list = nodes.to_vector();
    return mst_weight(t, std::span<const NodeId>(list));
}

}  // namespace pathbnb
