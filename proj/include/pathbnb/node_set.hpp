#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

#include "pathbnb/error.hpp"

namespace pathbnb {

using NodeId = std::uint32_t;

/// Set of graph nodes stored as a 64-bit mask.
///
/// Planning states, the mandatory search tree and the subset DP all index
/// subsets of mandatory nodes, so instances are limited to graphs with at
/// most `kMaxNodes` nodes. Graph-level algorithms (shortest paths, I/O) have
/// no such limit.
class NodeSet {
public:
    static constexpr NodeId kMaxNodes = 64;

    constexpr NodeSet() = default;
    NodeSet(std::initializer_list<NodeId> nodes) {
        for (NodeId v : nodes) insert(v);
    }
    template <typename Range>
    static NodeSet from_range(const Range& nodes) {
        NodeSet s;
        for (auto v : nodes) s.insert(static_cast<NodeId>(v));
        return s;
    }
    static constexpr NodeSet from_mask(std::uint64_t mask) {
        NodeSet s;
        s.mask_ = mask;
        return s;
    }

    constexpr std::uint64_t mask() const { return mask_; }
    constexpr bool empty() const { return mask_ == 0; }
    constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(mask_)); }
    constexpr bool contains(NodeId v) const { return v < kMaxNodes && ((mask_ >> v) & 1U) != 0; }

    void insert(NodeId v) {
        if (v >= kMaxNodes) throw InvalidInput("node index exceeds NodeSet capacity");
        mask_ |= bit(v);
    }
    constexpr void erase(NodeId v) {
        if (v < kMaxNodes) mask_ &= ~bit(v);
    }
    NodeSet with(NodeId v) const {
        NodeSet s = *this;
        s.insert(v);
        return s;
    }
    constexpr NodeSet without(NodeId v) const {
        NodeSet s = *this;
        s.erase(v);
        return s;
    }

    /// Lowest node in the set; undefined on an empty set.
    constexpr NodeId front() const { return static_cast<NodeId>(std::countr_zero(mask_)); }

    template <typename Fn>
    constexpr void for_each(Fn&& fn) const {
        for (std::uint64_t m = mask_; m != 0; m &= m - 1) fn(static_cast<NodeId>(std::countr_zero(m)));
    }

    std::vector<NodeId> to_vector() const {
        std::vector<NodeId> out;
        out.reserve(size());
        for_each([&](NodeId v) { out.push_back(v); });
        return out;
    }

    friend constexpr bool operator==(NodeSet, NodeSet) = default;
    friend constexpr NodeSet operator|(NodeSet a, NodeSet b) { return from_mask(a.mask_ | b.mask_); }
    friend constexpr NodeSet operator&(NodeSet a, NodeSet b) { return from_mask(a.mask_ & b.mask_); }

private:
    static constexpr std::uint64_t bit(NodeId v) { return std::uint64_t{1} << v; }

    std::uint64_t mask_ = 0;
};

}  // namespace pathbnb

template <>
struct std::hash<pathbnb::NodeSet> {
    std::size_t operator()(pathbnb::NodeSet s) const noexcept { return std::hash<std::uint64_t>{}(s.mask()); }
};
