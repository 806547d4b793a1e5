#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

#include "pathbnb/error.hpp"
#include "pathbnb/node_set.hpp"
#include "pathbnb/text.hpp"

namespace pathbnb {

/// A path-planning problem (start, dest, M): go from `start` to `dest`
/// visiting every node of `mandatory` at least once. Also used as the
/// planning state of the forward/backward search, where `start` is the
/// current node and `mandatory` the nodes still to visit.
struct Instance {
    NodeId start = 0;
    NodeId dest = 0;
    NodeSet mandatory;

    /// Drops start and dest from M. Solvers and the encoder expect
    /// normalized instances.
    Instance normalized() const { return {start, dest, mandatory.without(start).without(dest)}; }
    bool is_normalized() const { return !mandatory.contains(start) && !mandatory.contains(dest); }

    friend bool operator==(const Instance&, const Instance&) = default;
};

inline void check_instance(const Instance& s, std::size_t node_count) {
    if (node_count > NodeSet::kMaxNodes) throw InvalidInput("instances support graphs of at most 64 nodes");
    if (s.start >= node_count || s.dest >= node_count) throw InvalidInput("instance endpoint out of range");
    if ((s.mandatory.mask() >> node_count) != 0 && node_count < NodeSet::kMaxNodes)
        throw InvalidInput("mandatory node out of range");
}

/// "start dest m1,m2,..." with "-" for an empty mandatory list.
inline std::string format_mandatory(NodeSet m) {
    if (m.empty()) return "-";
    std::string out;
    m.for_each([&](NodeId v) {
        if (!out.empty()) out += ',';
        out += std::to_string(v);
    });
    return out;
}

inline std::string to_text(const Instance& s) {
    return std::to_string(s.start) + " " + std::to_string(s.dest) + " " + format_mandatory(s.mandatory);
}

inline NodeSet parse_mandatory(std::string_view field, std::size_t line = 0) {
    NodeSet m;
    if (field == "-") return m;
    for (std::string_view tok : split(field, ',')) {
        const auto v = parse_number<NodeId>(trim(tok), line);
        if (v >= NodeSet::kMaxNodes) throw ParseError("mandatory node index too large", line);
        m.insert(v);
    }
    return m;
}

inline Instance parse_instance(std::string_view text, std::size_t line = 0) {
    const auto fields = split_ws(trim(text));
    if (fields.size() != 3) {
        if (line == 0) throw ParseError("expected \"start dest m1,m2,...\"");
        throw ParseError("expected \"start dest m1,m2,...\"", line);
    }
    return {parse_number<NodeId>(fields[0], line), parse_number<NodeId>(fields[1], line), parse_mandatory(fields[2], line)};
}

}  // namespace pathbnb

template <>
struct std::hash<pathbnb::Instance> {
    std::size_t operator()(const pathbnb::Instance& s) const noexcept {
        std::size_t h = std::hash<std::uint64_t>{}(s.mandatory.mask());
        h ^= (static_cast<std::size_t>(s.start) << 8 | s.dest) * 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};
