#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pathbnb/error.hpp"

namespace pathbnb {

struct Line {
    std::string_view text;
    std::size_t number = 0;  // 1-based
};

/// Iterates over the content lines of a text buffer, skipping blank lines and
/// '#' comments. Trailing '\r' is tolerated.
class LineReader {
public:
    explicit LineReader(std::string_view text, bool skip_comments = true)
        : text_(text), skip_comments_(skip_comments) {}

    std::optional<Line> next() {
        while (pos_ < text_.size()) {
            const std::size_t end = std::min(text_.find('\n', pos_), text_.size());
            std::string_view raw = text_.substr(pos_, end - pos_);
            pos_ = end + 1;
            ++number_;
            if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
            const auto first = raw.find_first_not_of(" \t");
            if (first == std::string_view::npos) continue;
            if (skip_comments_ && raw[first] == '#') continue;
            return Line{raw, number_};
        }
        return std::nullopt;
    }

private:
    std::string_view text_;
    bool skip_comments_;
    std::size_t pos_ = 0;
    std::size_t number_ = 0;
};

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t at = s.find(sep, start);
        out.push_back(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
        if (at == std::string_view::npos) break;
        start = at + 1;
    }
    return out;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view token, std::size_t line = 0) {
    T value{};
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        const std::string msg = "invalid number \"" + std::string(token) + "\"";
        if (line == 0) throw ParseError(msg);
        throw ParseError(msg, line);
    }
    return value;
}

/// Shortest representation that round-trips; integral values print without
/// a fractional part.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return out;
}

}  // namespace pathbnb
