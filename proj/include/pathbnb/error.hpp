#pragma once

#include <stdexcept>
#include <string>

namespace pathbnb {

/// Malformed text input (graph, instance, dataset or config files).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    explicit ParseError(const std::string& what) : std::runtime_error(what), line_(0) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Input that parses but violates a structural invariant.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A search ran past its deadline.
class SearchTimeout : public std::runtime_error {
public:
    SearchTimeout() : std::runtime_error("search timeout") {}
};

}  // namespace pathbnb
