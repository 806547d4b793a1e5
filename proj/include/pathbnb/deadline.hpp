#pragma once

#include <chrono>
#include <optional>

#include "pathbnb/error.hpp"

namespace pathbnb {

using Clock = std::chrono::steady_clock;

/// Optional wall-clock limit shared by the solvers. Checking is amortized:
/// callers poll `expired()` every few thousand steps.
class Deadline {
public:
    Deadline() = default;
    explicit Deadline(Clock::duration budget) : at_(Clock::now() + budget) {}

    static Deadline none() { return {}; }

    bool expired() const { return at_ && Clock::now() >= *at_; }
    void check() const {
        if (expired()) throw SearchTimeout();
    }

private:
    std::optional<Clock::time_point> at_;
};

class Stopwatch {
public:
    Stopwatch() : begin_(Clock::now()) {}
    Clock::duration elapsed() const { return Clock::now() - begin_; }
    long long elapsed_us() const {
        return std::chrono::duration_cast<std::chrono::microseconds>(elapsed()).count();
    }

private:
    Clock::time_point begin_;
};

}  // namespace pathbnb
