#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace fim {

// Thrown when an argument violates a documented precondition.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when a computation degenerates numerically (non-finite values,
// starved kernel weights, diverging training loss).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw validation_error(msg);
}

inline void check_finite(double x, const std::string& what) {
    if (!std::isfinite(x)) throw numeric_error(what + " is not finite");
}

} // namespace fim
