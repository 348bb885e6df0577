#pragma once

#include <stdexcept>
#include <string>

namespace parisi {

/// Bad argument or precondition violation.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Non-finite value encountered while running a recursion.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, int level)
        : std::runtime_error(what + " (level " + std::to_string(level) + ")"), level_(level) {}

    int level() const noexcept { return level_; }

private:
    int level_;
};

/// Root bracket does not change sign. Carries both endpoint values.
class NoBracket : public std::runtime_error {
public:
    NoBracket(double lo_value, double hi_value)
        : std::runtime_error("no sign change on bracket: f(lo)=" + std::to_string(lo_value) +
                             ", f(hi)=" + std::to_string(hi_value)),
          lo_(lo_value),
          hi_(hi_value) {}

    double lo_value() const noexcept { return lo_; }
    double hi_value() const noexcept { return hi_; }

private:
    double lo_, hi_;
};

/// Problem size exceeds what exact enumeration supports.
class CapacityError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Measure with no atom above the mass threshold.
class DegenerateMeasure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace parisi
