#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "parisi/error.hpp"

namespace parisi {

/// One term beta_p^2 x^p of the mixture.
struct MixtureTerm {
    int power = 2;
    double weight = 0.0;
};

/// Result of validating a mixture; empty `violations` means valid.
struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

/// Even polynomial covariance function xi(x) = sum_p beta_p^2 x^p.
///
/// The family is even and convex with xi(0) = xi'(0) = 0, so derivatives are
/// exact polynomial evaluations. theta(x) = x xi'(x) - xi(x) is the companion
/// entering the Parisi functional.
class Mixture {
public:
    Mixture() = default;

    explicit Mixture(std::vector<MixtureTerm> terms) : terms_(std::move(terms)) {
        auto report = validate(terms_);
        if (!report.ok()) throw InvalidArgument("invalid mixture: " + report.violations.front());
    }

    /// Classic SK convention xi(x) = beta^2 x^2 / 2.
    static Mixture sk(double beta) { return Mixture({{2, beta * beta / 2.0}}); }

    static ValidationReport validate(const std::vector<MixtureTerm>& terms) {
        ValidationReport report;
        bool any_positive = false;
        for (const auto& t : terms) {
            if (t.power < 2 || t.power % 2 != 0)
                report.violations.push_back("power " + std::to_string(t.power) +
                                            " is not an even integer >= 2");
            if (!(t.weight >= 0.0) || !std::isfinite(t.weight))
                report.violations.push_back("weight for power " + std::to_string(t.power) +
                                            " must be finite and nonnegative");
            if (t.weight > 0.0) any_positive = true;
        }
        if (!any_positive) report.violations.push_back("no strictly positive weight");
        return report;
    }

    const std::vector<MixtureTerm>& terms() const { return terms_; }

    /// d^order xi / dx^order at x, order in 0..3.
    double eval(double x, int order = 0) const {
        if (order < 0 || order > 3)
            throw InvalidArgument("xi derivative order must be in 0..3, got " +
                                  std::to_string(order));
        double sum = 0.0;
        for (const auto& t : terms_) {
            const int p = t.power;
            if (order > p) continue;
            double coef = t.weight;
            for (int j = 0; j < order; ++j) coef *= static_cast<double>(p - j);
            sum += coef * std::pow(x, p - order);
        }
        return sum;
    }

    double xi(double x) const { return eval(x, 0); }
    double d1(double x) const { return eval(x, 1); }
    double d2(double x) const { return eval(x, 2); }
    double d3(double x) const { return eval(x, 3); }

    double theta(double x) const { return x * d1(x) - xi(x); }

private:
    std::vector<MixtureTerm> terms_;
};

}  // namespace parisi
