#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

#include "parisi/error.hpp"

namespace parisi {

/// Gauss-Hermite rule for a standard normal: E f(Z) ~= sum_i weights[i] f(nodes[i]).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

namespace detail {

// Physicists' rule by Newton iteration on orthonormal Hermite functions,
// then rescaled to the probabilists' weight.
inline GaussHermiteRule compute_gauss_hermite(int n) {
    constexpr double pim4 = 0.7511255444649425;  // pi^(-1/4)
    constexpr int max_iter = 100;
    std::vector<double> x(n), w(n);
    const int half = (n + 1) / 2;
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        if (i == 0)
            z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
        else if (i == 1)
            z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
        else if (i == 2)
            z = 1.86 * z - 0.86 * x[0];
        else if (i == 3)
            z = 1.91 * z - 0.91 * x[1];
        else
            z = 2.0 * z - x[i - 2];
        double pp = 0.0;
        int it = 0;
        for (; it < max_iter; ++it) {
            double p1 = pim4, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
            }
            pp = std::sqrt(2.0 * n) * p2;
            double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
        }
        if (it == max_iter) throw NumericalFailure("Gauss-Hermite Newton iteration did not converge", i);
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
    // ascending order
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = std::numbers::sqrt2 * x[n - 1 - i];
        rule.weights[i] = w[n - 1 - i] * inv_sqrt_pi;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace detail

/// Cached rule with `n` nodes; safe to call concurrently.
inline const GaussHermiteRule& gauss_hermite(int n) {
    if (n < 1 || n > 400) throw InvalidArgument("Gauss-Hermite node count must be in 1..400");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussHermiteRule>(detail::compute_gauss_hermite(n));
    return *slot;
}

/// E f(mean + sd Z) with the given rule.
template <class F>
double gaussian_expectation(const GaussHermiteRule& rule, double mean, double sd, F&& f) {
    if (sd == 0.0) return f(mean);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * f(mean + sd * rule.nodes[i]);
    return sum;
}

}  // namespace parisi
