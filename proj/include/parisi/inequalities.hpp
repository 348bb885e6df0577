#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>

#include "parisi/error.hpp"
#include "parisi/quadrature.hpp"
#include "parisi/rsb.hpp"

namespace parisi {

/// E(tanh(x1 + y1 sqrt w) - tanh(x2 + y2 sqrt w))^2 for eta = 1 and
/// E(tanh(x1 + y1 sqrt w) + tanh(x2 - y2 sqrt w))^2 for eta = -1, where y1, y2
/// are standard Gaussians with correlation t.
inline double f_eta(double x1, double x2, double w, double t, int eta, int quad_nodes = 61) {
    if (!(w >= 0.0)) throw InvalidArgument("w must be >= 0");
    if (!(t >= -1.0 && t <= 1.0)) throw InvalidArgument("t must lie in [-1,1]");
    if (eta != 1 && eta != -1) throw InvalidArgument("eta must be +1 or -1");
    const auto& rule = gauss_hermite(quad_nodes);
    const double sw = std::sqrt(w), tt = std::sqrt(std::max(0.0, 1.0 - t * t));
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double y1 = rule.nodes[i];
        const double a = std::tanh(x1 + y1 * sw);
        double inner = 0.0;
        for (std::size_t j = 0; j < rule.size(); ++j) {
            const double y2 = t * y1 + tt * rule.nodes[j];
            const double d = eta == 1 ? a - std::tanh(x2 + y2 * sw) : a + std::tanh(x2 - y2 * sw);
            inner += rule.weights[j] * d * d;
        }
        sum += rule.weights[i] * inner;
    }
    return sum;
}

/// Both sides of the two-system comparison
///   (1+t)/m log E exp(m/(1+t) (F(x1 + y1) + F(x2 + y2)))
///     <= sum_j 1/m log E exp(m F(x_j + y_j))
/// with F = A_{p+1}, Var y_j the level-p variance and E y1 y2 = eta t Var y.
inline std::pair<double, double> subadditivity_sides(const AFamily& fam, int p, double x1, double x2, double m,
                                                     double t, int eta) {
    if (p < 0 || p > fam.k() + 1) throw InvalidArgument("level out of range");
    if (!(m > 0.0 && m <= 1.0)) throw InvalidArgument("m must lie in (0,1]");
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("t must lie in [0,1]");
    if (eta != 1 && eta != -1) throw InvalidArgument("eta must be +1 or -1");
    const auto& rule = fam.chain.rule();
    const double sd = std::sqrt(fam.variance(p));
    const double c = eta * t, cc = std::sqrt(std::max(0.0, 1.0 - c * c));
    auto F = [&](double x) { return fam.value(p + 1, x); };
    const std::size_t n = rule.size();

    const double a = m / (1.0 + t);
    std::vector<double> vals(n * n);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double g1 = rule.nodes[i];
        const double f1 = F(x1 + sd * g1);
        for (std::size_t j = 0; j < n; ++j) {
            const double v = f1 + F(x2 + sd * (c * g1 + cc * rule.nodes[j]));
            vals[i * n + j] = v;
            top = std::max(top, v);
        }
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) acc += rule.weights[i] * rule.weights[j] * std::exp(a * (vals[i * n + j] - top));
    const double lhs = top + std::log(acc) / a;

    auto one = [&](double x) {
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) hi = std::max(hi, F(x + sd * rule.nodes[i]));
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += rule.weights[i] * std::exp(m * (F(x + sd * rule.nodes[i]) - hi));
        return hi + std::log(s) / m;
    };
    return {lhs, one(x1) + one(x2)};
}

/// min over random (x1, x2, m, eta) of RHS - LHS; x in [-4, 4], m in (0, 1].
inline double verify_subadditivity(const AFamily& fam, int p, double t, int samples, std::uint64_t seed = 1) {
    if (samples < 1) throw InvalidArgument("need at least one sample");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-4.0, 4.0), um(0.0, 1.0);
    double worst = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const double x1 = ux(rng), x2 = ux(rng);
        const double m = 1.0 - um(rng);
        const int eta = (rng() & 1u) ? 1 : -1;
        const auto [lhs, rhs] = subadditivity_sides(fam, p, x1, x2, m, t, eta);
        worst = std::min(worst, rhs - lhs);
    }
    return worst;
}

}  // namespace parisi
