#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "parisi/rsb.hpp"

namespace parisi {

/// Worst values of the derivative bounds over sampled points and all levels.
///
/// Third and fourth derivatives come from central differences of the
/// interpolated second derivative with step `fd_step`.
struct DerivativeBounds {
    double max_abs_d1 = 0.0;
    double min_d2 = std::numeric_limits<double>::infinity();
    double max_d2_excess = -std::numeric_limits<double>::infinity();  // A'' - min(1, C / cosh^2 x)
    double max_abs_d3 = 0.0;
    double max_abs_d4 = 0.0;
    int points = 0;
};

inline DerivativeBounds derivative_bounds(const AFamily& fam, const Mixture& mix, int samples, std::mt19937_64& rng,
                                          double x_range = 8.0, double fd_step = 1e-3) {
    std::uniform_real_distribution<double> xs(-x_range, x_range);
    const double C = 4.0 * std::exp(2.0 * mix.d1(1.0));
    DerivativeBounds b;
    for (int p = 0; p <= fam.k() + 2; ++p) {
        if (p <= fam.k() + 1 && !fam.chain.has_table(p)) continue;
        for (int s = 0; s < samples; ++s) {
            const double x = xs(rng);
            const Jet j = fam.jet(p, x);
            const double ch = std::cosh(x);
            b.max_abs_d1 = std::max(b.max_abs_d1, std::abs(j.d1));
            b.min_d2 = std::min(b.min_d2, j.d2);
            b.max_d2_excess = std::max(b.max_d2_excess, j.d2 - std::min(1.0, C / (ch * ch)));
            const double up = fam.jet(p, x + fd_step).d2, down = fam.jet(p, x - fd_step).d2;
            b.max_abs_d3 = std::max(b.max_abs_d3, std::abs((up - down) / (2 * fd_step)));
            b.max_abs_d4 = std::max(b.max_abs_d4, std::abs((up - 2 * j.d2 + down) / (fd_step * fd_step)));
            ++b.points;
        }
    }
    return b;
}

}  // namespace parisi
