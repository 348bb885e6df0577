#pragma once

// Reference computations for the tests, written without the library's
// quadrature or grid code.

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

/// E f(mean + sd Z) by composite Simpson on [-L, L] standard deviations.
inline double gauss_simpson(const std::function<double(double)>& f, double mean, double sd, int n = 20000,
                            double L = 12.0) {
    if (sd == 0.0) return f(mean);
    const double h = 2.0 * L / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double z = -L + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * std::exp(-0.5 * z * z) * f(mean + sd * z);
    }
    return s * h / 3.0 / std::sqrt(2.0 * std::numbers::pi);
}

inline double log_cosh(double x) {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

/// Replica-symmetric functional for xi = beta^2 x^2 / 2 and constant field h.
inline double rs_sk(double beta, double h, double q) {
    const double b2 = beta * beta;
    const double e = gauss_simpson([](double x) { return log_cosh(x); }, h, std::sqrt(b2 * q));
    // xi'(1) - xi'(q) = b2 (1 - q); theta(x) = b2 x^2 / 2
    return std::numbers::ln2 + e + 0.5 * b2 * (1.0 - q) - 0.5 * (0.5 * b2 - 0.5 * b2 * q * q);
}

/// Fixed point of q = E tanh^2(h + z sqrt(beta^2 q)) by plain iteration.
inline double rs_fixed_point(double beta, double h, double q0 = 0.5, int iters = 20000) {
    double q = q0;
    for (int i = 0; i < iters; ++i) {
        const double next = gauss_simpson(
            [](double x) {
                const double t = std::tanh(x);
                return t * t;
            },
            h, beta * std::sqrt(q), 4000);
        if (std::abs(next - q) < 1e-15) return next;
        q = next;
    }
    return q;
}

}  // namespace oracle
