#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "parisi/error.hpp"

namespace parisi {

/// Uniformly spaced nodes lo = x_0 < ... < x_{n-1} = hi.
struct UniformGrid {
    double lo = -1.0;
    double hi = 1.0;
    int n = 3;

    static UniformGrid symmetric(double half_width, int n) { return {-half_width, half_width, n}; }

    double step() const { return (hi - lo) / (n - 1); }
    double x(int i) const { return i == n - 1 ? hi : lo + i * step(); }

    void check() const {
        if (n < 3) throw InvalidArgument("grid needs at least 3 nodes");
        if (!(lo < hi)) throw InvalidArgument("grid needs lo < hi");
    }
};

/// Value, first and second derivative at a point.
struct Jet {
    double v = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

/// Tabulated function on a uniform grid with linear extension outside it.
///
/// When first and second derivative tables are supplied the interpolant is
/// the quintic Hermite spline through (value, d1, d2); otherwise it is local
/// four-point cubic Lagrange. The tails use the edge slopes.
class GridFunction {
public:
    GridFunction() = default;

    GridFunction(UniformGrid grid, std::vector<double> values) : grid_(grid), v_(std::move(values)) {
        grid_.check();
        if (static_cast<int>(v_.size()) != grid_.n) throw InvalidArgument("grid/value size mismatch");
        const double h = grid_.step();
        slope_lo_ = (v_[1] - v_[0]) / h;
        slope_hi_ = (v_[grid_.n - 1] - v_[grid_.n - 2]) / h;
    }

    GridFunction(UniformGrid grid, std::vector<double> values, std::vector<double> d1,
                 std::vector<double> d2)
        : grid_(grid), v_(std::move(values)), d1_(std::move(d1)), d2_(std::move(d2)) {
        grid_.check();
        if (static_cast<int>(v_.size()) != grid_.n || d1_.size() != v_.size() || d2_.size() != v_.size())
            throw InvalidArgument("grid/value size mismatch");
        slope_lo_ = d1_.front();
        slope_hi_ = d1_.back();
    }

    const UniformGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return v_; }
    const std::vector<double>& d1_values() const { return d1_; }
    const std::vector<double>& d2_values() const { return d2_; }
    bool has_derivatives() const { return !d1_.empty(); }
    double slope_lo() const { return slope_lo_; }
    double slope_hi() const { return slope_hi_; }

    double operator()(double x) const { return jet(x).v; }

    /// Derivative of the interpolant, order 0..2.
    double derivative(double x, int order) const {
        const Jet j = jet(x);
        switch (order) {
            case 0: return j.v;
            case 1: return j.d1;
            case 2: return j.d2;
            default: throw InvalidArgument("interpolant derivative order must be 0..2");
        }
    }

    Jet jet(double x) const {
        const int n = grid_.n;
        if (x <= grid_.lo) return {v_[0] + slope_lo_ * (x - grid_.lo), slope_lo_, 0.0};
        if (x >= grid_.hi) return {v_[n - 1] + slope_hi_ * (x - grid_.hi), slope_hi_, 0.0};
        const double h = grid_.step();
        const double s = (x - grid_.lo) / h;
        int i = std::clamp(static_cast<int>(s), 0, n - 2);
        const double t = s - i;
        return has_derivatives() ? hermite(i, t, h) : lagrange(i, t, h);
    }

private:
    Jet hermite(int i, double t, double h) const {
        const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
        const double f0 = v_[i], f1 = v_[i + 1];
        const double g0 = h * d1_[i], g1 = h * d1_[i + 1];
        const double c0 = h * h * d2_[i], c1 = h * h * d2_[i + 1];

        const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
        const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
        const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
        const double h3 = 0.5 * t3 - t4 + 0.5 * t5;
        const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
        const double h5 = 10 * t3 - 15 * t4 + 6 * t5;

        const double p0 = -30 * t2 + 60 * t3 - 30 * t4;
        const double p1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
        const double p2 = t - 4.5 * t2 + 6 * t3 - 2.5 * t4;
        const double p3 = 1.5 * t2 - 4 * t3 + 2.5 * t4;
        const double p4 = -12 * t2 + 28 * t3 - 15 * t4;

        const double q0 = -60 * t + 180 * t2 - 120 * t3;
        const double q1 = -36 * t + 96 * t2 - 60 * t3;
        const double q2 = 1 - 9 * t + 18 * t2 - 10 * t3;
        const double q3 = 3 * t - 12 * t2 + 10 * t3;
        const double q4 = -24 * t + 84 * t2 - 60 * t3;

        Jet out;
        out.v = f0 * h0 + g0 * h1 + c0 * h2 + f1 * h5 + g1 * h4 + c1 * h3;
        out.d1 = (f0 * p0 + g0 * p1 + c0 * p2 - f1 * p0 + g1 * p4 + c1 * p3) / h;
        out.d2 = (f0 * q0 + g0 * q1 + c0 * q2 - f1 * q0 + g1 * q4 + c1 * q3) / (h * h);
        return out;
    }

    Jet lagrange(int i, double t, double h) const {
        // stencil x_{j-1}..x_{j+2}, shifted inward at the edges
        const int n = grid_.n;
        int j = std::clamp(i, 1, n - 3);
        const double u = t + (i - j);  // position relative to x_j
        const double a = v_[j - 1], b = v_[j], c = v_[j + 1], d = v_[j + 2];
        // Newton form on nodes -1, 0, 1, 2
        const double d01 = b - a, d12 = c - b, d23 = d - c;
        const double d012 = 0.5 * (d12 - d01), d123 = 0.5 * (d23 - d12);
        const double d0123 = (d123 - d012) / 3.0;
        const double w0 = u + 1, w1 = u, w2 = u - 1;
        Jet out;
        out.v = a + d01 * w0 + d012 * w0 * w1 + d0123 * w0 * w1 * w2;
        out.d1 = (d01 + d012 * (w0 + w1) + d0123 * (w0 * w1 + w0 * w2 + w1 * w2)) / h;
        out.d2 = (2.0 * d012 + 2.0 * d0123 * (w0 + w1 + w2)) / (h * h);
        return out;
    }

    UniformGrid grid_{};
    std::vector<double> v_, d1_, d2_;
    double slope_lo_ = 0.0, slope_hi_ = 0.0;
};

/// Six-point Lagrange interpolation of an even function sampled on [0, S].
///
/// `v[i]` holds f(i h) for i = 0..n-1. Negative arguments fold by evenness;
/// beyond S the function is continued with the slope of the last interval.
class EvenLine {
public:
    EvenLine(std::span<const double> v, double h) : v_(v), h_(h) {
        const std::size_t n = v_.size();
        if (n < 6) throw InvalidArgument("even line needs at least 6 nodes");
        slope_ = (v_[n - 1] - v_[n - 2]) / h_;
        span_ = h_ * static_cast<double>(n - 1);
    }

    double operator()(double x) const {
        x = std::abs(x);
        const int n = static_cast<int>(v_.size());
        if (x >= span_) return v_[n - 1] + slope_ * (x - span_);
        const double s = x / h_;
        int i = std::min(static_cast<int>(s), n - 2);
        int base = std::clamp(i - 2, -2, n - 6);  // stencil base..base+5
        const double u = s - base;               // in [0, 5]
        double w[6];
        lagrange6(u, w);
        double sum = 0.0;
        for (int k = 0; k < 6; ++k) sum += w[k] * v_[std::abs(base + k)];
        return sum;
    }

private:
    static void lagrange6(double u, double* w) {
        // nodes 0..5; denominators prod_{j != k}(k - j)
        static constexpr double denom[6] = {-120.0, 24.0, -12.0, 12.0, -24.0, 120.0};
        double d[6];
        for (int k = 0; k < 6; ++k) d[k] = u - k;
        for (int k = 0; k < 6; ++k) {
            double p = 1.0;
            for (int j = 0; j < 6; ++j)
                if (j != k) p *= d[j];
            w[k] = p / denom[k];
        }
    }

    std::span<const double> v_;
    double h_;
    double slope_ = 0.0;
    double span_ = 0.0;
};

}  // namespace parisi
