#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "parisi/error.hpp"
#include "parisi/field.hpp"
#include "parisi/grid.hpp"
#include "parisi/mixture.hpp"
#include "parisi/quadrature.hpp"
#include "parisi/rsb.hpp"

namespace parisi {

/// Phi(., q) with its first two x-derivatives on the shared grid.
struct PhiCheckpoint {
    double q = 1.0;
    GridFunction phi;  // carries d1 and d2 tables

    double value(double x) const { return phi(x); }
    double dphi(double x) const { return phi.jet(x).d1; }
    double d2phi(double x) const { return phi.jet(x).d2; }
};

/// Solution of the Parisi PDE for a finitely supported measure, stored at a
/// set of q checkpoints in decreasing order.
struct PhiSolution {
    Mixture mixture;
    RSBParams measure;
    GridConfig grid_cfg;
    std::vector<PhiCheckpoint> checkpoints;

    const PhiCheckpoint* find(double q, double tol = 1e-12) const {
        for (const auto& c : checkpoints)
            if (std::abs(c.q - q) <= tol) return &c;
        return nullptr;
    }

    bool has_checkpoint(double q) const { return find(q) != nullptr; }

    const PhiCheckpoint& at(double q) const {
        const auto* c = find(q);
        if (!c) throw InvalidArgument("q = " + std::to_string(q) + " is not a stored checkpoint");
        return *c;
    }

    /// mu([0, q]) for q in [0, 1).
    double mass_below(double q) const {
        int p = 0;
        for (int i = 0; i <= measure.k() + 1; ++i)
            if (measure.q[i] <= q) p = i;
        return measure.m[p];
    }
};

namespace detail {

/// One Cole-Hopf step by trapezoidal convolution on the grid nodes:
/// exp(m Phi(x, q_lo)) = E exp(m Phi(x + sigma g, q_hi)); m = 0 smooths Phi itself.
inline GridFunction cole_hopf_step(const GridFunction& src, double m, double variance, int interval) {
    const UniformGrid g = src.grid();
    const int n = g.n, mid = n / 2;
    const double h = g.step();
    const double sigma = std::sqrt(variance);
    const auto& v = src.values();
    const auto& d1 = src.d1_values();
    const auto& d2 = src.d2_values();
    const int W = static_cast<int>(std::ceil(11.0 * sigma / h)) + 1;

    std::vector<double> kern(2 * W + 1);
    for (int j = -W; j <= W; ++j) {
        const double y = j * h / sigma;
        kern[j + W] = std::exp(-0.5 * y * y);
    }

    auto node = [&](int j) -> Jet {
        if (j < 0) return {v[0] + src.slope_lo() * (j * h), src.slope_lo(), 0.0};
        if (j >= n) return {v[n - 1] + src.slope_hi() * ((j - n + 1) * h), src.slope_hi(), 0.0};
        return {v[j], d1[j], d2[j]};
    };

    std::vector<double> ov(n), o1(n), o2(n);
    std::vector<Jet> ys(2 * W + 1);
    std::vector<double> e(2 * W + 1);
    for (int i = mid; i < n; ++i) {
        double top = -std::numeric_limits<double>::infinity();
        for (int j = -W; j <= W; ++j) {
            ys[j + W] = node(i + j);
            top = std::max(top, ys[j + W].v);
        }
        Jet out;
        if (m < kMinExponent) {
            double s = 0.0;
            for (int j = 0; j <= 2 * W; ++j) {
                s += kern[j];
                out.v += kern[j] * ys[j].v;
                out.d1 += kern[j] * ys[j].d1;
                out.d2 += kern[j] * ys[j].d2;
            }
            out.v /= s;
            out.d1 /= s;
            out.d2 /= s;
        } else {
            double s = 0.0, s1 = 0.0, ks = 0.0;
            for (int j = 0; j <= 2 * W; ++j) {
                e[j] = kern[j] * std::exp(m * (ys[j].v - top));
                s += e[j];
                s1 += e[j] * ys[j].d1;
                ks += kern[j];
            }
            out.v = top + std::log(s / ks) / m;
            out.d1 = s1 / s;
            double s2 = 0.0;
            for (int j = 0; j <= 2 * W; ++j) {
                const double dev = ys[j].d1 - out.d1;
                s2 += e[j] * (ys[j].d2 + m * dev * dev);
            }
            out.d2 = s2 / s;
        }
        if (!std::isfinite(out.v) || !std::isfinite(out.d1) || !std::isfinite(out.d2))
            throw NumericalFailure("non-finite value in Cole-Hopf step", interval);
        ov[i] = out.v;
        o1[i] = out.d1;
        o2[i] = out.d2;
        ov[n - 1 - i] = out.v;
        o1[n - 1 - i] = -out.d1;
        o2[n - 1 - i] = out.d2;
    }
    o1[mid] = 0.0;
    return GridFunction(g, std::move(ov), std::move(o1), std::move(o2));
}

/// Same step by Gauss-Hermite on the interpolated source; used when the
/// kernel is too narrow to be resolved by the grid.
inline GridFunction narrow_step(const GridFunction& src, double m, double variance, int quad_nodes, int interval) {
    return log_exp_step([&](double x) { return src.jet(x); }, ChainLevel{m < kMinExponent ? 0.0 : m, variance},
                        src.grid(), gauss_hermite(quad_nodes), interval);
}

inline GridFunction propagate(const GridFunction& src, double m, double variance, const GridConfig& cfg,
                              int interval) {
    if (variance <= 0.0) return src;
    if (std::sqrt(variance) < 2.0 * src.grid().step()) return narrow_step(src, m, variance, cfg.quad_nodes, interval);
    return cole_hopf_step(src, m, variance, interval);
}

}  // namespace detail

/// Solve backwards from Phi(x, 1) = log cosh x. Checkpoints are stored at the
/// requested q values, at 0, 1 and at every atom of the measure.
inline PhiSolution solve_phi(const Mixture& mix, const RSBParams& measure, const GridConfig& grid_cfg,
                             std::vector<double> q_checkpoints = {}) {
    measure.validate();
    if (grid_cfg.half_width <= 0.0) throw InvalidArgument("grid config must be resolved before use");
    for (double q : q_checkpoints)
        if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("checkpoints must lie in [0,1]");
    PhiSolution sol;
    sol.mixture = mix;
    sol.measure = measure;
    sol.grid_cfg = grid_cfg;

    std::vector<double> qs = q_checkpoints;
    qs.insert(qs.end(), measure.q.begin(), measure.q.end());
    std::sort(qs.begin(), qs.end(), std::greater<>());
    qs.erase(std::unique(qs.begin(), qs.end()), qs.end());

    const UniformGrid grid = UniformGrid::symmetric(grid_cfg.half_width, grid_cfg.nodes);
    GridFunction cur = detail::tabulate_log_cosh(grid);
    sol.checkpoints.push_back({1.0, cur});
    for (std::size_t i = 1; i < qs.size(); ++i) {
        const double hi = qs[i - 1], lo = qs[i];
        const double m = sol.mass_below(lo);
        cur = detail::propagate(cur, m, mix.d1(hi) - mix.d1(lo), grid_cfg, static_cast<int>(i));
        sol.checkpoints.push_back({lo, cur});
    }
    return sol;
}

/// Phi and its x-derivatives at (x, q). A q that is not stored is reached by
/// exact propagation from the stored checkpoint just above it.
inline Jet phi_jet(const PhiSolution& sol, double x, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("q must lie in [0,1]");
    if (const auto* c = sol.find(q)) return c->phi.jet(x);
    const PhiCheckpoint* above = nullptr;
    for (const auto& c : sol.checkpoints)
        if (c.q > q && (!above || c.q < above->q)) above = &c;
    if (!above) throw InvalidArgument("q is not bracketed by checkpoints");
    const double m = sol.mass_below(q);
    const double var = sol.mixture.d1(above->q) - sol.mixture.d1(q);
    return detail::log_exp_step_point([&](double y) { return above->phi.jet(y); }, x,
                                      m < kMinExponent ? 0.0 : m, std::sqrt(std::max(var, 0.0)),
                                      gauss_hermite(sol.grid_cfg.quad_nodes));
}

/// d^order Phi / dx^order at (x, q), order 1 or 2.
inline double phi_derivative(const PhiSolution& sol, double x, double q, int order) {
    if (order != 1 && order != 2) throw InvalidArgument("derivative order must be 1 or 2");
    const Jet j = phi_jet(sol, x, q);
    return order == 1 ? j.d1 : j.d2;
}

struct ConsistencyReport {
    double max_value_gap = 0.0;
    double max_derivative_gap = 0.0;
    int worst_level = -1;
};

/// Compare Phi(x, q_p) with A_p(x) at every grid node and every level.
inline ConsistencyReport consistency_check(const PhiSolution& sol, const AFamily& fam) {
    if (!sol.measure.same_as(fam.rsb)) throw InvalidArgument("PDE solution and A family use different triplets");
    ConsistencyReport rep;
    const UniformGrid g = UniformGrid::symmetric(sol.grid_cfg.half_width, sol.grid_cfg.nodes);
    for (int p = 0; p <= fam.k() + 2; ++p) {
        if (p < fam.k() + 2 && !fam.chain.has_table(p)) continue;
        const PhiCheckpoint& c = sol.at(fam.rsb.q[p]);
        for (int i = 0; i < g.n; ++i) {
            const double x = g.x(i);
            const Jet a = fam.jet(p, x);
            const Jet b = c.phi.jet(x);
            const double dv = std::abs(a.v - b.v), dd = std::abs(a.d1 - b.d1);
            if (dv > rep.max_value_gap) {
                rep.max_value_gap = dv;
                rep.worst_level = p;
            }
            rep.max_derivative_gap = std::max(rep.max_derivative_gap, dd);
        }
    }
    return rep;
}

/// max |Phi_a - Phi_b| over grid nodes of `a` and the given q values.
inline double cauchy_gap(const PhiSolution& a, const PhiSolution& b, const std::vector<double>& qs) {
    const UniformGrid g = UniformGrid::symmetric(a.grid_cfg.half_width, a.grid_cfg.nodes);
    double gap = 0.0;
    for (double q : qs)
        for (int i = 0; i < g.n; ++i) gap = std::max(gap, std::abs(phi_jet(a, g.x(i), q).v - phi_jet(b, g.x(i), q).v));
    return gap;
}

/// E (dPhi/dx (h + chi_q, q))^2 with Var chi_q = xi'(q).
inline double overlap_moment(const PhiSolution& sol, const FieldSpec& field, double q) {
    const auto& rule = gauss_hermite(sol.grid_cfg.quad_nodes);
    const double sd = std::sqrt(sol.mixture.d1(q));
    const PhiCheckpoint* c = sol.find(q);
    return field.expect(rule, [&](double h) {
        return gaussian_expectation(rule, h, sd, [&](double x) {
            const double d = c ? c->dphi(x) : phi_jet(sol, x, q).d1;
            return d * d;
        });
    });
}

}  // namespace parisi
