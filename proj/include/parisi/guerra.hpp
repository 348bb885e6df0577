#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "parisi/error.hpp"
#include "parisi/field.hpp"
#include "parisi/mixture.hpp"
#include "parisi/parallel.hpp"
#include "parisi/quadrature.hpp"
#include "parisi/rsb.hpp"

namespace parisi {

/// Parameters of the two-replica interpolation bound.
///
/// n holds n_0..n_kappa, rho holds rho_0..rho_{kappa+1} with rho_tau = |u|.
/// Increments below tau are correlated with coefficient eta t; the rest are
/// independent between the two copies.
struct CoupledParams {
    int kappa = 1;
    int tau = 1;
    std::vector<double> n{0.0, 1.0};
    std::vector<double> rho{0.0, 0.0, 1.0};
    double u = 0.0;
    int eta = 1;
    double t = 0.0;
    double lambda = 0.0;

    double correlation(int p) const { return p < tau ? eta * t : 0.0; }

    void validate() const {
        if (kappa < 1) throw InvalidArgument("kappa must be >= 1");
        if (tau < 1 || tau > kappa) throw InvalidArgument("tau must lie in 1..kappa");
        if (static_cast<int>(n.size()) != kappa + 1 || static_cast<int>(rho.size()) != kappa + 2)
            throw InvalidArgument("need |n| = kappa+1 and |rho| = kappa+2");
        if (n.front() != 0.0 || n.back() != 1.0) throw InvalidArgument("need n_0 = 0 and n_kappa = 1");
        if (rho.front() != 0.0 || rho.back() != 1.0) throw InvalidArgument("need rho_0 = 0 and rho_{kappa+1} = 1");
        for (std::size_t i = 1; i < n.size(); ++i)
            if (!(n[i] >= n[i - 1])) throw InvalidArgument("n must be nondecreasing");
        for (std::size_t i = 1; i < rho.size(); ++i)
            if (!(rho[i] >= rho[i - 1])) throw InvalidArgument("rho must be nondecreasing");
        if (!(u >= -1.0 && u <= 1.0)) throw InvalidArgument("u must lie in [-1,1]");
        if (eta != 1 && eta != -1) throw InvalidArgument("eta must be +1 or -1");
        if (u != eta * std::abs(u)) throw InvalidArgument("u must equal eta |u|");
        if (rho[tau] != std::abs(u)) throw InvalidArgument("rho_tau must equal |u|");
        if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("t must lie in [0,1]");
        if (!std::isfinite(lambda)) throw InvalidArgument("lambda must be finite");
    }
};

enum class CouplingMode { replica, chaos };

/// Coupled parameters together with the triplet they were derived from
/// (after inserting |u| when needed).
struct Coupling {
    CoupledParams params;
    RSBParams rsb;
};

/// The standard parameter choices.
///
/// replica: kappa = k+1, n_p = m_p/(1+t) below tau and m_p above, rho = q
/// after inserting |u| (so the bound at lambda = 0 is at most 2 P_k).
/// chaos: for 0 <= u <= v < 1 with q_a <= v < q_{a+1}, tau = 1,
/// n = (0, 0, m_a, ..., m_{k+1}), rho = (0, u, v, q_{a+1}, ..., 1).
inline Coupling standard_coupling(const RSBParams& rsb, double u, double t, CouplingMode mode = CouplingMode::replica,
                                  double v = std::numeric_limits<double>::quiet_NaN()) {
    rsb.validate();
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("t must lie in [0,1]");
    if (!(u >= -1.0 && u <= 1.0)) throw InvalidArgument("u must lie in [-1,1]");
    Coupling out;
    CoupledParams& cp = out.params;
    cp.u = u;
    cp.eta = u < 0.0 ? -1 : 1;
    cp.t = t;
    if (mode == CouplingMode::replica) {
        const double au = std::abs(u);
        int tau = -1;
        for (int p = 1; p <= rsb.k() + 1; ++p)
            if (rsb.q[p] == au) {
                tau = p;
                break;
            }
        RSBParams r = rsb;
        if (tau < 0) {
            r = insert_atom(rsb, au);
            for (int p = 1; p <= r.k() + 1; ++p)
                if (r.q[p] == au) {
                    tau = p;
                    break;
                }
        }
        out.rsb = r;
        cp.kappa = r.k() + 1;
        cp.tau = tau;
        cp.rho = r.q;
        cp.n.assign(r.m.begin(), r.m.end());
        for (int p = 0; p < tau; ++p) cp.n[p] = r.m[p] / (1.0 + t);
    } else {
        if (std::isnan(v)) throw InvalidArgument("chaos coupling needs v");
        if (!(u >= 0.0 && u <= v && v < 1.0)) throw InvalidArgument("chaos coupling needs 0 <= u <= v < 1");
        int a = 0;
        for (int p = 0; p <= rsb.k() + 1; ++p)
            if (rsb.q[p] <= v) a = p;
        out.rsb = rsb;
        cp.kappa = rsb.k() + 3 - a;
        cp.tau = 1;
        cp.n = {0.0, 0.0};
        cp.n.insert(cp.n.end(), rsb.m.begin() + a, rsb.m.end());
        cp.rho = {0.0, u, v};
        cp.rho.insert(cp.rho.end(), rsb.q.begin() + a + 1, rsb.q.end());
    }
    cp.validate();
    return out;
}

/// Discretisation of the two-dimensional recursion.
struct Guerra2DConfig {
    double half_width = 0.0;  // <= 0 selects the default
    int nodes = 513;          // per half-axis, including 0
    int quad_nodes = 61;
    double max_step_sd = 1.0;
    int threads = 1;
};

inline Guerra2DConfig resolve_guerra_grid(Guerra2DConfig cfg, const Mixture& mix, const FieldSpec& field) {
    if (cfg.half_width <= 0.0)
        cfg.half_width = 2.0 * std::abs(field.mean) + 6.0 * field.sd + 8.0 + 10.0 * std::sqrt(mix.d1(1.0));
    if (cfg.nodes < 16) throw InvalidArgument("2-D grid needs at least 16 nodes per axis");
    if (cfg.quad_nodes < 2) throw InvalidArgument("need at least 2 quadrature nodes");
    if (!(cfg.max_step_sd > 0.0)) throw InvalidArgument("max_step_sd must be positive");
    return cfg;
}

/// The theta terms subtracted in the bound.
inline double coupled_theta_terms(const Mixture& mix, const CoupledParams& cp) {
    double below = 0.0, above = 0.0;
    for (int p = 0; p <= cp.kappa; ++p) {
        const double d = cp.n[p] * (mix.theta(cp.rho[p + 1]) - mix.theta(cp.rho[p]));
        (p < cp.tau ? below : above) += d;
    }
    return (1.0 + cp.t) * below + above;
}

namespace detail {

/// log((e^lambda cosh s + e^-lambda cosh d) / 2), the terminal condition in
/// sum/difference coordinates s = x1 + x2, d = x1 - x2.
inline double coupled_terminal(double s, double d, double lambda) {
    const double as = std::abs(s), ad = std::abs(d);
    const double A = lambda + as + std::log1p(std::exp(-2.0 * as));
    const double B = -lambda + ad + std::log1p(std::exp(-2.0 * ad));
    const double top = std::max(A, B);
    return top + std::log1p(std::exp(-std::abs(A - B))) - 2.0 * std::numbers::ln2;
}

inline void lagrange6_weights(double u, double* w) {
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

/// Table of an even-even function on [0,S]^2, row-major: v[i*M + j] holds the
/// value at (i h, j h). Passes act along rows.
struct EvenPlane {
    int M = 0;
    double h = 0.0;
    std::vector<double> v;

    void transpose() {
        std::vector<double> t(v.size());
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) t[j * M + i] = v[i * M + j];
        v.swap(t);
    }
};

/// out(i, x_j) = (1/n) log E exp(n row_i(x_j + sigma g)), plain expectation for n = 0.
///
/// `fill(i, pad, buf)` writes row i on indices -pad..M-1+pad into buf.
template <class Fill>
void row_pass(EvenPlane& plane, double n, double sigma, const GaussHermiteRule& rule, int threads, int level,
              Fill&& fill) {
    const int M = plane.M;
    const double h = plane.h;
    const std::size_t nq = rule.size();
    std::vector<int> offset(nq);
    std::vector<double> w6(6 * nq);
    int pad = 3;
    for (std::size_t k = 0; k < nq; ++k) {
        const double shift = sigma * rule.nodes[k] / h;
        const double fl = std::floor(shift);
        offset[k] = static_cast<int>(fl) - 2;
        lagrange6_weights(shift - fl + 2.0, &w6[6 * k]);
        pad = std::max(pad, static_cast<int>(std::abs(fl)) + 4);
    }
    const bool plain = n < kMinExponent;
    std::vector<double> out(plane.v.size());
    parallel_for(static_cast<std::size_t>(M), threads, [&](std::size_t i) {
        std::vector<double> buf(M + 2 * pad);
        fill(static_cast<int>(i), pad, buf.data());
        std::vector<double> y(nq);
        const double* base = buf.data() + pad;
        for (int j = 0; j < M; ++j) {
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < nq; ++k) {
                const double* s = base + j + offset[k];
                const double* w = &w6[6 * k];
                y[k] = w[0] * s[0] + w[1] * s[1] + w[2] * s[2] + w[3] * s[3] + w[4] * s[4] + w[5] * s[5];
                top = std::max(top, y[k]);
            }
            double r;
            if (plain) {
                r = 0.0;
                for (std::size_t k = 0; k < nq; ++k) r += rule.weights[k] * y[k];
            } else {
                double acc = 0.0;
                for (std::size_t k = 0; k < nq; ++k) acc += rule.weights[k] * std::exp(n * (y[k] - top));
                r = top + std::log(acc) / n;
            }
            if (!std::isfinite(r)) throw NumericalFailure("non-finite value in coupled recursion", level);
            out[i * M + j] = r;
        }
    });
    plane.v.swap(out);
}

/// Even row extended by mirroring at 0 and linearly beyond the last node.
inline void fill_from_table(const EvenPlane& plane, int i, int pad, double* buf) {
    const int M = plane.M;
    const double* row = plane.v.data() + static_cast<std::size_t>(i) * M;
    const double slope = row[M - 1] - row[M - 2];
    for (int j = -pad; j < M + pad; ++j) {
        double val;
        if (j < 0)
            val = row[std::min(-j, M - 1)];
        else if (j < M)
            val = row[j];
        else
            val = row[M - 1] + slope * (j - M + 1);
        buf[j + pad] = val;
    }
    // mirrored values past the far end are never reached for pad < M
}

}  // namespace detail

/// Right-hand side of the coupled bound, alpha(lambda).
///
/// The recursion runs in s = x1 + x2, d = x1 - x2 where every Gaussian level
/// factorises: Var(s-increment) = 2V(1 + c), Var(d-increment) = 2V(1 - c).
/// The table covers the quadrant [0,S]^2 since the recursion is even in s and d.
inline double guerra_bound(const Mixture& mix, const FieldSpec& field, const CoupledParams& params,
                           const Guerra2DConfig& cfg_in = {}) {
    params.validate();
    const Guerra2DConfig cfg = resolve_guerra_grid(cfg_in, mix, field);
    const auto& rule = gauss_hermite(cfg.quad_nodes);
    detail::EvenPlane plane;
    plane.M = cfg.nodes;
    plane.h = cfg.half_width / (cfg.nodes - 1);
    plane.v.assign(static_cast<std::size_t>(plane.M) * plane.M, 0.0);
    for (int i = 0; i < plane.M; ++i)
        for (int j = 0; j < plane.M; ++j)
            plane.v[i * plane.M + j] = detail::coupled_terminal(i * plane.h, j * plane.h, params.lambda);

    // rows are indexed by s and run along d when `along_d` is true
    bool along_d = true;
    bool terminal = true;
    auto run = [&](bool want_d, double n, double var, int level) {
        if (var <= 0.0) return;
        if (want_d != along_d) {
            plane.transpose();
            along_d = want_d;
        }
        const int nsub =
            std::max(1, static_cast<int>(std::ceil(var / (cfg.max_step_sd * cfg.max_step_sd) - 1e-12)));
        const double sigma = std::sqrt(var / nsub);
        for (int s = 0; s < nsub; ++s) {
            if (terminal) {
                const bool d_axis = along_d;
                detail::row_pass(plane, n, sigma, rule, cfg.threads, level, [&](int i, int pad, double* buf) {
                    const double fixed = i * plane.h;
                    for (int j = -pad; j < plane.M + pad; ++j) {
                        const double x = j * plane.h;
                        buf[j + pad] = d_axis ? detail::coupled_terminal(fixed, x, params.lambda)
                                              : detail::coupled_terminal(x, fixed, params.lambda);
                    }
                });
                terminal = false;
            } else {
                detail::row_pass(plane, n, sigma, rule, cfg.threads, level,
                                 [&](int i, int pad, double* buf) { detail::fill_from_table(plane, i, pad, buf); });
            }
        }
    };
    for (int p = params.kappa; p >= 0; --p) {
        const double V = mix.d1(params.rho[p + 1]) - mix.d1(params.rho[p]);
        const double c = params.correlation(p);
        const double n = p == 0 ? 0.0 : params.n[p];
        run(true, n, 2.0 * V * (1.0 - c), p);
        run(false, n, 2.0 * V * (1.0 + c), p);
    }
    if (along_d) plane.transpose();  // rows now run along s
    // column d = 0 as a function of s
    std::vector<double> col(plane.M);
    for (int i = 0; i < plane.M; ++i) col[i] = plane.v[static_cast<std::size_t>(0) * plane.M + i];
    const EvenLine line(col, plane.h);
    const double y0 = field.expect(rule, [&](double h) { return line(2.0 * h); });
    return 2.0 * std::numbers::ln2 + y0 - params.lambda * params.u - coupled_theta_terms(mix, params);
}

struct ZeroSlope {
    double alpha0 = 0.0;
    double slope0 = 0.0;
};

/// alpha(0) and alpha'(0) through the one-dimensional D recursion; requires
/// n_p = 0 for p < tau.
inline ZeroSlope guerra_zero_and_slope(const Mixture& mix, const FieldSpec& field, const CoupledParams& params,
                                       const GridConfig& grid_in = {}) {
    params.validate();
    for (int p = 0; p < params.tau; ++p)
        if (params.n[p] != 0.0) throw InvalidArgument("zero/slope formulas need n_p = 0 below tau");
    const GridConfig g = resolve_grid(grid_in, mix, field);
    std::vector<ChainLevel> levels;
    for (int p = params.tau; p <= params.kappa; ++p)
        levels.push_back({params.n[p] < kMinExponent ? 0.0 : params.n[p],
                          std::max(0.0, mix.d1(params.rho[p + 1]) - mix.d1(params.rho[p]))});
    const Chain chain(levels, UniformGrid::symmetric(g.half_width, g.nodes), g.quad_nodes, 0, g.max_step_sd);
    const auto& rule = chain.rule();
    const double var = mix.d1(params.rho[params.tau]);
    const double sd = std::sqrt(var);
    const double c = params.correlation(0);
    const double cc = std::sqrt(std::max(0.0, 1.0 - c * c));

    const double ed = field.expect(rule, [&](double h) {
        return gaussian_expectation(rule, h, sd, [&](double x) { return chain.value(0, x); });
    });
    // whitened pair: chi_1 = sd g1, chi_2 = sd (c g1 + sqrt(1 - c^2) g2)
    const double cross = field.expect(rule, [&](double h) {
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const double g1 = rule.nodes[i];
            const double d1 = chain.jet(0, h + sd * g1).d1;
            double inner = 0.0;
            for (std::size_t j = 0; j < rule.size(); ++j)
                inner += rule.weights[j] * chain.jet(0, h + sd * (c * g1 + cc * rule.nodes[j])).d1;
            acc += rule.weights[i] * d1 * inner;
        }
        return acc;
    });
    ZeroSlope out;
    out.alpha0 = 2.0 * std::numbers::ln2 + 2.0 * ed - coupled_theta_terms(mix, params);
    out.slope0 = cross - params.u;
    return out;
}

/// alpha(0) - alpha'(0)^2 / 2, an upper bound for the constrained coupled free energy.
inline double chaos_bound(const Mixture& mix, const FieldSpec& field, const CoupledParams& params,
                          const GridConfig& grid = {}) {
    const ZeroSlope zs = guerra_zero_and_slope(mix, field, params, grid);
    return zs.alpha0 - 0.5 * zs.slope0 * zs.slope0;
}

}  // namespace parisi
