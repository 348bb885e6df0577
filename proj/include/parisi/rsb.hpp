#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "parisi/error.hpp"
#include "parisi/field.hpp"
#include "parisi/grid.hpp"
#include "parisi/mixture.hpp"
#include "parisi/quadrature.hpp"

namespace parisi {

/// Atom of a finitely supported measure on [0,1].
struct Atom {
    double q = 0.0;
    double mass = 0.0;
};

/// Discrete replica-symmetry-breaking triplet (k, m, q).
///
/// m holds m_0..m_{k+1} with m_0 = 0 and m_{k+1} = 1; q holds q_0..q_{k+2}
/// with q_0 = 0 and q_{k+2} = 1. Equivalently a probability measure with
/// mu([0, q_p]) = m_p for p = 1..k+1.
struct RSBParams {
    std::vector<double> m{0.0, 1.0};
    std::vector<double> q{0.0, 0.0, 1.0};

    int k() const { return static_cast<int>(m.size()) - 2; }

    /// k = 0 triplet with its single atom at q1.
    static RSBParams replica_symmetric(double q1) { return {{0.0, 1.0}, {0.0, q1, 1.0}}; }

    /// Build from interior values m_1..m_k and q_1..q_{k+1}.
    static RSBParams from_interior(const std::vector<double>& m_in, const std::vector<double>& q_in) {
        if (q_in.size() != m_in.size() + 1) throw InvalidArgument("need k values of m and k+1 values of q");
        RSBParams r;
        r.m = {0.0};
        r.m.insert(r.m.end(), m_in.begin(), m_in.end());
        r.m.push_back(1.0);
        r.q = {0.0};
        r.q.insert(r.q.end(), q_in.begin(), q_in.end());
        r.q.push_back(1.0);
        r.validate();
        return r;
    }

    /// Atoms (q_p, m_p - m_{p-1}) for p = 1..k+1; zero-mass atoms included.
    std::vector<Atom> atoms() const {
        std::vector<Atom> out;
        for (int p = 1; p <= k() + 1; ++p) out.push_back({q[p], m[p] - m[p - 1]});
        return out;
    }

    /// Inverse of atoms(); atoms must be sorted by q with masses summing to 1.
    static RSBParams from_atoms(const std::vector<Atom>& atoms) {
        if (atoms.empty()) throw InvalidArgument("measure needs at least one atom");
        RSBParams r;
        r.m = {0.0};
        r.q = {0.0};
        double cum = 0.0;
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            cum += atoms[i].mass;
            r.q.push_back(atoms[i].q);
            if (i + 1 < atoms.size()) r.m.push_back(std::min(cum, 1.0));
        }
        r.m.push_back(1.0);
        r.q.push_back(1.0);
        r.validate();
        return r;
    }

    void validate() const {
        const int kk = k();
        if (kk < 0 || static_cast<int>(q.size()) != kk + 3)
            throw InvalidArgument("RSB triplet needs |m| = k+2 and |q| = k+3");
        if (m.front() != 0.0 || m.back() != 1.0) throw InvalidArgument("need m_0 = 0 and m_{k+1} = 1");
        if (q.front() != 0.0 || q.back() != 1.0) throw InvalidArgument("need q_0 = 0 and q_{k+2} = 1");
        for (std::size_t i = 1; i < m.size(); ++i)
            if (!(m[i] >= m[i - 1])) throw InvalidArgument("m must be nondecreasing");
        for (std::size_t i = 1; i < q.size(); ++i)
            if (!(q[i] >= q[i - 1])) throw InvalidArgument("q must be nondecreasing");
    }

    bool same_as(const RSBParams& o) const { return m == o.m && q == o.q; }
};

/// Insert an atom at q_star without changing the measure.
///
/// The new level duplicates the mass below it, so the functional value is
/// unchanged.
inline RSBParams insert_atom(const RSBParams& rsb, double q_star) {
    if (!(q_star >= 0.0 && q_star <= 1.0)) throw InvalidArgument("inserted atom must lie in [0,1]");
    rsb.validate();
    const int kk = rsb.k();
    int tau = 1;
    while (tau < kk + 2 && rsb.q[tau] < q_star) ++tau;
    RSBParams out;
    out.q.assign(rsb.q.begin(), rsb.q.begin() + tau);
    out.q.push_back(q_star);
    out.q.insert(out.q.end(), rsb.q.begin() + tau, rsb.q.end());
    out.m.assign(rsb.m.begin(), rsb.m.begin() + tau);
    out.m.push_back(rsb.m[tau - 1]);
    out.m.insert(out.m.end(), rsb.m.begin() + tau, rsb.m.end());
    return out;
}

/// Discretisation of the x-axis and Gaussian integrals.
struct GridConfig {
    double half_width = 0.0;  // <= 0 selects the default for the model
    int nodes = 2049;
    int quad_nodes = 61;
    double max_step_sd = 1.0;  // levels with a wider increment are split into sub-steps
};

inline double default_half_width(const Mixture& mix, const FieldSpec& field) {
    return 8.0 + 6.0 * std::sqrt(mix.d1(1.0)) + std::abs(field.mean) + 5.0 * field.sd;
}

inline GridConfig resolve_grid(GridConfig cfg, const Mixture& mix, const FieldSpec& field) {
    if (cfg.half_width <= 0.0) cfg.half_width = default_half_width(mix, field);
    if (cfg.nodes < 5 || cfg.nodes % 2 == 0) throw InvalidArgument("grid node count must be odd and >= 5");
    if (cfg.quad_nodes < 2) throw InvalidArgument("need at least 2 quadrature nodes");
    if (!(cfg.max_step_sd > 0.0)) throw InvalidArgument("max_step_sd must be positive");
    return cfg;
}

/// Smallest exponent treated as a genuine log-E-exp step.
inline constexpr double kMinExponent = 1e-8;

/// log cosh with derivatives, stable for large |x|.
inline Jet log_cosh_jet(double x) {
    const double a = std::abs(x);
    const double e = std::exp(-2.0 * a);
    Jet j;
    j.v = a + std::log1p(e) - std::numbers::ln2;
    j.d1 = std::tanh(x);
    j.d2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
    return j;
}

/// One Gaussian level of a recursion: exponent m and variance of the increment.
struct ChainLevel {
    double m = 0.0;
    double variance = 0.0;
};

namespace detail {

/// (1/m) log E exp(m f(x + sigma g)) and its x-derivatives at one point;
/// plain expectation when m is (numerically) zero.
template <class Source>
Jet log_exp_step_point(const Source& f, double x, double m, double sigma, const GaussHermiteRule& rule) {
    const std::size_t nq = rule.size();
    if (sigma == 0.0) return f(x);
    if (m < kMinExponent) {
        Jet out;
        for (std::size_t j = 0; j < nq; ++j) {
            const Jet y = f(x + sigma * rule.nodes[j]);
            out.v += rule.weights[j] * y.v;
            out.d1 += rule.weights[j] * y.d1;
            out.d2 += rule.weights[j] * y.d2;
        }
        return out;
    }
    Jet ys[512];
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nq; ++j) {
        ys[j] = f(x + sigma * rule.nodes[j]);
        top = std::max(top, ys[j].v);
    }
    double s = 0.0, s1 = 0.0;
    double e[512];
    for (std::size_t j = 0; j < nq; ++j) {
        e[j] = rule.weights[j] * std::exp(m * (ys[j].v - top));
        s += e[j];
        s1 += e[j] * ys[j].d1;
    }
    Jet out;
    out.v = top + std::log(s) / m;
    out.d1 = s1 / s;
    double s2 = 0.0;
    for (std::size_t j = 0; j < nq; ++j) {
        const double dev = ys[j].d1 - out.d1;
        s2 += e[j] * (ys[j].d2 + m * dev * dev);
    }
    out.d2 = s2 / s;
    return out;
}

/// Tabulate one step on a symmetric grid, exploiting evenness of the result.
template <class Source>
GridFunction log_exp_step(const Source& f, const ChainLevel& level, const UniformGrid& grid,
                          const GaussHermiteRule& rule, int level_index) {
    const int n = grid.n;
    const int mid = n / 2;
    std::vector<double> v(n), d1(n), d2(n);
    const double sigma = std::sqrt(std::max(level.variance, 0.0));
    for (int i = mid; i < n; ++i) {
        const double x = (i == mid) ? 0.0 : grid.x(i);
        const Jet j = log_exp_step_point(f, x, level.m, sigma, rule);
        if (!std::isfinite(j.v) || !std::isfinite(j.d1) || !std::isfinite(j.d2))
            throw NumericalFailure("non-finite value in Gaussian recursion", level_index);
        v[i] = j.v;
        d1[i] = j.d1;
        d2[i] = j.d2;
        v[n - 1 - i] = j.v;
        d1[n - 1 - i] = -j.d1;
        d2[n - 1 - i] = j.d2;
    }
    d1[mid] = 0.0;
    return GridFunction(grid, std::move(v), std::move(d1), std::move(d2));
}

inline GridFunction tabulate_log_cosh(const UniformGrid& grid) {
    std::vector<double> v(grid.n), d1(grid.n), d2(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        const Jet j = log_cosh_jet(grid.x(i));
        v[i] = j.v;
        d1[i] = j.d1;
        d2[i] = j.d2;
    }
    return GridFunction(grid, std::move(v), std::move(d1), std::move(d2));
}

}  // namespace detail

/// Functions F_0..F_L with F_L = log cosh and
/// F_p(x) = (1/m_p) log E exp(m_p F_{p+1}(x + sqrt(var_p) g)).
///
/// Levels below `first` are left empty. The terminal level is evaluated
/// analytically by `jet`; its table is kept for inspection only.
class Chain {
public:
    Chain() = default;

    /// A level whose increment has standard deviation above `max_step_sd` is
    /// applied as several equal sub-steps; the composition is exact.
    Chain(std::vector<ChainLevel> levels, const UniformGrid& grid, int quad_nodes, int first = 0,
          double max_step_sd = 1.0)
        : levels_(std::move(levels)), grid_(grid), rule_(&gauss_hermite(quad_nodes)) {
        grid_.check();
        if (grid_.n % 2 == 0 || grid_.lo != -grid_.hi) throw InvalidArgument("chain grid must be symmetric with odd n");
        const int L = static_cast<int>(levels_.size());
        funcs_.resize(L + 1);
        funcs_[L] = detail::tabulate_log_cosh(grid_);
        for (int p = L - 1; p >= first; --p) {
            const ChainLevel& lv = levels_[p];
            if (lv.variance <= 0.0) {
                funcs_[p] = funcs_[p + 1];
                continue;
            }
            const int nsub = std::max(1, static_cast<int>(std::ceil(lv.variance / (max_step_sd * max_step_sd) - 1e-12)));
            const ChainLevel sub{lv.m, lv.variance / nsub};
            GridFunction cur;
            for (int s = 0; s < nsub; ++s) {
                if (s == 0 && p == L - 1)
                    cur = detail::log_exp_step(log_cosh_jet, sub, grid_, *rule_, p);
                else {
                    const GridFunction& src = s == 0 ? funcs_[p + 1] : cur;
                    cur = detail::log_exp_step([&](double x) { return src.jet(x); }, sub, grid_, *rule_, p);
                }
            }
            funcs_[p] = std::move(cur);
        }
    }

    int depth() const { return static_cast<int>(levels_.size()); }
    const std::vector<ChainLevel>& levels() const { return levels_; }
    const UniformGrid& grid() const { return grid_; }
    const GaussHermiteRule& rule() const { return *rule_; }
    const GridFunction& table(int p) const { return funcs_.at(p); }
    bool has_table(int p) const { return !funcs_.at(p).values().empty(); }

    Jet jet(int p, double x) const {
        if (p == depth()) return log_cosh_jet(x);
        return funcs_[p].jet(x);
    }

    double value(int p, double x) const { return jet(p, x).v; }

private:
    std::vector<ChainLevel> levels_;
    UniformGrid grid_{};
    const GaussHermiteRule* rule_ = nullptr;
    std::vector<GridFunction> funcs_;
};

/// The A_p functions of a triplet: A_{k+2} = log cosh and
/// A_p(x) = (1/m_p) log E exp(m_p A_{p+1}(x + z_p)), Var z_p = xi'(q_{p+1}) - xi'(q_p).
struct AFamily {
    RSBParams rsb;
    GridConfig grid_cfg;
    Chain chain;

    int k() const { return rsb.k(); }
    double variance(int p) const { return chain.levels().at(p).variance; }
    Jet jet(int p, double x) const { return chain.jet(p, x); }
    double value(int p, double x) const { return chain.value(p, x); }
    const GridFunction& table(int p) const { return chain.table(p); }
};

inline std::vector<ChainLevel> rsb_levels(const Mixture& mix, const RSBParams& rsb) {
    std::vector<ChainLevel> levels;
    const int kk = rsb.k();
    for (int p = 0; p <= kk + 1; ++p) {
        double m = rsb.m[p];
        if (m < kMinExponent) m = 0.0;
        levels.push_back({m, std::max(0.0, mix.d1(rsb.q[p + 1]) - mix.d1(rsb.q[p]))});
    }
    return levels;
}

/// Build A_0..A_{k+2} (or A_first..A_{k+2}) on the grid described by a
/// resolved GridConfig.
inline AFamily build_a_functions(const Mixture& mix, const RSBParams& rsb, const GridConfig& grid_cfg,
                                 int first = 0) {
    rsb.validate();
    if (grid_cfg.half_width <= 0.0) throw InvalidArgument("grid config must be resolved before use");
    AFamily fam;
    fam.rsb = rsb;
    fam.grid_cfg = grid_cfg;
    fam.chain = Chain(rsb_levels(mix, rsb), UniformGrid::symmetric(grid_cfg.half_width, grid_cfg.nodes),
                      grid_cfg.quad_nodes, first, grid_cfg.max_step_sd);
    return fam;
}

/// (1/2) sum_{p=1}^{k+1} m_p (theta(q_{p+1}) - theta(q_p)).
inline double theta_correction(const Mixture& mix, const RSBParams& rsb) {
    double sum = 0.0;
    for (int p = 1; p <= rsb.k() + 1; ++p) sum += rsb.m[p] * (mix.theta(rsb.q[p + 1]) - mix.theta(rsb.q[p]));
    return 0.5 * sum;
}

/// X_0 = E_h A_0(h), computed from A_1 so A_0 need not be tabulated.
inline double expected_a0(const AFamily& fam, const FieldSpec& field) {
    const auto& rule = fam.chain.rule();
    if (fam.chain.has_table(0)) return field.expect(rule, [&](double h) { return fam.value(0, h); });
    const double sigma0 = std::sqrt(fam.variance(0));
    return field.expect(rule, [&](double h) {
        return gaussian_expectation(rule, h, sigma0, [&](double x) { return fam.value(1, x); });
    });
}

/// Parisi functional of a triplet.
inline double parisi_functional(const Mixture& mix, const FieldSpec& field, const RSBParams& rsb,
                                const GridConfig& grid_cfg = {}) {
    const GridConfig cfg = resolve_grid(grid_cfg, mix, field);
    rsb.validate();
    const double var0 = mix.d1(rsb.q[1]);
    const int first = var0 > cfg.max_step_sd * cfg.max_step_sd ? 0 : 1;
    const AFamily fam = build_a_functions(mix, rsb, cfg, first);
    return std::numbers::ln2 + expected_a0(fam, field) - theta_correction(mix, rsb);
}

/// E(W_1...W_{p-1} A_p^{(order)}(zeta_p)^2) with zeta_p = h + z_0 + ... + z_{p-1}.
///
/// Evaluated by backward recursion: B_p = (A_p^{(order)})^2 and
/// B_n(x) = E[W_n B_{n+1}(x + z_n)], where the tilt
/// W_n = exp m_n (A_{n+1}(x + z_n) - A_n(x)) is self-normalised.
inline double tilted_moment(const AFamily& fam, const FieldSpec& field, int p, int order) {
    const int kk = fam.k();
    if (p < 1 || p > kk + 1) throw InvalidArgument("tilted moment level must be in 1..k+1");
    if (order != 1 && order != 2) throw InvalidArgument("tilted moment order must be 1 or 2");
    const auto& rule = fam.chain.rule();
    const UniformGrid grid = fam.chain.grid();
    const std::size_t nq = rule.size();

    auto top_level = [&](double x) {
        const Jet j = fam.jet(p, x);
        const double d = order == 1 ? j.d1 : j.d2;
        return d * d;
    };
    GridFunction cur;
    bool tabulated = false;
    auto eval_cur = [&](double x) { return tabulated ? cur(x) : top_level(x); };

    for (int n = p - 1; n >= 1; --n) {
        const double var = fam.variance(n);
        if (var <= 0.0) continue;
        const double sigma = std::sqrt(var);
        const double m = fam.chain.levels()[n].m;
        std::vector<double> next(grid.n);
        std::vector<double> a(nq);
        for (int i = 0; i < grid.n; ++i) {
            const double x = grid.x(i);
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < nq; ++j) {
                a[j] = m * fam.value(n + 1, x + sigma * rule.nodes[j]);
                top = std::max(top, a[j]);
            }
            double s = 0.0, sb = 0.0;
            for (std::size_t j = 0; j < nq; ++j) {
                const double w = rule.weights[j] * std::exp(a[j] - top);
                s += w;
                sb += w * eval_cur(x + sigma * rule.nodes[j]);
            }
            next[i] = sb / s;
        }
        cur = GridFunction(grid, std::move(next));
        tabulated = true;
    }

    const double sigma0 = std::sqrt(fam.variance(0));
    return field.expect(rule, [&](double h) { return gaussian_expectation(rule, h, sigma0, eval_cur); });
}

/// tilted_moment(p, 1) - q_p for p = 1..k+1.
inline std::vector<double> stationarity_residuals(const AFamily& fam, const FieldSpec& field) {
    std::vector<double> r;
    for (int p = 1; p <= fam.k() + 1; ++p) r.push_back(tilted_moment(fam, field, p, 1) - fam.rsb.q[p]);
    return r;
}

}  // namespace parisi
