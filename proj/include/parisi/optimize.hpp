#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "parisi/error.hpp"
#include "parisi/field.hpp"
#include "parisi/mixture.hpp"
#include "parisi/parallel.hpp"
#include "parisi/rsb.hpp"

namespace parisi {

struct OptimizerOptions {
    int max_evals = 5000;            // per level, all grids counted
    double step_tol = 1e-7;          // largest coordinate move in a sweep
    double stationarity_tol = 1e-3;  // max |tilted moment - q_p| at atoms above mass_tol
    double mass_tol = 1e-4;
    int restarts = 8;
    int restart_evals = 120;
    std::uint64_t seed = 1;
    double merge_tol = 1e-4;
    double drop_mass = 1e-6;
    double prune_value_tol = 1e-8;
    int search_nodes = 513;  // coarse grid used for the search phase
    int search_quad_nodes = 41;
    int threads = 1;
    GridConfig grid{};
};

struct LevelResult {
    RSBParams rsb;
    double value = 0.0;
    bool converged = false;
    int evals = 0;
    double last_step = 0.0;
    std::vector<double> residuals;
};

/// Approximate Parisi measure with its optimisation history.
struct ParisiMeasure {
    RSBParams rsb;
    double value = 0.0;
    double c = 0.0;
    std::vector<double> residuals;
    std::vector<std::pair<int, double>> k_history;
    std::vector<bool> level_converged;
    bool converged = false;
    double improvement_tol = 0.0;
    double stationarity_tol = 0.0;
    double mass_tol = 1e-4;
    int restarts = 0;
    int evals = 0;
};

namespace detail {

// Ordered sequences as stick-breaking fractions: x_p = x_{p-1} + (1 - x_{p-1}) sin^2(theta_p).
inline std::vector<double> encode(const RSBParams& r) {
    std::vector<double> th;
    auto push = [&](double prev, double cur) {
        const double room = 1.0 - prev;
        const double frac = room > 0.0 ? std::clamp((cur - prev) / room, 0.0, 1.0) : 0.0;
        th.push_back(std::asin(std::sqrt(frac)));
    };
    for (int p = 1; p <= r.k(); ++p) push(r.m[p - 1], r.m[p]);
    for (int p = 1; p <= r.k() + 1; ++p) push(r.q[p - 1], r.q[p]);
    return th;
}

inline RSBParams decode(int k, const std::vector<double>& th) {
    RSBParams r;
    r.m.assign(k + 2, 0.0);
    r.q.assign(k + 3, 0.0);
    for (int p = 1; p <= k; ++p) {
        const double s = std::sin(th[p - 1]);
        r.m[p] = std::min(1.0, r.m[p - 1] + (1.0 - r.m[p - 1]) * s * s);
    }
    r.m[k + 1] = 1.0;
    for (int p = 1; p <= k + 1; ++p) {
        const double s = std::sin(th[k + p - 1]);
        r.q[p] = std::min(1.0, r.q[p - 1] + (1.0 - r.q[p - 1]) * s * s);
    }
    r.q[k + 2] = 1.0;
    return r;
}

struct Simplex {
    std::vector<std::vector<double>> x;
    std::vector<double> f;
};

/// Nelder-Mead with the standard coefficients. Returns the best vertex.
inline std::pair<std::vector<double>, double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                                          std::vector<double> x0, double step, int max_evals,
                                                          double xtol, double ftol, int& evals) {
    const std::size_t d = x0.size();
    Simplex s;
    s.x.push_back(x0);
    for (std::size_t i = 0; i < d; ++i) {
        auto v = x0;
        v[i] += step;
        s.x.push_back(v);
    }
    for (const auto& v : s.x) {
        s.f.push_back(f(v));
        ++evals;
    }
    int used = static_cast<int>(d) + 1;
    std::vector<std::size_t> idx(d + 1);
    while (used < max_evals) {
        for (std::size_t i = 0; i <= d; ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return s.f[a] < s.f[b]; });
        Simplex sorted;
        for (auto i : idx) {
            sorted.x.push_back(s.x[i]);
            sorted.f.push_back(s.f[i]);
        }
        s = std::move(sorted);
        double size = 0.0;
        for (std::size_t i = 1; i <= d; ++i)
            for (std::size_t j = 0; j < d; ++j) size = std::max(size, std::abs(s.x[i][j] - s.x[0][j]));
        if (size < xtol && s.f[d] - s.f[0] < ftol) break;

        std::vector<double> c(d, 0.0);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) c[j] += s.x[i][j] / static_cast<double>(d);
        auto along = [&](double a) {
            std::vector<double> v(d);
            for (std::size_t j = 0; j < d; ++j) v[j] = c[j] + a * (s.x[d][j] - c[j]);
            return v;
        };
        auto eval = [&](const std::vector<double>& v) {
            ++evals;
            ++used;
            return f(v);
        };
        const auto xr = along(-1.0);
        const double fr = eval(xr);
        if (fr < s.f[0]) {
            const auto xe = along(-2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                s.x[d] = xe;
                s.f[d] = fe;
            } else {
                s.x[d] = xr;
                s.f[d] = fr;
            }
        } else if (fr < s.f[d - 1]) {
            s.x[d] = xr;
            s.f[d] = fr;
        } else {
            const bool outside = fr < s.f[d];
            const auto xc = along(outside ? -0.5 : 0.5);
            const double fc = eval(xc);
            if (fc < (outside ? fr : s.f[d])) {
                s.x[d] = xc;
                s.f[d] = fc;
            } else {
                for (std::size_t i = 1; i <= d; ++i) {
                    for (std::size_t j = 0; j < d; ++j) s.x[i][j] = s.x[0][j] + 0.5 * (s.x[i][j] - s.x[0][j]);
                    s.f[i] = eval(s.x[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.f.size(); ++i)
        if (s.f[i] < s.f[best]) best = i;
    return {s.x[best], s.f[best]};
}

/// Coordinate sweeps over m_1..m_k, q_1..q_{k+1} with Brent line searches
/// inside the ordering constraints. Returns the last sweep's largest move.
inline double coordinate_descent(const std::function<double(const RSBParams&)>& f, RSBParams& r, double& value,
                                 double step_tol, int max_evals, int& evals, int max_sweeps = 200) {
    const int k = r.k();
    const int dims = 2 * k + 1;
    std::vector<double> window(dims, 0.05);
    double last = std::numeric_limits<double>::infinity();
    const int start = evals;
    for (int sweep = 0; sweep < max_sweeps && evals - start < max_evals; ++sweep) {
        last = 0.0;
        for (int c = 0; c < dims; ++c) {
            const bool is_m = c < k;
            const int p = is_m ? c + 1 : c - k + 1;
            double& slot = is_m ? r.m[p] : r.q[p];
            const double lo = is_m ? r.m[p - 1] : r.q[p - 1];
            const double hi = is_m ? r.m[p + 1] : r.q[p + 1];
            if (hi - lo < 1e-14) continue;
            const double x0 = slot;
            auto line = [&](double x) {
                slot = x;
                ++evals;
                return f(r);
            };
            double a = std::max(lo, x0 - window[c]), b = std::min(hi, x0 + window[c]);
            std::uintmax_t iters = 60;
            auto res = boost::math::tools::brent_find_minima(line, a, b, 30, iters);
            const double edge = 1e-9 + 1e-6 * window[c];
            if ((res.first - a < edge && a > lo) || (b - res.first < edge && b < hi)) {
                iters = 80;
                res = boost::math::tools::brent_find_minima(line, lo, hi, 30, iters);
            }
            if (res.second < value) {
                slot = res.first;
                value = res.second;
            } else {
                slot = x0;
            }
            const double moved = std::abs(slot - x0);
            last = std::max(last, moved);
            window[c] = std::max(4.0 * moved, 1e-5);
        }
        if (last < step_tol) break;
    }
    return last;
}

inline GridConfig search_grid(const OptimizerOptions& opts, const GridConfig& fine) {
    GridConfig g = fine;
    g.nodes = opts.search_nodes;
    g.quad_nodes = opts.search_quad_nodes;
    return g;
}

}  // namespace detail

/// Merge atoms closer than merge_tol and drop atoms lighter than drop_mass.
/// The pruned triplet is kept only if the functional moves by less than
/// prune_value_tol.
inline RSBParams prune_atoms(const Mixture& mix, const FieldSpec& field, const RSBParams& r, double value,
                             const OptimizerOptions& opts, const GridConfig& grid) {
    std::vector<Atom> atoms;
    for (const Atom& a : r.atoms()) {
        if (!atoms.empty() && a.q - atoms.back().q < opts.merge_tol) {
            Atom& b = atoms.back();
            const double mass = a.mass + b.mass;
            if (mass > 0.0) b.q = (a.q * a.mass + b.q * b.mass) / mass;
            b.mass = mass;
        } else {
            atoms.push_back(a);
        }
    }
    std::vector<Atom> kept;
    double carry = 0.0;
    for (const Atom& a : atoms) {
        if (a.mass < opts.drop_mass) {
            carry += a.mass;
            continue;
        }
        kept.push_back({a.q, a.mass + carry});
        carry = 0.0;
    }
    if (kept.empty()) return r;
    kept.back().mass += carry;
    if (kept.size() == r.atoms().size()) return r;
    const RSBParams pruned = RSBParams::from_atoms(kept);
    const double v = parisi_functional(mix, field, pruned, grid);
    return std::abs(v - value) < opts.prune_value_tol ? pruned : r;
}

/// Residuals at atoms whose mass exceeds mass_tol.
inline std::vector<double> accepted_residuals(const AFamily& fam, const FieldSpec& field, double mass_tol) {
    const auto all = stationarity_residuals(fam, field);
    const auto atoms = fam.rsb.atoms();
    std::vector<double> out;
    for (std::size_t i = 0; i < atoms.size(); ++i)
        if (atoms[i].mass > mass_tol) out.push_back(all[i]);
    return out;
}

/// Local minimum of the k-level functional over ordered (m, q).
inline LevelResult optimize_level_k(const Mixture& mix, const FieldSpec& field, int k,
                                    const std::optional<RSBParams>& init, const OptimizerOptions& opts) {
    if (k < 0) throw InvalidArgument("k must be >= 0");
    const GridConfig fine = resolve_grid(opts.grid, mix, field);
    const GridConfig coarse = detail::search_grid(opts, fine);
    auto objective = [&](const GridConfig& g) {
        return [&mix, &field, g](const RSBParams& r) { return parisi_functional(mix, field, r, g); };
    };
    const auto f_coarse = objective(coarse);
    const auto f_fine = objective(fine);
    auto f_theta = [&](const std::vector<double>& th) { return f_coarse(detail::decode(k, th)); };
    const int dims = 2 * k + 1;

    // starting points: the warm start (if any) plus seeded random triplets
    std::vector<RSBParams> starts;
    if (init) {
        if (init->k() != k) throw InvalidArgument("initial triplet has the wrong number of levels");
        starts.push_back(*init);
    }
    std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < opts.restarts || starts.empty(); ++i) {
        std::vector<double> m(k), q(k + 1);
        for (auto& v : m) v = unif(rng);
        for (auto& v : q) v = unif(rng);
        std::sort(m.begin(), m.end());
        std::sort(q.begin(), q.end());
        starts.push_back(RSBParams::from_interior(m, q));
    }

    std::vector<std::pair<std::vector<double>, double>> trial(starts.size());
    std::vector<int> trial_evals(starts.size(), 0);
    const int short_budget = std::max(opts.restart_evals, 10 * dims);
    parallel_for(starts.size(), opts.threads, [&](std::size_t i) {
        trial[i] = detail::nelder_mead(f_theta, detail::encode(starts[i]), 0.15, short_budget, 1e-6, 1e-12,
                                       trial_evals[i]);
    });
    LevelResult out;
    for (int e : trial_evals) out.evals += e;
    std::size_t best = 0;
    for (std::size_t i = 1; i < trial.size(); ++i)
        if (trial[i].second < trial[best].second) best = i;

    const int remaining = std::max(0, opts.max_evals - out.evals);
    auto [th, fv] = detail::nelder_mead(f_theta, trial[best].first, 0.05, remaining / 3, 1e-7, 1e-14, out.evals);
    (void)fv;
    RSBParams r = detail::decode(k, th);
    double value = f_coarse(r);
    ++out.evals;
    detail::coordinate_descent(f_coarse, r, value, opts.step_tol, std::max(0, opts.max_evals - out.evals),
                               out.evals);
    value = f_fine(r);
    ++out.evals;
    out.last_step = detail::coordinate_descent(f_fine, r, value, opts.step_tol,
                                               std::max(0, opts.max_evals - out.evals), out.evals, 4);
    r = prune_atoms(mix, field, r, value, opts, fine);
    out.rsb = r;
    out.value = f_fine(r);
    const AFamily fam = build_a_functions(mix, r, fine);
    out.residuals = accepted_residuals(fam, field, opts.mass_tol);
    double worst = 0.0;
    for (double v : out.residuals) worst = std::max(worst, std::abs(v));
    out.converged = out.last_step < opts.step_tol && worst < opts.stationarity_tol && out.evals <= opts.max_evals;
    return out;
}

/// Smallest atom location with mass above mass_tol.
inline double min_support(const RSBParams& r, double mass_tol = 1e-4) {
    for (const Atom& a : r.atoms())
        if (a.mass > mass_tol) return a.q;
    throw DegenerateMeasure("no atom has mass above " + std::to_string(mass_tol));
}

inline double min_support(const ParisiMeasure& m, double mass_tol) { return min_support(m.rsb, mass_tol); }

/// Optimise k = 0, 1, ... with warm starts until the improvement drops below tol.
///
/// When the last level improves by less than tol the previous (smaller) level
/// is returned; k_history records every level that was run.
inline ParisiMeasure solve_parisi_measure(const Mixture& mix, const FieldSpec& field, double tol, int k_max,
                                          const OptimizerOptions& opts = {}) {
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (k_max < 0) throw InvalidArgument("k_max must be >= 0");
    ParisiMeasure out;
    out.improvement_tol = tol;
    out.stationarity_tol = opts.stationarity_tol;
    out.mass_tol = opts.mass_tol;
    out.restarts = opts.restarts;

    std::optional<LevelResult> prev;
    LevelResult chosen;
    for (int k = 0; k <= k_max; ++k) {
        std::optional<RSBParams> warm;
        if (prev) {
            // previous optimum padded to k levels; the extra atom sits in the widest gap
            RSBParams w = prev->rsb;
            while (w.k() < k) {
                double gap = -1.0, where = 0.5;
                for (int p = 0; p <= w.k() + 1; ++p)
                    if (w.q[p + 1] - w.q[p] > gap) {
                        gap = w.q[p + 1] - w.q[p];
                        where = 0.5 * (w.q[p] + w.q[p + 1]);
                    }
                w = insert_atom(w, where);
            }
            warm = w;
        }
        LevelResult res = optimize_level_k(mix, field, k, warm, opts);
        out.evals += res.evals;
        if (prev && res.value > prev->value) {
            // the richer ansatz contains the previous optimum; keep it
            res.rsb = prev->rsb;
            res.value = prev->value;
            res.residuals = prev->residuals;
            res.converged = prev->converged;
        }
        out.k_history.emplace_back(k, res.value);
        out.level_converged.push_back(res.converged);
        if (prev && prev->value - res.value < tol) {
            chosen = *prev;
            break;
        }
        chosen = res;
        prev = res;
    }
    out.rsb = chosen.rsb;
    out.value = chosen.value;
    out.residuals = chosen.residuals;
    out.converged = chosen.converged;
    out.c = min_support(out.rsb, opts.mass_tol);
    return out;
}

}  // namespace parisi
