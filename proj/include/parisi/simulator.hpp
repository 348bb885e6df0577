#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "parisi/error.hpp"
#include "parisi/field.hpp"
#include "parisi/mixture.hpp"
#include "parisi/parallel.hpp"

namespace parisi {

inline constexpr int kMaxSingleSpins = 20;
inline constexpr int kMaxCoupledSpins = 12;

struct SimConfig {
    Mixture mixture = Mixture::sk(1.0);
    FieldSpec field;
    int N = 8;
    double t = 1.0;
    int n_disorder = 100;
    std::uint64_t seed = 1;
    int threads = 1;

    void validate(int max_spins) const {
        if (N < 1) throw InvalidArgument("N must be >= 1");
        if (N > max_spins)
            throw CapacityError("N = " + std::to_string(N) + " exceeds the enumeration limit " +
                                std::to_string(max_spins));
        if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("t must lie in [0,1]");
        if (n_disorder < 1) throw InvalidArgument("need at least one disorder sample");
    }
};

struct OverlapBin {
    double r = 0.0;
    double mass = 0.0;
    double std_error = 0.0;
};

struct SimResult {
    double estimate = 0.0;
    double std_error = 0.0;
    int n_disorder = 0;
    std::vector<OverlapBin> table;
    double requested_u = std::numeric_limits<double>::quiet_NaN();
    double lattice_u = std::numeric_limits<double>::quiet_NaN();
    bool snapped = false;       // lattice_u differs from requested_u by more than 1e-9
    std::vector<double> samples;  // per-disorder values in sample order
};

/// Disorder after reducing sigma_i^2 = 1: H(sigma) = sum_S c_S prod_{i in S} sigma_i with
/// independent centred Gaussian c_S. A p-tuple of indices reduces to the set of
/// indices it contains an odd number of times; there are
/// p! [x^p] sinh(x)^s cosh(x)^(N-s) tuples per set of size s.
struct MonomialTerms {
    int N = 0;
    std::vector<std::uint32_t> masks;
    std::vector<double> sd;
};

/// Number of p-tuples over N indices whose odd-multiplicity set is a given set of size s.
inline double count_tuples(int p, int s, int N) {
    if (s > p || s > N || (p - s) % 2 != 0) return 0.0;
    // truncated series of sinh^s cosh^(N-s); the count is p! times the x^p coefficient
    std::vector<double> series(p + 1, 0.0), sinh_s(p + 1, 0.0), cosh_s(p + 1, 0.0);
    double fact = 1.0;
    for (int j = 0; j <= p; ++j) {
        if (j > 0) fact *= j;
        (j % 2 ? sinh_s : cosh_s)[j] = 1.0 / fact;
    }
    auto mul = [p](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> out(p + 1, 0.0);
        for (int i = 0; i <= p; ++i)
            for (int j = 0; i + j <= p; ++j) out[i + j] += a[i] * b[j];
        return out;
    };
    series[0] = 1.0;
    for (int i = 0; i < s; ++i) series = mul(series, sinh_s);
    for (int i = 0; i < N - s; ++i) series = mul(series, cosh_s);
    double pf = 1.0;
    for (int j = 2; j <= p; ++j) pf *= j;
    return std::round(series[p] * pf);
}

inline MonomialTerms monomial_terms(const Mixture& mix, int N) {
    if (N < 1 || N > kMaxSingleSpins) throw CapacityError("monomial expansion limited to N <= 20");
    int pmax = 0;
    for (const auto& term : mix.terms()) pmax = std::max(pmax, term.power);
    std::vector<double> var_by_size(std::min(pmax, N) + 1, 0.0);
    for (int s = 0; s < static_cast<int>(var_by_size.size()); ++s)
        for (const auto& term : mix.terms())
            if (term.weight > 0.0)
                var_by_size[s] += term.weight * std::pow(static_cast<double>(N), 1 - term.power) *
                                  count_tuples(term.power, s, N);
    MonomialTerms out;
    out.N = N;
    const std::uint32_t full = 1u << N;
    for (std::uint32_t mask = 0; mask < full; ++mask) {
        const int s = std::popcount(mask);
        if (s < static_cast<int>(var_by_size.size()) && var_by_size[s] > 0.0) {
            out.masks.push_back(mask);
            out.sd.push_back(std::sqrt(var_by_size[s]));
        }
    }
    return out;
}

/// Configuration index x encodes sigma_i = 1 - 2 * bit_i(x).
inline double monomial_sign(std::uint32_t x, std::uint32_t mask) { return std::popcount(x & mask) % 2 ? -1.0 : 1.0; }

inline std::vector<double> naive_energies(const MonomialTerms& terms, const std::vector<double>& coef) {
    const std::uint32_t full = 1u << terms.N;
    std::vector<double> out(full);
    for (std::uint32_t x = 0; x < full; ++x) {
        double e = 0.0;
        for (std::size_t k = 0; k < coef.size(); ++k) e += coef[k] * monomial_sign(x, terms.masks[k]);
        out[x] = e;
    }
    return out;
}

/// H over all configurations by a Gray-code sweep; flipping spin i changes H by
/// -2 sum_{S containing i} c_S sigma_S. Re-evaluated from scratch every 4096 flips.
inline std::vector<double> gray_energies(const MonomialTerms& terms, const std::vector<double>& coef) {
    const int N = terms.N;
    const std::uint32_t full = 1u << N;
    std::vector<std::vector<std::size_t>> touching(N);
    for (std::size_t k = 0; k < terms.masks.size(); ++k)
        for (int i = 0; i < N; ++i)
            if (terms.masks[k] >> i & 1u) touching[i].push_back(k);
    auto direct = [&](std::uint32_t x) {
        double e = 0.0;
        for (std::size_t k = 0; k < coef.size(); ++k) e += coef[k] * monomial_sign(x, terms.masks[k]);
        return e;
    };
    std::vector<double> out(full);
    std::uint32_t x = 0;
    double e = direct(0);
    out[0] = e;
    for (std::uint32_t step = 1; step < full; ++step) {
        const int i = std::countr_zero(step);
        double delta = 0.0;
        for (std::size_t k : touching[i]) delta += coef[k] * monomial_sign(x, terms.masks[k]);
        x ^= 1u << i;
        e = step % 4096 == 0 ? direct(x) : e - 2.0 * delta;
        out[x] = e;
    }
    return out;
}

inline std::vector<double> draw_coefficients(const MonomialTerms& terms, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<double> c(terms.sd.size());
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = terms.sd[k] * g(rng);
    return c;
}

/// Two Hamiltonians with Cov(H^j(s1), H^j(s2)) = N xi(R) and Cov(H^1(s1), H^2(s2)) = N t xi(R):
/// H^j = sqrt(t) H^0 + sqrt(1 - t) H^{j,ind}.
inline std::pair<std::vector<double>, std::vector<double>> sample_correlated_hamiltonians(const Mixture& mix, int N,
                                                                                          double t,
                                                                                          std::mt19937_64& rng) {
    if (N > kMaxSingleSpins) throw CapacityError("N exceeds the enumeration limit 20");
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("t must lie in [0,1]");
    const MonomialTerms terms = monomial_terms(mix, N);
    const auto c0 = draw_coefficients(terms, rng);
    const auto c1 = draw_coefficients(terms, rng);
    const auto c2 = draw_coefficients(terms, rng);
    const double a = std::sqrt(t), b = std::sqrt(1.0 - t);
    std::vector<double> x1(c0.size()), x2(c0.size());
    for (std::size_t k = 0; k < c0.size(); ++k) {
        x1[k] = a * c0[k] + b * c1[k];
        x2[k] = a * c0[k] + b * c2[k];
    }
    return {gray_energies(terms, x1), gray_energies(terms, x2)};
}

/// One disorder draw: site fields and log-weights -H(sigma) + sum_i h_i sigma_i.
struct DisorderSample {
    std::vector<double> h;
    std::vector<double> w1;
    std::vector<double> w2;  // empty for a single system
};

inline std::mt19937_64 sample_rng(std::uint64_t seed, std::size_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32)};
    return std::mt19937_64(seq);
}

/// Draw order per sample: fields, then H^0, H^{1,ind}, H^{2,ind}. A single system
/// uses H^0, which equals both coupled Hamiltonians at t = 1.
inline DisorderSample draw_disorder(const SimConfig& cfg, const MonomialTerms& terms, std::size_t index, bool coupled) {
    auto rng = sample_rng(cfg.seed, index);
    DisorderSample s;
    s.h.assign(cfg.N, cfg.field.mean);
    if (cfg.field.kind == FieldSpec::Kind::gaussian && cfg.field.sd > 0.0) {
        std::normal_distribution<double> g;
        for (auto& h : s.h) h = cfg.field.mean + cfg.field.sd * g(rng);
    }
    const auto c0 = draw_coefficients(terms, rng);
    std::vector<double> field_term(std::size_t{1} << cfg.N, 0.0);
    for (std::uint32_t x = 0; x < field_term.size(); ++x) {
        double f = 0.0;
        for (int i = 0; i < cfg.N; ++i) f += (x >> i & 1u) ? -s.h[i] : s.h[i];
        field_term[x] = f;
    }
    auto finish = [&](std::vector<double> e) {
        for (std::size_t x = 0; x < e.size(); ++x) e[x] = -e[x] + field_term[x];
        return e;
    };
    if (!coupled) {
        s.w1 = finish(gray_energies(terms, c0));
        return s;
    }
    const auto c1 = draw_coefficients(terms, rng);
    const auto c2 = draw_coefficients(terms, rng);
    const double a = std::sqrt(cfg.t), b = std::sqrt(1.0 - cfg.t);
    std::vector<double> x1(c0.size()), x2(c0.size());
    for (std::size_t k = 0; k < c0.size(); ++k) {
        x1[k] = a * c0[k] + b * c1[k];
        x2[k] = a * c0[k] + b * c2[k];
    }
    s.w1 = finish(gray_energies(terms, x1));
    s.w2 = finish(gray_energies(terms, x2));
    return s;
}

inline double log_sum_exp(const std::vector<double>& w) {
    const double top = *std::max_element(w.begin(), w.end());
    double s = 0.0;
    for (double v : w) s += std::exp(v - top);
    return top + std::log(s);
}

/// log sum over pairs at Hamming distance d of exp(a[x] + b[y]), for d = 0..N.
inline std::vector<double> shell_log_sums(const std::vector<double>& a, const std::vector<double>& b, int N) {
    const std::uint32_t full = 1u << N;
    const double A = *std::max_element(a.begin(), a.end()), B = *std::max_element(b.begin(), b.end());
    std::vector<double> ea(full), eb(full);
    for (std::uint32_t x = 0; x < full; ++x) {
        ea[x] = std::exp(a[x] - A);
        eb[x] = std::exp(b[x] - B);
    }
    std::vector<std::vector<std::uint32_t>> shells(N + 1);
    for (std::uint32_t mask = 0; mask < full; ++mask) shells[std::popcount(mask)].push_back(mask);
    std::vector<double> out(N + 1);
    for (int d = 0; d <= N; ++d) {
        double acc = 0.0;
        for (std::uint32_t mask : shells[d]) {
            double part = 0.0;
            for (std::uint32_t x = 0; x < full; ++x) part += ea[x] * eb[x ^ mask];
            acc += part;
        }
        if (acc > 1e-280) {
            out[d] = A + B + std::log(acc);
            continue;
        }
        // shell far below the overall maximum: shift by its own maximum
        double top = -std::numeric_limits<double>::infinity();
        for (std::uint32_t mask : shells[d])
            for (std::uint32_t x = 0; x < full; ++x) top = std::max(top, a[x] + b[x ^ mask]);
        double s = 0.0;
        for (std::uint32_t mask : shells[d])
            for (std::uint32_t x = 0; x < full; ++x) s += std::exp(a[x] + b[x ^ mask] - top);
        out[d] = top + std::log(s);
    }
    return out;
}

namespace detail {

inline void mean_and_stderr(const std::vector<double>& v, double& mean, double& err) {
    const std::size_t n = v.size();
    mean = pairwise_sum(v) / static_cast<double>(n);
    if (n < 2) {
        err = 0.0;
        return;
    }
    std::vector<double> dev(n);
    for (std::size_t i = 0; i < n; ++i) dev[i] = (v[i] - mean) * (v[i] - mean);
    err = std::sqrt(pairwise_sum(dev) / static_cast<double>(n - 1) / static_cast<double>(n));
}

/// Per-sample shell sums of the coupled system, in sample order.
inline std::vector<std::vector<double>> coupled_shells(const SimConfig& cfg) {
    cfg.validate(kMaxCoupledSpins);
    const MonomialTerms terms = monomial_terms(cfg.mixture, cfg.N);
    std::vector<std::vector<double>> shells(cfg.n_disorder);
    parallel_for(static_cast<std::size_t>(cfg.n_disorder), cfg.threads, [&](std::size_t i) {
        const DisorderSample s = draw_disorder(cfg, terms, i, true);
        shells[i] = shell_log_sums(s.w1, s.w2, cfg.N);
    });
    return shells;
}

}  // namespace detail

/// Overlap of two configurations at Hamming distance d.
inline double lattice_overlap(int N, int d) { return 1.0 - 2.0 * d / N; }

/// Nearest lattice point -1 + 2j/N; returns the Hamming distance.
inline int snap_overlap(int N, double u) {
    if (!(u >= -1.0 && u <= 1.0)) throw InvalidArgument("overlap must lie in [-1,1]");
    return static_cast<int>(std::lround((1.0 - u) * N / 2.0));
}

/// (1/N) E log sum_sigma exp(-H(sigma) + sum_i h_i sigma_i).
inline SimResult exact_free_energy(const SimConfig& cfg) {
    cfg.validate(kMaxSingleSpins);
    const MonomialTerms terms = monomial_terms(cfg.mixture, cfg.N);
    SimResult out;
    out.n_disorder = cfg.n_disorder;
    out.samples.resize(cfg.n_disorder);
    parallel_for(static_cast<std::size_t>(cfg.n_disorder), cfg.threads, [&](std::size_t i) {
        out.samples[i] = log_sum_exp(draw_disorder(cfg, terms, i, false).w1) / cfg.N;
    });
    detail::mean_and_stderr(out.samples, out.estimate, out.std_error);
    return out;
}

/// p_{u,N} at every lattice overlap, ordered by increasing u, from one pass over the disorder.
inline std::vector<SimResult> constrained_coupled_scan(const SimConfig& cfg) {
    const auto shells = detail::coupled_shells(cfg);
    std::vector<SimResult> out;
    for (int d = cfg.N; d >= 0; --d) {
        SimResult r;
        r.n_disorder = cfg.n_disorder;
        r.requested_u = r.lattice_u = lattice_overlap(cfg.N, d);
        r.samples.resize(cfg.n_disorder);
        for (int i = 0; i < cfg.n_disorder; ++i) r.samples[i] = shells[i][d] / cfg.N;
        detail::mean_and_stderr(r.samples, r.estimate, r.std_error);
        out.push_back(std::move(r));
    }
    return out;
}

/// p_{u,N} = (1/N) E log sum_{R = u} exp(-H^1 - H^2 + sum_i h_i (sigma^1_i + sigma^2_i)),
/// with u snapped to the overlap lattice.
inline SimResult constrained_coupled_free_energy(const SimConfig& cfg, double u) {
    cfg.validate(kMaxCoupledSpins);
    const int d = snap_overlap(cfg.N, u);
    SimResult r = constrained_coupled_scan(cfg)[cfg.N - d];
    r.requested_u = u;
    r.snapped = std::abs(r.lattice_u - u) > 1e-9;
    return r;
}

/// E G'(R = r) for every lattice r, ordered by increasing r; `estimate` is the mean overlap.
inline SimResult overlap_distribution(const SimConfig& cfg) {
    const auto shells = detail::coupled_shells(cfg);
    const int N = cfg.N;
    SimResult out;
    out.n_disorder = cfg.n_disorder;
    std::vector<std::vector<double>> mass(N + 1, std::vector<double>(cfg.n_disorder));
    out.samples.resize(cfg.n_disorder);
    for (int i = 0; i < cfg.n_disorder; ++i) {
        const double total = log_sum_exp(shells[i]);
        double mean = 0.0;
        for (int d = 0; d <= N; ++d) {
            mass[d][i] = std::exp(shells[i][d] - total);
            mean += lattice_overlap(N, d) * mass[d][i];
        }
        out.samples[i] = mean;
    }
    for (int d = N; d >= 0; --d) {
        OverlapBin bin;
        bin.r = lattice_overlap(N, d);
        detail::mean_and_stderr(mass[d], bin.mass, bin.std_error);
        out.table.push_back(bin);
    }
    detail::mean_and_stderr(out.samples, out.estimate, out.std_error);
    return out;
}

}  // namespace parisi
