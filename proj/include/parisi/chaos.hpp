#pragma once

#include <cmath>
#include <vector>

#include "parisi/error.hpp"
#include "parisi/field.hpp"
#include "parisi/mixture.hpp"
#include "parisi/pde.hpp"
#include "parisi/quadrature.hpp"

namespace parisi {

/// phi_v(u, t) = E dPhi/dx(h + chi_1, v) dPhi/dx(h + chi_2, v) - u with
/// E chi_i^2 = xi'(v) and E chi_1 chi_2 = t xi'(u).
///
/// Evaluated through chi_i = a g + b g_i, a^2 = t xi'(u), b^2 = xi'(v) - a^2,
/// so the correlated expectation is E_h E_g (E_g' dPhi/dx(h + a g + b g'))^2.
inline double evaluate_phi_v(const PhiSolution& sol, const Mixture& mix, const FieldSpec& field, double v, double u,
                             double t, int quad_nodes = 0) {
    if (!(u >= 0.0 && u <= v && v < 1.0)) throw InvalidArgument("need 0 <= u <= v < 1");
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("t must lie in [0,1]");
    const double a2 = t * mix.d1(u), total = mix.d1(v);
    if (a2 > total * (1.0 + 1e-12)) throw InvalidArgument("need t xi'(u) <= xi'(v)");
    const PhiCheckpoint& cp = sol.at(v);
    const auto& rule = gauss_hermite(quad_nodes > 0 ? quad_nodes : sol.grid_cfg.quad_nodes);
    const double a = std::sqrt(a2), b = std::sqrt(std::max(0.0, total - a2));
    const double moment = field.expect(rule, [&](double h) {
        return gaussian_expectation(rule, h, a, [&](double y) {
            const double inner = gaussian_expectation(rule, y, b, [&](double x) { return cp.dphi(x); });
            return inner * inner;
        });
    });
    return moment - u;
}

struct ChaosPoint {
    double t = 0.0;
    double u_t = 0.0;
    double phi_at_c = 0.0;
    int bisection_iters = 0;
    double bracket_width = 0.0;
};

/// Root of phi_c(., t) on [0, c] by bisection.
inline ChaosPoint solve_u_t(const PhiSolution& sol, const Mixture& mix, const FieldSpec& field, double c, double t,
                            double tol = 1e-8) {
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("t must lie in [0,1]");
    auto phi = [&](double u) { return evaluate_phi_v(sol, mix, field, c, u, t); };
    const double f_lo = phi(0.0), f_hi = phi(c);
    if (t >= 1.0 || !(f_lo > 0.0) || !(f_hi < 0.0)) throw NoBracket(f_lo, f_hi);
    ChaosPoint out;
    out.t = t;
    out.phi_at_c = f_hi;
    double lo = 0.0, hi = c;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (phi(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        ++out.bisection_iters;
    }
    out.u_t = 0.5 * (lo + hi);
    out.bracket_width = hi - lo;
    return out;
}

}  // namespace parisi
