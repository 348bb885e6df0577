#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "parisi/chaos.hpp"
#include "parisi/config.hpp"
#include "parisi/guerra.hpp"
#include "parisi/inequalities.hpp"
#include "parisi/io.hpp"
#include "parisi/optimize.hpp"
#include "parisi/pde.hpp"
#include "parisi/properties.hpp"
#include "parisi/simulator.hpp"

namespace parisi {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNotConverged = 2, kExitCapacity = 3, kExitNumerical = 4 };

struct CommandContext {
    RunConfig cfg;
    std::filesystem::path out_dir = ".";
    std::ostream* log = &std::cout;

    json resolved() const { return to_json(cfg); }
    GridConfig grid() const { return resolve_grid(cfg.grid, cfg.mixture, cfg.field); }

    OptimizerOptions optimizer() const {
        OptimizerOptions o = cfg.optimizer;
        o.seed = cfg.seed;
        o.threads = cfg.threads;
        o.grid = cfg.grid;
        return o;
    }
};

/// The measure the chaos commands work with: from the config when given, solved otherwise.
struct MeasureInfo {
    RSBParams rsb;
    double value = 0.0;
    double c = 0.0;
    bool solved = false;
    bool converged = true;
};

inline MeasureInfo obtain_measure(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    MeasureInfo info;
    if (cfg.measure) {
        info.rsb = *cfg.measure;
        info.value = parisi_functional(cfg.mixture, cfg.field, info.rsb, cfg.grid);
        info.c = min_support(info.rsb, cfg.optimizer.mass_tol);
        return info;
    }
    const ParisiMeasure pm = solve_parisi_measure(cfg.mixture, cfg.field, cfg.tol, cfg.k_max, ctx.optimizer());
    info.rsb = pm.rsb;
    info.value = pm.value;
    info.c = pm.c;
    info.solved = true;
    info.converged = pm.converged;
    return info;
}

inline int cmd_solve(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const ParisiMeasure pm = solve_parisi_measure(cfg.mixture, cfg.field, cfg.tol, cfg.k_max, ctx.optimizer());
    write_json(ctx.out_dir / "measure.json", to_json(pm), ctx.resolved());
    *ctx.log << "value " << format_number(pm.value) << "  c " << format_number(pm.c) << "  k " << pm.rsb.k()
             << (pm.converged ? "" : "  (not converged)") << "\n";
    return pm.converged ? kExitOk : kExitNotConverged;
}

inline int cmd_chaos_curve(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const MeasureInfo mi = obtain_measure(ctx);
    const PhiSolution sol = solve_phi(cfg.mixture, mi.rsb, ctx.grid(), {mi.c});
    CsvTable csv({"t", "u_t", "phi_c_at_c", "iters", "status"});
    for (double t : cfg.t_grid) {
        try {
            const ChaosPoint pt = solve_u_t(sol, cfg.mixture, cfg.field, mi.c, t, cfg.root_tol);
            csv.add({format_number(t), format_number(pt.u_t), format_number(pt.phi_at_c),
                     std::to_string(pt.bisection_iters), "ok"});
            *ctx.log << "t " << format_number(t) << "  u_t " << format_number(pt.u_t) << "\n";
        } catch (const NoBracket& e) {
            csv.add({format_number(t), "", format_number(e.hi_value()), "0", "no_bracket"});
            *ctx.log << "t " << format_number(t) << "  no bracket\n";
        }
    }
    csv.write(ctx.out_dir / "chaos_curve.csv", ctx.resolved());
    return mi.converged ? kExitOk : kExitNotConverged;
}

inline std::vector<double> bound_u_grid(const RunConfig& cfg, double c) {
    if (!cfg.u_grid.empty()) return cfg.u_grid;
    std::vector<double> u;
    for (int i = 0; i < cfg.u_points; ++i) u.push_back(c * i / (cfg.u_points - 1));
    return u;
}

inline int cmd_bound_scan(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const MeasureInfo mi = obtain_measure(ctx);
    CsvTable csv({"u", "t", "alpha0", "slope0", "quad_bound", "status"});
    for (double u : bound_u_grid(cfg, mi.c)) {
        if (!(u >= 0.0 && u <= mi.c)) {
            csv.add({format_number(u), format_number(cfg.bound_t), "", "", "", "outside"});
            continue;
        }
        const auto cp = standard_coupling(mi.rsb, u, cfg.bound_t, CouplingMode::chaos, mi.c);
        const ZeroSlope zs = guerra_zero_and_slope(cfg.mixture, cfg.field, cp.params, cfg.grid);
        csv.add({format_number(u), format_number(cfg.bound_t), format_number(zs.alpha0), format_number(zs.slope0),
                 format_number(zs.alpha0 - 0.5 * zs.slope0 * zs.slope0), "ok"});
    }
    csv.write(ctx.out_dir / "bound_scan.csv", ctx.resolved());
    *ctx.log << "c " << format_number(mi.c) << "  2P " << format_number(2 * mi.value) << "\n";
    return mi.converged ? kExitOk : kExitNotConverged;
}

inline int cmd_simulate(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const SimulateBlock& sb = cfg.simulate;
    SimConfig sc;
    sc.mixture = cfg.mixture;
    sc.field = cfg.field;
    sc.N = sb.N;
    sc.t = sb.t;
    sc.n_disorder = sb.n_disorder;
    sc.seed = cfg.seed;
    sc.threads = cfg.threads;
    if ((sb.constrained || sb.overlap || !sb.compare_t.empty()) && sb.N > kMaxCoupledSpins)
        throw CapacityError("coupled enumeration needs N <= " + std::to_string(kMaxCoupledSpins));

    json payload;
    if (sb.free_energy) {
        const SimResult r = exact_free_energy(sc);
        payload["free_energy"] = to_json(r);
        *ctx.log << "p_N " << format_number(r.estimate) << " +- " << format_number(r.std_error) << "\n";
    }
    if (sb.constrained) {
        json rows = json::array();
        CsvTable csv({"u", "p_u", "stderr"});
        for (const SimResult& r : constrained_coupled_scan(sc)) {
            rows.push_back(to_json(r));
            csv.add({format_number(r.lattice_u), format_number(r.estimate), format_number(r.std_error)});
        }
        payload["constrained"] = rows;
        csv.write(ctx.out_dir / "constrained.csv", ctx.resolved());
    }
    if (sb.overlap) {
        const SimResult r = overlap_distribution(sc);
        payload["overlap"] = to_json(r);
        CsvTable csv({"r", "mass", "stderr"});
        for (const auto& b : r.table) csv.add({format_number(b.r), format_number(b.mass), format_number(b.std_error)});
        csv.write(ctx.out_dir / "overlap.csv", ctx.resolved());
        *ctx.log << "mean overlap " << format_number(r.estimate) << " +- " << format_number(r.std_error) << "\n";
    }
    int code = kExitOk;
    if (!sb.compare_t.empty()) {
        const MeasureInfo mi = obtain_measure(ctx);
        if (!mi.converged) code = kExitNotConverged;
        const PhiSolution sol = solve_phi(cfg.mixture, mi.rsb, ctx.grid(), {mi.c});
        json rows = json::array();
        CsvTable csv({"t", "mean_overlap", "stderr", "u_t", "gap"});
        for (double t : sb.compare_t) {
            SimConfig at = sc;
            at.t = t;
            const SimResult r = overlap_distribution(at);
            const double ut = solve_u_t(sol, cfg.mixture, cfg.field, mi.c, t, cfg.root_tol).u_t;
            rows.push_back({{"t", t}, {"mean_overlap", r.estimate}, {"stderr", r.std_error}, {"u_t", ut}});
            csv.add({format_number(t), format_number(r.estimate), format_number(r.std_error), format_number(ut),
                     format_number(std::abs(r.estimate - ut))});
            *ctx.log << "t " << format_number(t) << "  mean overlap " << format_number(r.estimate) << "  u_t "
                     << format_number(ut) << "\n";
        }
        payload["comparison"] = rows;
        payload["caveat"] = "exact enumeration at N = " + std::to_string(sb.N) +
                            "; finite-size effects are large, agreement with u_t is qualitative";
        csv.write(ctx.out_dir / "comparison.csv", ctx.resolved());
    }
    write_json(ctx.out_dir / "simulate.json", payload, ctx.resolved());
    return code;
}

struct CheckOutcome {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double limit = 0.0;
    std::string note;
};

/// Property checks on the configured model; every check is cheap enough for a routine run.
inline std::vector<CheckOutcome> run_property_suite(const CommandContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const Mixture& mix = cfg.mixture;
    const FieldSpec& field = cfg.field;
    const GridConfig grid = ctx.grid();
    std::vector<CheckOutcome> out;
    auto check = [&](std::string name, double value, double limit, bool passed, std::string note = "") {
        out.push_back({std::move(name), passed, value, limit, std::move(note)});
    };

    {
        // one-atom functional against a direct Gaussian average
        const double q = 0.3;
        const auto& rule = gauss_hermite(121);
        const double e = field.expect(rule, [&](double h) {
            return gaussian_expectation(rule, h, std::sqrt(mix.d1(q)), [](double x) { return log_cosh_jet(x).v; });
        });
        const double direct = std::log(2.0) + e + 0.5 * (mix.d1(1.0) - mix.d1(q)) - 0.5 * (mix.theta(1.0) - mix.theta(q));
        const double gap = std::abs(parisi_functional(mix, field, RSBParams::replica_symmetric(q), cfg.grid) - direct);
        check("one_atom_functional", gap, 1e-7, gap <= 1e-7);
    }

    const MeasureInfo mi = obtain_measure(ctx);
    const AFamily fam = build_a_functions(mix, mi.rsb, grid);
    {
        const auto res = stationarity_residuals(fam, field);
        double worst = 0.0;
        const auto atoms = mi.rsb.atoms();
        for (std::size_t i = 0; i < res.size(); ++i)
            if (atoms[i].mass > cfg.optimizer.mass_tol) worst = std::max(worst, std::abs(res[i]));
        check("stationarity", worst, cfg.optimizer.stationarity_tol, worst <= cfg.optimizer.stationarity_tol);
    }
    const PhiSolution sol = solve_phi(mix, mi.rsb, grid, {mi.c});
    {
        const auto rep = consistency_check(sol, fam);
        check("pde_recursion_consistency", rep.max_value_gap, 1e-6, rep.max_value_gap <= 1e-6);
    }
    if (field.chaos_hypotheses_met() && mi.c > 0.0) {
        const double at1 = evaluate_phi_v(sol, mix, field, mi.c, mi.c, 1.0);
        check("phi_c_at_c_t1", std::abs(at1), 1e-4, std::abs(at1) <= 1e-4);
        const double below = evaluate_phi_v(sol, mix, field, mi.c, mi.c, 0.5);
        check("phi_c_at_c_t05_negative", below, -1e-4, below < -1e-4);
        const double at0 = evaluate_phi_v(sol, mix, field, mi.c, 0.0, 0.5);
        check("phi_c_at_0_positive", at0, 1e-4, at0 > 1e-4);
        double prev = -1.0, worst_drop = 0.0;
        for (int i = 0; i <= 9; ++i) {
            const double ut = solve_u_t(sol, mix, field, mi.c, i / 10.0, cfg.root_tol).u_t;
            worst_drop = std::max(worst_drop, prev - ut);
            prev = ut;
        }
        check("u_t_nondecreasing", worst_drop, 0.0, worst_drop <= 0.0);
        const double u = 0.5 * mi.c;
        const auto cp = standard_coupling(mi.rsb, u, 0.5, CouplingMode::chaos, mi.c);
        const double gap =
            std::abs(guerra_zero_and_slope(mix, field, cp.params, cfg.grid).slope0 - evaluate_phi_v(sol, mix, field, mi.c, u, 0.5));
        check("slope_matches_phi", gap, 1e-5, gap <= 1e-5);
    } else {
        check("chaos_identities", 0.0, 0.0, true, "skipped: needs E h^2 > 0 and c > 0");
    }
    {
        Guerra2DConfig g2;
        g2.threads = cfg.threads;
        const auto cp = standard_coupling(mi.rsb, 0.5, 0.0);
        const double gap = std::abs(guerra_bound(mix, field, cp.params, g2) - 2.0 * mi.value);
        check("guerra_factorises_at_t0", gap, 1e-6, gap <= 1e-6);
    }
    {
        std::mt19937_64 rng(cfg.seed);
        const DerivativeBounds b = derivative_bounds(fam, mix, 50, rng);
        check("abs_first_derivative", b.max_abs_d1, 1 + 1e-6, b.max_abs_d1 <= 1 + 1e-6);
        check("second_derivative_positive", b.min_d2, 0.0, b.min_d2 > 0.0);
        check("second_derivative_bound_excess", b.max_d2_excess, 0.0, b.max_d2_excess <= 1e-9);
        check("abs_third_derivative", b.max_abs_d3, 4.001, b.max_abs_d3 <= 4.001);
        check("abs_fourth_derivative", b.max_abs_d4, 8.01, b.max_abs_d4 <= 8.01);
    }
    {
        double worst = std::numeric_limits<double>::infinity();
        for (int p = 0; p <= fam.k() + 1; ++p)
            worst = std::min(worst, verify_subadditivity(fam, p, 0.5, cfg.verify.samples, cfg.seed + p));
        check("subadditivity_margin", worst, -1e-8, worst >= -1e-8);
    }
    {
        std::mt19937_64 rng(cfg.seed);
        std::uniform_real_distribution<double> ux(-3.0, 3.0), ut(0.0, 1.0);
        double worst = std::numeric_limits<double>::infinity();
        for (int i = 0; i < cfg.verify.samples; ++i) {
            const double x1 = ux(rng), x2 = ux(rng), t = ut(rng);
            worst = std::min(worst, f_eta(x1, x2, 0.3, t, 1) - 0.5 * f_eta(x1, x2, 0.2, t, 1));
        }
        check("f_eta_halving_margin", worst, 0.0, worst >= 0.0);
    }
    {
        SimConfig sc;
        sc.mixture = mix;
        sc.field = field;
        sc.N = 6;
        sc.t = 0.5;
        sc.seed = cfg.seed;
        const MonomialTerms terms = monomial_terms(mix, sc.N);
        double worst = 0.0, gray = 0.0;
        for (int i = 0; i < 10; ++i) {
            const auto s = draw_disorder(sc, terms, i, true);
            const auto shells = shell_log_sums(s.w1, s.w2, sc.N);
            worst = std::max(worst, std::abs(std::expm1(log_sum_exp(shells) - log_sum_exp(s.w1) - log_sum_exp(s.w2))));
            std::mt19937_64 rng = sample_rng(cfg.seed, i);
            const auto coef = draw_coefficients(terms, rng);
            gray = std::max(gray, std::abs(log_sum_exp(gray_energies(terms, coef)) - log_sum_exp(naive_energies(terms, coef))));
        }
        check("overlap_partition_identity", worst, 1e-10, worst <= 1e-10);
        check("gray_code_matches_naive", gray, 1e-12, gray <= 1e-12);
    }
    return out;
}

inline int cmd_verify(const CommandContext& ctx) {
    const auto checks = run_property_suite(ctx);
    json rows = json::array();
    bool all = true;
    for (const auto& c : checks) {
        all = all && c.passed;
        json row = {{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"limit", c.limit}};
        if (!c.note.empty()) row["note"] = c.note;
        rows.push_back(row);
        *ctx.log << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << format_number(c.value)
                 << (c.note.empty() ? "" : "  " + c.note) << "\n";
    }
    write_json(ctx.out_dir / "verify.json", {{"checks", rows}, {"passed", all}}, ctx.resolved());
    return all ? kExitOk : kExitNumerical;
}

}  // namespace parisi
