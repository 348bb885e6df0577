#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "parisi/chaos.hpp"
#include "parisi/guerra.hpp"

using namespace parisi;

namespace {

const Mixture kMix = Mixture::sk(1.5);
const FieldSpec kField = FieldSpec::constant(0.4);
const RSBParams kTriplet = RSBParams::from_interior({0.4}, {0.3, 0.7});

double twice_p(const Mixture& mix, const FieldSpec& field, const RSBParams& r) {
    return 2.0 * parisi_functional(mix, field, r);
}

CoupledParams with_lambda(CoupledParams p, double lambda) {
    p.lambda = lambda;
    return p;
}

struct ChaosSetup {
    double c = oracle::rs_fixed_point(1.5, 0.4);
    RSBParams rsb = RSBParams::replica_symmetric(c);
    PhiSolution sol = solve_phi(kMix, rsb, resolve_grid({}, kMix, kField), {c});
};

const ChaosSetup& chaos_setup() {
    static const ChaosSetup s;
    return s;
}

}  // namespace

TEST(Coupling, AtomAlreadyPresent) {
    const auto c = standard_coupling(kTriplet, 0.3, 0.4);
    EXPECT_EQ(c.params.rho, kTriplet.q);
    EXPECT_EQ(c.params.tau, 1);
    EXPECT_EQ(c.params.kappa, kTriplet.k() + 1);
    EXPECT_DOUBLE_EQ(c.params.n[0], 0.0);
    EXPECT_DOUBLE_EQ(c.params.n[1], 0.4);
}

TEST(Coupling, InsertsMissingAtom) {
    const auto c = standard_coupling(kTriplet, -0.5, 0.2);
    EXPECT_EQ(c.rsb.k(), kTriplet.k() + 1);
    EXPECT_EQ(c.params.eta, -1);
    EXPECT_DOUBLE_EQ(c.params.rho[c.params.tau], 0.5);
    EXPECT_NEAR(parisi_functional(kMix, kField, c.rsb), parisi_functional(kMix, kField, kTriplet), 1e-9);
    for (int p = 0; p < c.params.tau; ++p) EXPECT_DOUBLE_EQ(c.params.n[p], c.rsb.m[p] / 1.2);
}

TEST(Coupling, ZeroTemperatureCouplingKeepsMasses) {
    const auto c = standard_coupling(kTriplet, 0.5, 0.0);
    for (std::size_t p = 0; p < c.params.n.size(); ++p) EXPECT_DOUBLE_EQ(c.params.n[p], c.rsb.m[p]);
}

TEST(Coupling, ChaosLayout) {
    const auto c = standard_coupling(kTriplet, 0.2, 0.5, CouplingMode::chaos, 0.7);
    // q_2 = 0.7 <= v, so a = 2 and kappa = k + 3 - a = 2
    EXPECT_EQ(c.params.kappa, 2);
    EXPECT_EQ(c.params.tau, 1);
    EXPECT_EQ(c.params.n, (std::vector<double>{0.0, 0.0, 1.0}));
    EXPECT_EQ(c.params.rho, (std::vector<double>{0.0, 0.2, 0.7, 1.0}));
    EXPECT_THROW(standard_coupling(kTriplet, 0.8, 0.5, CouplingMode::chaos, 0.7), InvalidArgument);
}

TEST(Coupling, ValidationRejectsBadParams) {
    CoupledParams p = standard_coupling(kTriplet, 0.3, 0.4).params;
    p.rho[p.tau] = 0.31;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p = standard_coupling(kTriplet, 0.3, 0.4).params;
    p.eta = -1;
    EXPECT_THROW(p.validate(), InvalidArgument);
    p = standard_coupling(kTriplet, 0.3, 0.4).params;
    p.n.back() = 0.9;
    EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(GuerraBound, FactorisesAtZeroCorrelation) {
    const double target = twice_p(kMix, kField, kTriplet);
    for (double u : {0.5, -0.3, 0.7}) EXPECT_NEAR(guerra_bound(kMix, kField, standard_coupling(kTriplet, u, 0.0).params), target, 1e-6) << u;
}

TEST(GuerraBound, FactorisesWithRandomField) {
    const FieldSpec field = FieldSpec::gaussian(0.2, 0.5);
    EXPECT_NEAR(guerra_bound(kMix, field, standard_coupling(kTriplet, 0.5, 0.0).params), twice_p(kMix, field, kTriplet),
                1e-6);
}

TEST(GuerraBound, AtMostTwiceFunctional) {
    const double target = twice_p(kMix, kField, kTriplet);
    for (double t : {0.3, 0.7, 1.0})
        for (double u : {0.5, -0.5}) EXPECT_LE(guerra_bound(kMix, kField, standard_coupling(kTriplet, u, t).params), target + 1e-8) << t << " " << u;
}

TEST(GuerraBound, NoCorrelatedLevelsGivesEquality) {
    const auto c = standard_coupling(kTriplet, 0.0, 0.6);
    ASSERT_EQ(c.params.tau, 1);
    EXPECT_NEAR(guerra_bound(kMix, kField, c.params), twice_p(kMix, kField, kTriplet), 1e-6);
}

TEST(GuerraBound, MatchesOneDimensionalZeroValue) {
    const auto& s = chaos_setup();
    const auto c = standard_coupling(s.rsb, 0.2, 0.5, CouplingMode::chaos, s.c);
    EXPECT_NEAR(guerra_bound(kMix, kField, c.params), guerra_zero_and_slope(kMix, kField, c.params).alpha0, 1e-8);
}

TEST(GuerraSlope, MatchesPhi) {
    const auto& s = chaos_setup();
    for (double u : {0.0, 0.15, 0.3, s.c})
        for (double t : {0.0, 0.5, 0.9}) {
            const auto c = standard_coupling(s.rsb, u, t, CouplingMode::chaos, s.c);
            EXPECT_NEAR(guerra_zero_and_slope(kMix, kField, c.params).slope0,
                        evaluate_phi_v(s.sol, kMix, kField, s.c, u, t), 1e-5)
                << u << " " << t;
        }
}

TEST(GuerraSlope, MatchesCentralDifference) {
    const auto& s = chaos_setup();
    const double d = 1e-4;
    for (double u : {0.1, 0.3}) {
        const CoupledParams p = standard_coupling(s.rsb, u, 0.5, CouplingMode::chaos, s.c).params;
        const double fd =
            (guerra_bound(kMix, kField, with_lambda(p, d)) - guerra_bound(kMix, kField, with_lambda(p, -d))) / (2 * d);
        EXPECT_NEAR(fd, guerra_zero_and_slope(kMix, kField, p).slope0, 1e-5) << u;
    }
}

TEST(GuerraSlope, PositiveForIndependentCopiesAtZero) {
    const auto& s = chaos_setup();
    const auto c = standard_coupling(s.rsb, 0.0, 0.0, CouplingMode::chaos, s.c);
    EXPECT_GT(guerra_zero_and_slope(kMix, kField, c.params).slope0, 0.0);
}

TEST(GuerraSlope, CurvatureBetweenZeroAndOne) {
    const auto& s = chaos_setup();
    const CoupledParams p = standard_coupling(s.rsb, 0.2, 0.5, CouplingMode::chaos, s.c).params;
    const double d = 0.05;
    for (double lambda : {-1.0, -0.4, 0.0, 0.5, 1.2}) {
        const double second = (guerra_bound(kMix, kField, with_lambda(p, lambda + d)) -
                               2 * guerra_bound(kMix, kField, with_lambda(p, lambda)) +
                               guerra_bound(kMix, kField, with_lambda(p, lambda - d))) /
                              (d * d);
        EXPECT_GE(second, -1e-6) << lambda;
        EXPECT_LE(second, 1.0 + 1e-6) << lambda;
    }
}

TEST(GuerraSlope, RequiresZeroExponentsBelowTau) {
    const auto c = standard_coupling(kTriplet, 0.7, 0.5);
    ASSERT_GT(c.params.tau, 1);
    EXPECT_THROW(guerra_zero_and_slope(kMix, kField, c.params), InvalidArgument);
}

TEST(ChaosBound, EqualsZeroValueAtRoot) {
    const auto& s = chaos_setup();
    const double ut = solve_u_t(s.sol, kMix, kField, s.c, 0.5).u_t;
    const auto p = standard_coupling(s.rsb, ut, 0.5, CouplingMode::chaos, s.c).params;
    EXPECT_NEAR(chaos_bound(kMix, kField, p), guerra_zero_and_slope(kMix, kField, p).alpha0, 1e-9);
}

TEST(ChaosBound, QuadraticDropAwayFromRoot) {
    const auto& s = chaos_setup();
    const double t = 0.5;
    const double ut = solve_u_t(s.sol, kMix, kField, s.c, t).u_t;
    const double target = twice_p(kMix, kField, s.rsb);
    int tested = 0;
    for (int i = 0; i <= 20; ++i) {
        const double u = s.c * i / 20.0;
        if (std::abs(u - ut) < 0.2) continue;
        const double phi = evaluate_phi_v(s.sol, kMix, kField, s.c, u, t);
        const auto p = standard_coupling(s.rsb, u, t, CouplingMode::chaos, s.c).params;
        EXPECT_LE(chaos_bound(kMix, kField, p), target - 0.5 * phi * phi + 1e-8) << u;
        ++tested;
    }
    EXPECT_GT(tested, 0);
}
