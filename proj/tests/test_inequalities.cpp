#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "parisi/inequalities.hpp"

using namespace parisi;

namespace {

const Mixture kMix = Mixture::sk(1.5);
const FieldSpec kField = FieldSpec::constant(0.4);

const AFamily& family() {
    static const AFamily fam =
        build_a_functions(kMix, RSBParams::from_interior({0.3, 0.7}, {0.2, 0.5, 0.8}), resolve_grid({}, kMix, kField));
    return fam;
}

}  // namespace

TEST(FEta, PerfectCorrelationCancels) {
    for (double x : {-1.0, 0.0, 0.7}) EXPECT_NEAR(f_eta(x, x, 0.5, 1.0, 1), 0.0, 1e-14);
}

TEST(FEta, DegenerateVariance) {
    const double a = std::tanh(0.3), b = std::tanh(-1.1);
    EXPECT_NEAR(f_eta(0.3, -1.1, 0.0, 0.4, 1), (a - b) * (a - b), 1e-14);
    EXPECT_NEAR(f_eta(0.3, -1.1, 0.0, 0.4, -1), (a + b) * (a + b), 1e-14);
}

TEST(FEta, MatchesSimpsonAtIndependence) {
    // at t = 0 the square expands into single-variable moments
    const double x1 = 0.4, x2 = -0.9, w = 0.3, s = std::sqrt(w);
    auto th = [](double x) { return std::tanh(x); };
    auto th2 = [](double x) { return std::tanh(x) * std::tanh(x); };
    const double m1 = oracle::gauss_simpson(th, x1, s), m2 = oracle::gauss_simpson(th, x2, s);
    const double e1 = oracle::gauss_simpson(th2, x1, s), e2 = oracle::gauss_simpson(th2, x2, s);
    EXPECT_NEAR(f_eta(x1, x2, w, 0.0, 1), e1 + e2 - 2 * m1 * m2, 1e-12);
    EXPECT_NEAR(f_eta(x1, x2, w, 0.0, -1), e1 + e2 + 2 * m1 * m2, 1e-12);
}

TEST(FEta, SignFlipIdentity) {
    for (double t : {0.0, 0.4, 0.9}) EXPECT_NEAR(f_eta(0.2, 0.5, 0.6, t, -1), f_eta(0.2, -0.5, 0.6, t, 1), 1e-13);
}

TEST(FEta, HalvingLowerBoundForSmallIncrements) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), ut(0.0, 1.0);
    const double w0 = 0.2, w = 0.1;
    for (int i = 0; i < 200; ++i) {
        const double x1 = ux(rng), x2 = ux(rng), t = ut(rng);
        EXPECT_GE(f_eta(x1, x2, w0 + w, t, 1), 0.5 * f_eta(x1, x2, w0, t, 1)) << x1 << " " << x2 << " " << t;
    }
}

TEST(Subadditivity, EqualityWithoutCorrelation) {
    for (int p = 0; p <= family().k() + 1; ++p) {
        const auto [lhs, rhs] = subadditivity_sides(family(), p, 0.3, -1.2, 0.6, 0.0, 1);
        EXPECT_NEAR(lhs, rhs, 1e-10) << p;
    }
}

TEST(Subadditivity, EqualityForIdenticalCopies) {
    for (double m : {0.2, 0.9}) {
        const auto [lhs, rhs] = subadditivity_sides(family(), 1, 0.8, 0.8, m, 1.0, 1);
        EXPECT_NEAR(lhs, rhs, 1e-10) << m;
    }
}

TEST(Subadditivity, HoldsOnRandomSamples) {
    for (int p = 0; p <= family().k() + 1; ++p) EXPECT_GE(verify_subadditivity(family(), p, 0.5, 500, 11 + p), -1e-8) << p;
    EXPECT_GE(verify_subadditivity(family(), 2, 0.9, 200, 5), -1e-8);
}

TEST(Subadditivity, RejectsBadArguments) {
    EXPECT_THROW(subadditivity_sides(family(), 9, 0.0, 0.0, 0.5, 0.5, 1), InvalidArgument);
    EXPECT_THROW(subadditivity_sides(family(), 0, 0.0, 0.0, 0.0, 0.5, 1), InvalidArgument);
    EXPECT_THROW(subadditivity_sides(family(), 0, 0.0, 0.0, 0.5, 0.5, 2), InvalidArgument);
}
