#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "parisi/field.hpp"
#include "parisi/grid.hpp"
#include "parisi/quadrature.hpp"

using namespace parisi;

TEST(GaussHermite, GaussianMoments) {
    for (int n : {5, 20, 61, 121}) {
        const auto& r = gauss_hermite(n);
        ASSERT_EQ(r.size(), static_cast<std::size_t>(n));
        double m0 = 0, m1 = 0, m2 = 0, m4 = 0, m6 = 0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            const double x = r.nodes[i], w = r.weights[i];
            m0 += w;
            m1 += w * x;
            m2 += w * x * x;
            m4 += w * std::pow(x, 4);
            m6 += w * std::pow(x, 6);
        }
        EXPECT_NEAR(m0, 1.0, 1e-13);
        EXPECT_NEAR(m1, 0.0, 1e-13);
        EXPECT_NEAR(m2, 1.0, 1e-12);
        EXPECT_NEAR(m4, 3.0, 1e-11);
        if (n > 3) { EXPECT_NEAR(m6, 15.0, 1e-10); }
        for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LT(r.nodes[i - 1], r.nodes[i]);
    }
    EXPECT_THROW(gauss_hermite(0), InvalidArgument);
}

TEST(GaussHermite, MatchesSimpsonOnLogCosh) {
    const auto& r = gauss_hermite(61);
    for (double sd : {0.3, 0.8, 1.25}) {
        const double gh = gaussian_expectation(r, 0.4, sd, oracle::log_cosh);
        const double ref = oracle::gauss_simpson(oracle::log_cosh, 0.4, sd);
        EXPECT_NEAR(gh, ref, 1e-9) << sd;
    }
    // E cosh(x + sd Z) = cosh(x) exp(sd^2/2)
    const double v = gaussian_expectation(r, 0.7, 1.2, [](double x) { return std::cosh(x); });
    EXPECT_NEAR(v, std::cosh(0.7) * std::exp(0.72), 1e-12);
}

TEST(GridFunction, CubicLagrangeAccuracyAndTails) {
    const UniformGrid g = UniformGrid::symmetric(6.0, 601);
    std::vector<double> v(g.n);
    for (int i = 0; i < g.n; ++i) v[i] = oracle::log_cosh(g.x(i));
    const GridFunction f(g, v);
    for (double x : {-5.93, -1.234, 0.0, 0.017, 2.5, 5.99}) {
        EXPECT_NEAR(f(x), oracle::log_cosh(x), 1e-7);
        EXPECT_NEAR(f.derivative(x, 1), std::tanh(x), 1e-5);
    }
    // linear extension with the edge slope
    const double s = f.slope_hi();
    EXPECT_NEAR(f(8.0) - f(6.0), 2.0 * s, 1e-12);
    EXPECT_EQ(f.derivative(7.0, 2), 0.0);
    EXPECT_THROW(f.derivative(0.0, 3), InvalidArgument);
}

TEST(GridFunction, QuinticHermiteAccuracy) {
    const UniformGrid g = UniformGrid::symmetric(10.0, 1025);
    std::vector<double> v(g.n), d1(g.n), d2(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double x = g.x(i), t = std::tanh(x);
        v[i] = oracle::log_cosh(x);
        d1[i] = t;
        d2[i] = 1 - t * t;
    }
    const GridFunction f(g, v, d1, d2);
    for (int k = 0; k < 997; ++k) {
        const double x = -9.99 + k * 0.02003;
        const double t = std::tanh(x);
        const Jet j = f.jet(x);
        EXPECT_NEAR(j.v, oracle::log_cosh(x), 1e-12);
        EXPECT_NEAR(j.d1, t, 1e-10);
        EXPECT_NEAR(j.d2, 1 - t * t, 1e-7);
    }
    // nodes are reproduced exactly
    EXPECT_NEAR(f(g.x(300)), v[300], 1e-15);
    EXPECT_NEAR(f.derivative(g.x(300), 1), d1[300], 1e-14);
    EXPECT_NEAR(f(12.0), v.back() + 2.0 * d1.back(), 1e-12);
}

TEST(EvenLine, SixPointAccuracy) {
    const double h = 0.05;
    std::vector<double> v(401);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::cos(i * h) + oracle::log_cosh(i * h);
    const EvenLine f(v, h);
    for (double x : {0.0, 0.013, -0.49, 3.3333, -19.97}) {
        const double ax = std::abs(x);
        EXPECT_NEAR(f(x), std::cos(ax) + oracle::log_cosh(ax), 1e-8) << x;
    }
    const double span = h * 400;
    EXPECT_NEAR(f(span + 1.0) - f(span), (v[400] - v[399]) / h, 1e-12);
}

TEST(FieldSpec, NodesAndExpectations) {
    const auto& r = gauss_hermite(31);
    const FieldSpec c = FieldSpec::constant(0.4);
    EXPECT_EQ(c.nodes(r).size(), 1u);
    EXPECT_NEAR(c.expect(r, [](double h) { return h * h; }), 0.16, 1e-15);
    const FieldSpec g = FieldSpec::gaussian(0.1, 0.5);
    EXPECT_NEAR(g.expect(r, [](double h) { return h * h; }), 0.26, 1e-13);
    EXPECT_NEAR(g.second_moment(), 0.26, 1e-15);
    EXPECT_TRUE(g.chaos_hypotheses_met());
    EXPECT_FALSE(FieldSpec::constant(0.0).chaos_hypotheses_met());
    EXPECT_FALSE(FieldSpec::gaussian(0.0, 0.0).chaos_hypotheses_met());
    EXPECT_THROW(FieldSpec::gaussian(0.0, -1.0), InvalidArgument);
}
