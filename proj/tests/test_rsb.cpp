#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "parisi/rsb.hpp"

using namespace parisi;

namespace {

GridConfig grid_for(const Mixture& mix, const FieldSpec& f) { return resolve_grid({}, mix, f); }

RSBParams random_triplet(std::mt19937_64& rng, int k) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> m(k), q(k + 1);
    for (auto& v : m) v = u(rng);
    for (auto& v : q) v = u(rng);
    std::sort(m.begin(), m.end());
    std::sort(q.begin(), q.end());
    return RSBParams::from_interior(m, q);
}

}  // namespace

TEST(RSBParams, ValidationAndAtoms) {
    EXPECT_NO_THROW(RSBParams::from_interior({0.3}, {0.2, 0.6}));
    EXPECT_THROW(RSBParams::from_interior({0.6, 0.3}, {0.2, 0.4, 0.6}), InvalidArgument);
    EXPECT_THROW(RSBParams::from_interior({0.3}, {0.6, 0.2}), InvalidArgument);
    EXPECT_THROW(RSBParams::from_interior({0.3}, {0.2}), InvalidArgument);
    const RSBParams r = RSBParams::from_interior({0.25, 0.5}, {0.1, 0.4, 0.8});
    const auto atoms = r.atoms();
    ASSERT_EQ(atoms.size(), 3u);
    EXPECT_NEAR(atoms[0].mass, 0.25, 1e-15);
    EXPECT_NEAR(atoms[2].mass, 0.5, 1e-15);
    EXPECT_TRUE(RSBParams::from_atoms(atoms).same_as(r));
}

TEST(Recursion, ReplicaSymmetricA1IsShiftedLogCosh) {
    const Mixture mix = Mixture::sk(0.8);
    const FieldSpec f = FieldSpec::constant(0.0);
    const AFamily fam = build_a_functions(mix, RSBParams::replica_symmetric(0.0), grid_for(mix, f));
    for (double x : {-7.3, -2.0, -0.3, 0.0, 0.45, 1.7, 6.2, 15.0}) {
        EXPECT_NEAR(fam.value(1, x), oracle::log_cosh(x) + 0.32, 1e-9) << x;
        EXPECT_NEAR(fam.jet(1, x).d1, std::tanh(x), 1e-9) << x;
    }
    for (int i = 0; i < fam.table(2).grid().n; i += 97)
        EXPECT_NEAR(fam.table(2).values()[i], oracle::log_cosh(fam.table(2).grid().x(i)), 1e-14);
}

TEST(Recursion, AllAtomsEqualGivesIdentityInteriorSteps) {
    const Mixture mix = Mixture::sk(1.2);
    const FieldSpec f = FieldSpec::constant(0.2);
    const RSBParams r = RSBParams::from_interior({0.2, 0.5}, {0.4, 0.4, 0.4});
    const AFamily fam = build_a_functions(mix, r, grid_for(mix, f));
    EXPECT_EQ(fam.variance(1), 0.0);
    EXPECT_EQ(fam.variance(2), 0.0);
    for (double x : {0.0, 0.9, 3.1}) {
        EXPECT_EQ(fam.value(1, x), fam.value(3, x));
        EXPECT_EQ(fam.value(2, x), fam.value(3, x));
    }
    // the two end convolutions match the replica-symmetric triplet at q = 0.4
    EXPECT_NEAR(parisi_functional(mix, f, r), parisi_functional(mix, f, RSBParams::replica_symmetric(0.4)),
                1e-12);
}

TEST(Recursion, EvenFunctions) {
    std::mt19937_64 rng(11);
    const Mixture mix = Mixture::sk(1.5);
    const FieldSpec f = FieldSpec::constant(0.4);
    for (int trial = 0; trial < 5; ++trial) {
        const RSBParams r = random_triplet(rng, 1 + trial % 3);
        const AFamily fam = build_a_functions(mix, r, grid_for(mix, f));
        for (int p = 0; p <= r.k() + 2; ++p) EXPECT_NEAR(fam.value(p, 0.7), fam.value(p, -0.7), 1e-8);
    }
}

TEST(Functional, ReplicaSymmetricClosedForm) {
    const Mixture mix = Mixture::sk(0.8);
    const FieldSpec f = FieldSpec::constant(0.0);
    EXPECT_NEAR(parisi_functional(mix, f, RSBParams::replica_symmetric(0.0)),
                std::numbers::ln2 + 0.64 / 4.0, 1e-6);
    for (double q : {0.05, 0.3, 0.77, 1.0}) {
        EXPECT_NEAR(parisi_functional(mix, f, RSBParams::replica_symmetric(q)), oracle::rs_sk(0.8, 0.0, q), 1e-6)
            << q;
    }
    const Mixture mix2 = Mixture::sk(1.5);
    for (double q : {0.1, 0.5, 0.9})
        EXPECT_NEAR(parisi_functional(mix2, FieldSpec::constant(0.4), RSBParams::replica_symmetric(q)),
                    oracle::rs_sk(1.5, 0.4, q), 1e-6)
            << q;
}

TEST(Functional, CollapsedLevelIsNoOp) {
    const Mixture mix = Mixture::sk(1.5);
    const FieldSpec f = FieldSpec::constant(0.4);
    const double two = parisi_functional(mix, f, RSBParams::from_interior({1.0}, {0.3, 0.7}));
    const double one = parisi_functional(mix, f, RSBParams::replica_symmetric(0.3));
    EXPECT_NEAR(two, one, 1e-9);
}

TEST(Functional, GaussianFieldMatchesNestedOracle) {
    const Mixture mix = Mixture::sk(1.1);
    const FieldSpec f = FieldSpec::gaussian(0.2, 0.3);
    const double q = 0.45;
    const double ours = parisi_functional(mix, f, RSBParams::replica_symmetric(q));
    // E_h of the constant-field closed form
    const double ref = oracle::gauss_simpson([&](double h) { return oracle::rs_sk(1.1, h, q); }, 0.2, 0.3, 400, 9.0);
    EXPECT_NEAR(ours, ref, 1e-6);
}

TEST(InsertAtom, StructureAndErrors) {
    const RSBParams r = RSBParams::from_interior({0.4}, {0.2, 0.6});
    const RSBParams a = insert_atom(r, 0.3);
    EXPECT_EQ(a.k(), 2);
    EXPECT_EQ(a.q, (std::vector<double>{0.0, 0.2, 0.3, 0.6, 1.0}));
    EXPECT_EQ(a.m, (std::vector<double>{0.0, 0.4, 0.4, 1.0}));
    const RSBParams b = insert_atom(r, 0.0);
    EXPECT_EQ(b.q, (std::vector<double>{0.0, 0.0, 0.2, 0.6, 1.0}));
    EXPECT_EQ(b.m, (std::vector<double>{0.0, 0.0, 0.4, 1.0}));
    EXPECT_THROW(insert_atom(r, 1.5), InvalidArgument);
    EXPECT_THROW(insert_atom(r, -0.1), InvalidArgument);
}

TEST(InsertAtom, FunctionalInvariant) {
    const Mixture mix = Mixture::sk(1.5);
    const FieldSpec f = FieldSpec::constant(0.4);
    const RSBParams r = RSBParams::from_interior({0.4}, {0.2, 0.6});
    const double base = parisi_functional(mix, f, r);
    EXPECT_NEAR(parisi_functional(mix, f, insert_atom(r, 0.6)), base, 1e-9);
    EXPECT_NEAR(parisi_functional(mix, f, insert_atom(r, 1.0)), base, 1e-9);
    EXPECT_NEAR(parisi_functional(mix, f, insert_atom(r, 0.3)), base, 1e-6);
}

TEST(InsertAtom, RandomInvarianceProperty) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0), beta(0.5, 1.5), hh(0.0, 0.6);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Mixture mix = Mixture::sk(beta(rng));
        const FieldSpec f = FieldSpec::constant(hh(rng));
        const RSBParams r = random_triplet(rng, trial % 3);
        const double qs = u(rng);
        const double d = std::abs(parisi_functional(mix, f, insert_atom(r, qs)) - parisi_functional(mix, f, r));
        worst = std::max(worst, d);
    }
    EXPECT_LE(worst, 1e-9);
}

TEST(TiltedMoment, LevelOneMatchesDirectQuadrature) {
    const Mixture mix = Mixture::sk(1.5);
    const FieldSpec f = FieldSpec::constant(0.4);
    const double q = 0.35;
    const AFamily fam = build_a_functions(mix, RSBParams::replica_symmetric(q), grid_for(mix, f));
    const double ours = tilted_moment(fam, f, 1, 1);
    const double ref = oracle::gauss_simpson(
        [](double x) {
            const double t = std::tanh(x);
            return t * t;
        },
        0.4, 1.5 * std::sqrt(q));
    EXPECT_NEAR(ours, ref, 1e-8);
    const double ours2 = tilted_moment(fam, f, 1, 2);
    const double ref2 = oracle::gauss_simpson(
        [](double x) {
            const double t = std::tanh(x);
            return (1 - t * t) * (1 - t * t);
        },
        0.4, 1.5 * std::sqrt(q));
    EXPECT_NEAR(ours2, ref2, 1e-7);  // second derivatives interpolate less accurately
    EXPECT_THROW(tilted_moment(fam, f, 0, 1), InvalidArgument);
    EXPECT_THROW(tilted_moment(fam, f, 2, 1), InvalidArgument);
    EXPECT_THROW(tilted_moment(fam, f, 1, 3), InvalidArgument);
}

TEST(TiltedMoment, TiltedLevelMatchesNestedSimpson) {
    // k = 1: A_2 is log cosh shifted; A_1 and the W_1 tilt are built by hand.
    const double beta = 1.3, h = 0.3, m1 = 0.45, q1 = 0.25, q2 = 0.6;
    const Mixture mix = Mixture::sk(beta);
    const FieldSpec f = FieldSpec::constant(h);
    const RSBParams r = RSBParams::from_interior({m1}, {q1, q2});
    const AFamily fam = build_a_functions(mix, r, grid_for(mix, f));
    const double b2 = beta * beta;
    const double s0 = std::sqrt(b2 * q1), s1 = std::sqrt(b2 * (q2 - q1));
    auto a2 = [&](double x) { return oracle::log_cosh(x) + 0.5 * b2 * (1 - q2); };
    auto a1 = [&](double x) {
        return std::log(oracle::gauss_simpson([&](double y) { return std::exp(m1 * a2(y)); }, x, s1, 800)) / m1;
    };
    const double ref = oracle::gauss_simpson(
        [&](double x) {
            const double base = a1(x);
            return oracle::gauss_simpson(
                [&](double y) {
                    const double t = std::tanh(y);
                    return std::exp(m1 * (a2(y) - base)) * t * t;
                },
                x, s1, 800);
        },
        h, s0, 400);
    EXPECT_NEAR(tilted_moment(fam, f, 2, 1), ref, 1e-7);
    // A_1 against the hand-built version
    for (double x : {0.0, 0.8, -2.5}) EXPECT_NEAR(fam.value(1, x), a1(x), 1e-8);
}

TEST(Stationarity, ReplicaSymmetricFixedPoint) {
    const Mixture mix = Mixture::sk(1.5);
    const FieldSpec f = FieldSpec::constant(0.4);
    const double qstar = oracle::rs_fixed_point(1.5, 0.4);
    const AFamily fam = build_a_functions(mix, RSBParams::replica_symmetric(qstar), grid_for(mix, f));
    const auto res = stationarity_residuals(fam, f);
    ASSERT_EQ(res.size(), 1u);
    EXPECT_LE(std::abs(res[0]), 1e-4);
    const AFamily off = build_a_functions(mix, RSBParams::replica_symmetric(0.2), grid_for(mix, f));
    EXPECT_GT(std::abs(stationarity_residuals(off, f)[0]), 0.05);
}

TEST(Recursion, DerivativeBoundsProperty) {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> xs(-8.0, 8.0), beta(0.5, 1.5);
    for (int trial = 0; trial < 6; ++trial) {
        const double b = beta(rng);
        const Mixture mix = Mixture::sk(b);
        const FieldSpec f = FieldSpec::constant(0.3);
        const RSBParams r = random_triplet(rng, 1 + trial % 3);
        const AFamily fam = build_a_functions(mix, r, grid_for(mix, f));
        const double C = 4.0 * std::exp(2.0 * mix.d1(1.0));
        const double e = 1e-3;
        for (int p = 0; p <= r.k() + 2; ++p) {
            for (int s = 0; s < 50; ++s) {
                const double x = xs(rng);
                const Jet j = fam.jet(p, x);
                const double ch = std::cosh(x);
                EXPECT_LE(std::abs(j.d1), 1 + 1e-6);
                EXPECT_GT(j.d2, 0.0);
                EXPECT_LE(j.d2, std::min(1.0, C / (ch * ch)) + 1e-9);
                const double d2p = fam.jet(p, x + e).d2, d2m = fam.jet(p, x - e).d2;
                EXPECT_LE(std::abs((d2p - d2m) / (2 * e)), 4 + 1e-3);
                EXPECT_LE(std::abs((d2p - 2 * j.d2 + d2m) / (e * e)), 8 + 1e-2);
            }
        }
    }
}

TEST(Recursion, JensenMonotoneStep) {
    const Mixture mix = Mixture::sk(1.4);
    const FieldSpec f = FieldSpec::constant(0.1);
    const RSBParams r = RSBParams::from_interior({0.3, 0.7}, {0.1, 0.4, 0.8});
    const AFamily fam = build_a_functions(mix, r, grid_for(mix, f));
    for (int p = 0; p <= r.k() + 1; ++p) {
        for (double x : {-3.0, -0.5, 0.0, 1.1, 4.0}) {
            const double plain = oracle::gauss_simpson([&](double y) { return fam.value(p + 1, y); }, x,
                                                       std::sqrt(fam.variance(p)), 2000);
            EXPECT_GE(fam.value(p, x), plain - 1e-10);
        }
    }
}

TEST(Functional, GridRefinementConvergence) {
    const FieldSpec f = FieldSpec::constant(0.4);
    for (double beta : {0.8, 1.5}) {
        const Mixture mix = Mixture::sk(beta);
        const RSBParams r = RSBParams::from_interior({0.35}, {0.3, 0.7});
        GridConfig coarse = grid_for(mix, f);
        GridConfig fine = coarse;
        fine.nodes = 2 * coarse.nodes - 1;
        fine.quad_nodes = 2 * coarse.quad_nodes;
        EXPECT_LE(std::abs(parisi_functional(mix, f, r, coarse) - parisi_functional(mix, f, r, fine)), 1e-7);
    }
}
