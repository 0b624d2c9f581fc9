#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "bml/error.hpp"
#include "bml/rational_map.hpp"

using namespace bml;

namespace {

RationalMap make(std::vector<cplx> p, std::vector<cplx> q) { return RationalMap::parse(p, q); }
RationalMap zsq() { return make({0, 0, 1}, {1}); }
RationalMap zsq_minus_half() { return make({-0.5, 0, 1}, {1}); }
RationalMap zsq_plus_one() { return make({1, 0, 1}, {1}); }
RationalMap newton_cubic() { return make({1, 0, 0, 2}, {0, 0, 3}); }

const double kSqrt3 = std::sqrt(3.0);

template <typename F>
void expect_kind(ErrorKind kind, F&& f) {
    try {
        f();
        ADD_FAILURE() << "expected " << to_string(kind);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), kind) << e.what();
    }
}

}  // namespace

TEST(Parse, Degrees) {
    EXPECT_EQ(zsq().degree(), 2);
    EXPECT_EQ(zsq_minus_half().degree(), 2);
    EXPECT_EQ(newton_cubic().degree(), 3);
}

TEST(Parse, TrimsTrailingZeros) {
    const RationalMap m = make({0, 0, 1, 0, 0}, {1, 0});
    EXPECT_EQ(m.numerator().size(), 3u);
    EXPECT_EQ(m.denominator().size(), 1u);
    EXPECT_TRUE(m.is_polynomial());
}

TEST(Parse, Errors) {
    expect_kind(ErrorKind::InvalidArgument, [] { make({0, 0}, {1}); });
    expect_kind(ErrorKind::InvalidArgument, [] { make({1}, {0}); });
    // (z^2 - 1) / (z - 1)
    expect_kind(ErrorKind::CommonFactor, [] { make({-1, 0, 1}, {-1, 1}); });
    const RationalMap affine = make({1, 2}, {1});
    EXPECT_FALSE(affine.is_dynamical());
    expect_kind(ErrorKind::DegreeTooLow, [&] { fixed_points(affine); });
}

TEST(Evaluate, Examples) {
    const ComplexPoint four = zsq().evaluate(ComplexPoint::from_z(2.0));
    EXPECT_EQ(four.chart, Chart::W);
    EXPECT_NEAR(four.re, 0.25, 1e-15);
    EXPECT_TRUE(zsq().evaluate(ComplexPoint::infinity()).is_infinity());
    const ComplexPoint one = newton_cubic().evaluate(ComplexPoint::from_z(-0.5));
    EXPECT_NEAR(std::abs(one.z() - 1.0), 0.0, 1e-15);
    // pole of Q
    EXPECT_TRUE(newton_cubic().evaluate(ComplexPoint::from_z(0.0)).is_infinity());
}

TEST(Evaluate, ChartConsistencyOnOverlap) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> radius(2.0 / 3.0, 1.5), angle(0.0, 2 * std::numbers::pi);
    for (const RationalMap& m : {zsq_minus_half(), zsq_plus_one(), newton_cubic()}) {
        for (int i = 0; i < 1000; ++i) {
            const cplx z = std::polar(radius(rng), angle(rng));
            const ComplexPoint pz{z.real(), z.imag(), Chart::Z};
            const cplx w = 1.0 / z;
            const ComplexPoint pw{w.real(), w.imag(), Chart::W};
            const ComplexPoint a = m.evaluate_in_chart(pz, Chart::Z);
            const ComplexPoint b = m.evaluate_in_chart(pw, Chart::W);
            EXPECT_LE(chordal_distance(a, b), 1e-10);
        }
    }
}

TEST(Multiplier, Examples) {
    EXPECT_NEAR(std::abs(multiplier(zsq(), ComplexPoint::from_z(0.0))), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(multiplier(zsq(), ComplexPoint::from_z(1.0)) - 2.0), 0.0, 1e-14);
    const double p = (1.0 - kSqrt3) / 2.0;
    EXPECT_NEAR(std::abs(multiplier(zsq_minus_half(), ComplexPoint::from_z(p)) - (1.0 - kSqrt3)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(multiplier(zsq(), ComplexPoint::infinity())), 0.0, 1e-15);
    expect_kind(ErrorKind::NotFixed, [] { multiplier(zsq(), ComplexPoint::from_z(0.5)); });
}

TEST(PolyRoots, Examples) {
    auto r1 = poly_roots(Poly{-1, 0, 1});
    ASSERT_EQ(r1.size(), 2u);
    EXPECT_NEAR(std::abs(r1[0].value + 1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(r1[1].value - 1.0), 0.0, 1e-14);

    auto r2 = poly_roots(Poly{0, 0, 1});
    ASSERT_EQ(r2.size(), 1u);
    EXPECT_EQ(r2[0].multiplicity, 2);
    EXPECT_EQ(r2[0].value, cplx(0.0));

    auto r3 = poly_roots(Poly{-0.5, -1, 1});
    ASSERT_EQ(r3.size(), 2u);
    EXPECT_NEAR(r3[0].value.real(), (1.0 - kSqrt3) / 2.0, 1e-13);
    EXPECT_NEAR(r3[1].value.real(), (1.0 + kSqrt3) / 2.0, 1e-13);
    EXPECT_THROW(poly_roots(Poly{3.0}), Error);
}

TEST(PolyRoots, RecoversRandomRoots) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 12;
        std::vector<cplx> roots(n);
        Poly p{1.0};
        for (auto& r : roots) {
            r = cplx(u(rng), u(rng));
            p = multiply(p, Poly{-r, 1.0});
        }
        const auto found = poly_roots(p);
        int total = 0;
        for (const Root& f : found) total += f.multiplicity;
        EXPECT_EQ(total, n);
        for (const cplx& r : roots) {
            double best = 1e300;
            for (const Root& f : found) best = std::min(best, std::abs(f.value - r));
            EXPECT_LT(best, 1e-8) << "trial " << trial;
        }
        for (std::size_t i = 1; i < found.size(); ++i) {
            const bool ordered = found[i - 1].value.real() < found[i].value.real() ||
                                 (found[i - 1].value.real() == found[i].value.real() &&
                                  found[i - 1].value.imag() <= found[i].value.imag());
            EXPECT_TRUE(ordered);
        }
    }
}

TEST(PolyRoots, MultipleRoots) {
    // (z - 0.3)^3 (z + 1)
    Poly p{1.0};
    for (int i = 0; i < 3; ++i) p = multiply(p, Poly{-0.3, 1.0});
    p = multiply(p, Poly{1.0, 1.0});
    const auto found = poly_roots(p);
    ASSERT_EQ(found.size(), 2u);
    EXPECT_EQ(found[1].multiplicity, 3);
    EXPECT_NEAR(found[1].value.real(), 0.3, 1e-8);
}

TEST(FixedPoints, Squaring) {
    const auto fps = fixed_points(zsq());
    ASSERT_EQ(fps.size(), 3u);
    EXPECT_EQ(fps[0].kind, FixedPointClass::Superattracting);
    EXPECT_NEAR(std::abs(fps[0].location.z()), 0.0, 1e-15);
    EXPECT_EQ(fps[1].kind, FixedPointClass::Repelling);
    EXPECT_NEAR(std::abs(fps[1].location.z() - 1.0), 0.0, 1e-14);
    EXPECT_TRUE(fps[2].location.is_infinity());
    EXPECT_EQ(fps[2].kind, FixedPointClass::Superattracting);
}

TEST(FixedPoints, AttractingQuadratic) {
    const auto fps = fixed_points(zsq_minus_half());
    ASSERT_EQ(fps.size(), 3u);
    EXPECT_NEAR(fps[0].location.re, (1.0 - kSqrt3) / 2.0, 1e-13);
    EXPECT_EQ(fps[0].kind, FixedPointClass::Attracting);
    EXPECT_NEAR(fps[0].multiplier.real(), 1.0 - kSqrt3, 1e-12);
    EXPECT_EQ(fps[1].kind, FixedPointClass::Repelling);
    EXPECT_TRUE(fps[2].location.is_infinity());
    for (const auto& fp : fps) EXPECT_LE(spherical_distance(zsq_minus_half().evaluate(fp.location), fp.location), 1e-9);
}

TEST(FixedPoints, Parabolic) {
    const auto fps = fixed_points(make({0, 1, 1}, {1}));
    ASSERT_EQ(fps.size(), 2u);
    EXPECT_EQ(fps[0].multiplicity, 2);
    EXPECT_EQ(fps[0].kind, FixedPointClass::Indifferent);
    EXPECT_NEAR(std::abs(fps[0].multiplier - 1.0), 0.0, 1e-12);
}

TEST(FixedPoints, NewtonMapHasRepellingInfinity) {
    const auto fps = fixed_points(newton_cubic());
    ASSERT_EQ(fps.size(), 4u);
    int super = 0;
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(std::abs(std::pow(fps[i].location.z(), 3) - 1.0), 0.0, 1e-12);
        super += fps[i].kind == FixedPointClass::Superattracting;
    }
    EXPECT_EQ(super, 3);
    EXPECT_TRUE(fps[3].location.is_infinity());
    // w -> 3w^3 / (2 + w^3) near 0 ... multiplier 3/2
    EXPECT_NEAR(std::abs(fps[3].multiplier - 1.5), 0.0, 1e-12);
}

TEST(CriticalPoints, Quadratics) {
    for (const RationalMap& m : {zsq(), zsq_plus_one()}) {
        const auto cps = critical_points(m);
        ASSERT_EQ(cps.size(), 2u);
        EXPECT_NEAR(std::abs(cps[0].z()), 0.0, 1e-15);
        EXPECT_TRUE(cps[1].is_infinity());
    }
}

TEST(CriticalPoints, NewtonMap) {
    // Hand-expanded numerator of the derivative: 18z^4 - (2z^3+1)(6z) = 6z(z^3 - 1).
    std::vector<cplx> oracle{0.0};
    for (int k = 0; k < 3; ++k) oracle.push_back(std::polar(1.0, 2 * std::numbers::pi * k / 3));
    const auto cps = critical_points(newton_cubic());
    ASSERT_EQ(cps.size(), 4u);
    for (const cplx& o : oracle) {
        double best = 1e300;
        for (const auto& c : cps) best = std::min(best, std::abs(c.z() - o));
        EXPECT_LT(best, 1e-12);
    }
}

TEST(Preimages, Examples) {
    auto a = preimages(zsq(), ComplexPoint::from_z(0.25));
    ASSERT_EQ(a.size(), 2u);
    EXPECT_NEAR(a[0].point.re, -0.5, 1e-15);
    EXPECT_NEAR(a[1].point.re, 0.5, 1e-15);

    auto b = preimages(zsq(), ComplexPoint::from_z(0.0));
    ASSERT_EQ(b.size(), 1u);
    EXPECT_EQ(b[0].multiplicity, 2);

    const double p = (1.0 - kSqrt3) / 2.0;
    auto c = preimages(zsq_minus_half(), ComplexPoint::from_z(p));
    ASSERT_EQ(c.size(), 2u);
    EXPECT_NEAR(c[0].point.re, p, 1e-13);
    EXPECT_NEAR(c[1].point.re, -p, 1e-13);

    auto d = preimages(zsq(), ComplexPoint::infinity());
    ASSERT_EQ(d.size(), 1u);
    EXPECT_TRUE(d[0].point.is_infinity());
    EXPECT_EQ(d[0].multiplicity, 2);

    // Newton map: 0 is the only finite preimage of infinity (double pole), infinity itself is the third.
    auto e = preimages(newton_cubic(), ComplexPoint::infinity());
    int total = 0;
    for (const auto& q : e) total += q.multiplicity;
    EXPECT_EQ(total, 3);
}

TEST(Preimages, SoundAndCompleteOnRandomTargets) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const RationalMap& m : {zsq(), zsq_minus_half(), zsq_plus_one(), newton_cubic()}) {
        for (int i = 0; i < 100; ++i) {
            const cplx v(u(rng), u(rng));
            const ComplexPoint c = (i % 2) ? ComplexPoint::from_z(v) : ComplexPoint::from_w(v);
            int total = 0;
            for (const auto& q : preimages(m, c)) {
                total += q.multiplicity;
                EXPECT_LE(spherical_distance(m.evaluate(q.point), c), 1e-8);
            }
            EXPECT_EQ(total, m.degree());
        }
    }
}

TEST(Preimages, Deterministic) {
    const ComplexPoint c = ComplexPoint::from_z(cplx(0.3, -0.2));
    const auto a = preimages(newton_cubic(), c);
    const auto b = preimages(newton_cubic(), c);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].point, b[i].point);
}

TEST(ComplexPoint, ChartConversion) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> radius(2.0 / 3.0, 1.5), angle(0.0, 2 * std::numbers::pi);
    for (int i = 0; i < 1000; ++i) {
        const cplx z = std::polar(radius(rng), angle(rng));
        const ComplexPoint pz{z.real(), z.imag(), Chart::Z};
        const ComplexPoint back = pz.in_chart(Chart::W).in_chart(Chart::Z);
        EXPECT_LE(std::abs(back.coord() - z) / std::abs(z), 1e-12);
    }
    EXPECT_TRUE(ComplexPoint::from_z(cplx(1e300, 0)).canonical().chart == Chart::W);
    EXPECT_THROW(ComplexPoint::infinity().in_chart(Chart::Z), Error);
}
