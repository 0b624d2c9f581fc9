#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bml/boettcher.hpp"
#include "bml/error.hpp"

using namespace bml;

namespace {

RationalMap make(std::vector<cplx> p, std::vector<cplx> q) { return RationalMap::parse(p, q); }

GridSpec spec_at(int res) {
    GridSpec s;
    s.resolution = res;
    return s;
}

const RationalMap& zsq() {
    static const RationalMap m = make({0, 0, 1}, {1});
    return m;
}
const RationalMap& zsq1() {
    static const RationalMap m = make({1, 0, 1}, {1});
    return m;
}

const SphereGrid& outer(const RationalMap& m) {
    static const SphereGrid a = build_basin_grid(zsq(), ComplexPoint::infinity(), spec_at(512));
    static const SphereGrid b = build_basin_grid(zsq1(), ComplexPoint::infinity(), spec_at(512));
    return &m == &zsq() ? a : b;
}

// Independent long-double evaluation via the telescoping series
// G(z) = log|z| + sum_k 2^-(k+1) log|1 + c / z_k^2| for z^2 + c.
long double green_series(long double x, long double y, long double c) {
    long double g = std::log(std::hypot(x, y));
    long double w = 0.5L;
    for (int k = 0; k < 12; ++k) {
        const long double zx = x * x - y * y, zy = 2 * x * y;
        const long double r2 = zx * zx + zy * zy;
        // 1 + c / z^2 = 1 + c conj(z^2) / |z^2|^2
        const long double ux = 1 + c * zx / r2, uy = -c * zy / r2;
        g += w * std::log(std::hypot(ux, uy));
        x = zx + c;
        y = zy;
        w *= 0.5L;
    }
    return g;
}

}  // namespace

TEST(Greens, PointValues) {
    EXPECT_NEAR(greens_at(zsq(), ComplexPoint::from_z(2.0)), std::log(2.0), 1e-14);
    EXPECT_EQ(greens_at(zsq(), ComplexPoint::from_z(0.5)), 0.0);
    EXPECT_TRUE(std::isinf(greens_at(zsq(), ComplexPoint::infinity())));
    const double oracle = static_cast<double>(green_series(2.0L, 0.0L, 1.0L));
    EXPECT_NEAR(oracle, 0.814709045478960, 1e-13);
    EXPECT_NEAR(greens_at(zsq1(), ComplexPoint::from_z(2.0)), oracle, 1e-9);
    EXPECT_NEAR(greens_at(zsq1(), ComplexPoint::from_z(cplx(0.3, 1.7))),
                static_cast<double>(green_series(0.3L, 1.7L, 1.0L)), 1e-9);
}

TEST(Greens, LeadingCoefficientNormalisation) {
    // 2 z^2 is conjugate to z^2 by z -> 2z, so G(z) = log|2z|.
    const RationalMap m = make({0, 0, 2}, {1});
    EXPECT_NEAR(greens_at(m, ComplexPoint::from_z(3.0)), std::log(6.0), 1e-12);
    EXPECT_NEAR(greens_at(m, ComplexPoint::from_z(0.6)), std::log(1.2), 1e-12);
}

TEST(Greens, NotPolynomial) {
    const RationalMap newton = make({1, 0, 0, 2}, {0, 0, 3});
    try {
        greens_at(newton, ComplexPoint::from_z(2.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotPolynomial);
    }
}

TEST(Greens, FieldPositiveExactlyOnMembers) {
    const SphereGrid& g = outer(zsq1());
    const GreensField f = greens_function(zsq1(), g);
    for (CellId id = 0; id < static_cast<CellId>(g.cell_count()); ++id) {
        ASSERT_EQ(f.at(id) > 0.0, g.member(id)) << id;
    }
}

TEST(Greens, FunctionalEquation) {
    for (const RationalMap* m : {&zsq(), &zsq1()}) {
        const SphereGrid& g = outer(*m);
        const GreensField f = greens_function(*m, g);
        std::size_t eligible = 0, good = 0;
        for (CellId id = 0; id < static_cast<CellId>(g.cell_count()); ++id) {
            if (!g.owned(id) || !(f.at(id) > 1e-3)) continue;
            const ComplexPoint img = m->evaluate(g.center_point(id));
            if (!g.member(g.owning_cell(img))) continue;
            ++eligible;
            const double lhs = greens_at(*m, img);
            if (std::abs(lhs - 2.0 * f.at(id)) <= 1e-6) ++good;
        }
        ASSERT_GT(eligible, 50000u);
        EXPECT_GE(static_cast<double>(good), 0.99 * eligible);
    }
}

TEST(Annulus, RoundAnnuliForSquare) {
    const SphereGrid& g = outer(zsq());
    const GreensField f = greens_function(zsq(), g);
    const AnnulusDecomposition dec = annulus_decomposition(f, g, std::log(2.0), 6);
    for (int n = 1; n <= 6; ++n) EXPECT_EQ(dec.component_count(n), 1) << n;
    // W_1 is the round annulus sqrt(2) < |z| < 2.
    EXPECT_EQ(dec.band_of(g.owning_cell(ComplexPoint::from_z(1.7))), 1);
    EXPECT_EQ(dec.band_of(g.owning_cell(ComplexPoint::from_z(cplx(0, -1.2)))), 2);
    EXPECT_EQ(dec.band_of(g.owning_cell(ComplexPoint::from_z(3.0))), 0);
    EXPECT_EQ(dec.band_of(g.owning_cell(ComplexPoint::from_z(0.5))), -1);
}

TEST(Annulus, Errors) {
    const SphereGrid& g = outer(zsq());
    const GreensField f = greens_function(zsq(), g);
    try {
        annulus_decomposition(f, g, 1e6, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BadThreshold);
    }
    EXPECT_THROW(annulus_decomposition(f, g, -1.0, 3), Error);
    EXPECT_THROW(annulus_decomposition(f, g, 1.0, 0), Error);
}

TEST(Annulus, CantorComponentsGrow) {
    const SphereGrid& g = outer(zsq1());
    const GreensField f = greens_function(zsq1(), g);
    const ComplexPoint base = ComplexPoint::from_z(10.0);
    const double t0 = choose_t0(zsq1(), base);
    // Above the critical level G(0) and below the base.
    EXPECT_GT(t0, greens_at(zsq1(), ComplexPoint::from_z(0.0)));
    EXPECT_LT(t0, greens_at(zsq1(), base));
    const AnnulusDecomposition dec = annulus_decomposition(f, g, t0, 6);
    EXPECT_EQ(dec.component_count(1), 1);
    EXPECT_GT(dec.component_count(6), dec.component_count(1));
    for (int n = 2; n <= 6; ++n) EXPECT_GE(dec.component_count(n), dec.component_count(n - 1)) << n;

    // Large components agree with a coarser raster.
    const SphereGrid coarse = build_basin_grid(zsq1(), ComplexPoint::infinity(), spec_at(256));
    const AnnulusDecomposition dc = annulus_decomposition(greens_function(zsq1(), coarse), coarse, t0, 6);
    auto large = [](const Labeling& l, std::int64_t min_cells) {
        return std::count_if(l.sizes.begin() + 1, l.sizes.end(), [&](std::int64_t s) { return s >= min_cells; });
    };
    for (int n = 1; n <= 6; ++n) EXPECT_EQ(large(dec.annuli[n], 400), large(dc.annuli[n], 100)) << n;
}

TEST(Annulus, BandsMapOntoBands) {
    const SphereGrid& g = outer(zsq1());
    const GreensField f = greens_function(zsq1(), g);
    const AnnulusDecomposition dec = annulus_decomposition(f, g, choose_t0(zsq1(), ComplexPoint::from_z(10.0)), 6);
    const int res = g.resolution();
    std::size_t tested = 0, good = 0;
    for (CellId id = 0; id < static_cast<CellId>(g.cell_count()); ++id) {
        if (!g.owned(id)) continue;
        const int n = dec.band_of(id);
        if (n < 2) continue;
        const CellCoord c = g.coord(id);
        bool interior = true;
        for (int dy = -2; dy <= 2 && interior; ++dy)
            for (int dx = -2; dx <= 2 && interior; ++dx) {
                const int x = c.ix + dx, y = c.iy + dy;
                interior = x >= 0 && y >= 0 && x < res && y < res &&
                           dec.band_of(g.representative(g.cell_id(c.chart, x, y))) == n;
            }
        if (!interior) continue;
        ++tested;
        good += dec.band_of(g.owning_cell(zsq1().evaluate(g.center_point(id)))) == n - 1;
    }
    ASSERT_GT(tested, 1000u);
    EXPECT_GE(static_cast<double>(good), 0.99 * tested);
}

TEST(Coverage, SquareRootsOfTwoFillRings) {
    const SphereGrid& g = outer(zsq());
    const GreensField f = greens_function(zsq(), g);
    const AnnulusDecomposition dec = annulus_decomposition(f, g, std::log(2.0) * 1.5, 6);
    const OrbitTree tree = build_backward_tree(zsq(), ComplexPoint::from_z(2.0), 8, g);
    const CoverageReport r = verify_annulus_coverage(dec, tree);
    EXPECT_TRUE(r.complete());
    EXPECT_EQ(r.fraction(), 1.0);
    EXPECT_EQ(r.eligible(), 6);
    const CoverageReport none = verify_annulus_coverage(dec, OrbitTree{});
    EXPECT_EQ(none.fraction(), 0.0);
    EXPECT_EQ(none.uncovered.size(), 6u);
}

TEST(Coverage, MonotoneInDepthAndCompleteForCantorCase) {
    const SphereGrid& g = outer(zsq1());
    const GreensField f = greens_function(zsq1(), g);
    const ComplexPoint base = ComplexPoint::from_z(cplx(0.0, 10.0));
    const AnnulusDecomposition dec = annulus_decomposition(f, g, choose_t0(zsq1(), base), 6);
    const OrbitTree tree = build_backward_tree(zsq1(), base, 10, g);
    double prev = -1.0;
    for (int k = 0; k <= 10; ++k) {
        const CoverageReport r = verify_annulus_coverage(dec, tree, k);
        for (const LevelCoverage& l : r.levels) EXPECT_LE(l.covered, l.eligible);
        EXPECT_GE(r.fraction(), prev);
        prev = r.fraction();
    }
    EXPECT_EQ(prev, 1.0);
}

TEST(Contours, ClosedBoundaryOfRoundAnnulus) {
    const SphereGrid& g = outer(zsq());
    const GreensField f = greens_function(zsq(), g);
    const AnnulusDecomposition dec = annulus_decomposition(f, g, std::log(2.0), 2);
    std::ostringstream out;
    write_contours_csv(out, dec, g);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "basin-metric-lab v1");
    std::getline(in, line);
    EXPECT_EQ(line, "level,component,chart,x0,y0,x1,y1");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
    }
    // Two circles per band, each roughly 8 r / h cell sides long.
    EXPECT_GT(rows, 1000u);
}
