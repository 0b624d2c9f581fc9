#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <numbers>
#include <random>

#include "bml/error.hpp"
#include "bml/metric.hpp"

using namespace bml;

namespace {

RationalMap make(std::vector<cplx> p, std::vector<cplx> q) { return RationalMap::parse(p, q); }

GridSpec spec_at(int res) {
    GridSpec s;
    s.resolution = res;
    return s;
}

const SphereGrid& disk(int res) {
    static const SphereGrid g512 = build_basin_grid(make({0, 0, 1}, {1}), ComplexPoint::from_z(0.0), spec_at(512));
    static SphereGrid g1024;
    if (res == 512) return g512;
    if (g1024.cell_count() == 0)
        g1024 = build_basin_grid(make({0, 0, 1}, {1}), ComplexPoint::from_z(0.0), spec_at(1024));
    return g1024;
}

const MetricGraph& disk_graph(int res) {
    static const MetricGraph g512 = build_metric_graph(disk(512), 1);
    static MetricGraph g1024;
    if (res == 512) return g512;
    if (g1024.vertex_count() == 0) g1024 = build_metric_graph(disk(1024), 1);
    return g1024;
}

double qh(int res, cplx a, cplx b) {
    const SphereGrid& g = disk(res);
    return quasihyperbolic_distance(disk_graph(res), g, g.owning_cell(ComplexPoint::from_z(a)),
                                    g.owning_cell(ComplexPoint::from_z(b)))
        .value;
}

cplx random_in_disk(std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    while (true) {
        const cplx z(u(rng), u(rng));
        if (std::abs(z) < 1.0) return radius * z;
    }
}

}  // namespace

TEST(DiskReference, Examples) {
    EXPECT_EQ(disk_reference_distance(0.0, 0.0), 0.0);
    EXPECT_NEAR(disk_reference_distance(0.0, 0.5), 0.5493061443340548, 1e-15);
    EXPECT_NEAR(disk_reference_distance(0.3, 0.7), 0.5577809234909415, 1e-15);
    EXPECT_THROW(disk_reference_distance(1.0, 0.0), Error);
    EXPECT_THROW(disk_reference_distance(0.0, cplx(0.8, 0.8)), Error);
}

TEST(DiskReference, MobiusInvariance) {
    std::mt19937_64 rng(21);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const cplx a = random_in_disk(rng, 0.9), z1 = random_in_disk(rng, 0.9), z2 = random_in_disk(rng, 0.9);
        auto phi = [&](cplx z) { return (z - a) / (1.0 - std::conj(a) * z); };
        worst = std::max(worst, std::abs(disk_reference_distance(phi(z1), phi(z2)) - disk_reference_distance(z1, z2)));
    }
    EXPECT_LE(worst, 1e-12);
}

TEST(SchwarzPick, SquaringContractsOnDisk) {
    std::mt19937_64 rng(22);
    std::vector<std::pair<cplx, cplx>> pairs;
    for (int i = 0; i < 1000; ++i) pairs.emplace_back(random_in_disk(rng, 0.99), random_in_disk(rng, 0.99));
    const auto rep = schwarz_pick_disk(make({0, 0, 1}, {1}), pairs);
    EXPECT_EQ(rep.pairs, 1000u);
    EXPECT_EQ(rep.violations, 0u);
    EXPECT_LE(rep.max_ratio, 1.0);
}

TEST(SchwarzPick, IdentityIsIsometry) {
    std::mt19937_64 rng(23);
    std::vector<std::pair<cplx, cplx>> pairs;
    for (int i = 0; i < 1000; ++i) pairs.emplace_back(random_in_disk(rng, 0.95), random_in_disk(rng, 0.95));
    const auto rep = schwarz_pick_disk(make({0, 1}, {1}), pairs);
    EXPECT_EQ(rep.pairs, 1000u);
    EXPECT_LE(rep.max_abs_gap, 1e-12);
}

TEST(Graph, DiskVertexCount) {
    const double expected = std::numbers::pi * std::pow(512.0 / 3.0, 2);
    EXPECT_NEAR(static_cast<double>(disk_graph(512).vertex_count()), expected, 0.02 * expected);
}

TEST(Graph, WeightsPositiveAndSymmetric) {
    const MetricGraph& g = disk_graph(512);
    for (std::size_t v = 0; v < g.vertex_count(); ++v) {
        for (std::int64_t e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
            ASSERT_GT(g.weights[e], 0.0);
            ASSERT_TRUE(std::isfinite(g.weights[e]));
            const std::int32_t t = g.targets[e];
            bool back = false;
            for (std::int64_t f = g.offsets[t]; f < g.offsets[t + 1]; ++f)
                if (g.targets[f] == static_cast<std::int32_t>(v)) back = g.weights[f] == g.weights[e];
            ASSERT_TRUE(back);
        }
    }
}

TEST(Graph, Errors) {
    const SphereGrid base(spec_at(64), ComplexPoint::from_z(0.0));
    const CellId lone = base.owning_cell(ComplexPoint::from_z(cplx(0.7, 0.0)));
    const cplx lone_center = base.center(lone);
    SphereGrid g = grid_from_membership(spec_at(64), ComplexPoint::from_z(0.0), [&](const ComplexPoint& p) {
        return p.chart == Chart::Z && (std::abs(p.coord()) < 0.3 || p.coord() == lone_center);
    });
    g = boundary_distance(label_components(g));
    ASSERT_EQ(g.component_count(), 2);
    try {
        build_metric_graph(g, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::DegenerateComponent);
    }
    try {
        build_metric_graph(g, 3);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoSuchComponent);
    }
}

TEST(Graph, NewtonComponentsAreConnected) {
    const SphereGrid g = build_basin_grid(make({1, 0, 0, 2}, {0, 0, 3}), ComplexPoint::from_z(1.0), spec_at(512));
    const int count = std::min(g.component_count(), 25);
    for (int c = 1; c <= count; ++c) {
        if (g.component_sizes()[c] < 2) continue;
        const MetricGraph mg = build_metric_graph(g, c);
        std::vector<char> seen(mg.vertex_count(), 0);
        std::deque<std::int32_t> queue{0};
        seen[0] = 1;
        std::size_t reached = 1;
        while (!queue.empty()) {
            const std::int32_t v = queue.front();
            queue.pop_front();
            for (std::int64_t e = mg.offsets[v]; e < mg.offsets[v + 1]; ++e) {
                if (!seen[mg.targets[e]]) {
                    seen[mg.targets[e]] = 1;
                    ++reached;
                    queue.push_back(mg.targets[e]);
                }
            }
        }
        EXPECT_EQ(reached, mg.vertex_count()) << "component " << c;
    }
}

TEST(Quasihyperbolic, SameCellIsZero) {
    const SphereGrid& g = disk(512);
    const CellId a = g.owning_cell(ComplexPoint::from_z(0.3));
    const DistanceResult r = quasihyperbolic_distance(disk_graph(512), g, a, a);
    EXPECT_EQ(r.value, 0.0);
    EXPECT_EQ(r.hops(), 0u);
}

TEST(Quasihyperbolic, DiskOraclesAt1024) {
    EXPECT_NEAR(qh(1024, 0.0, 0.5), std::log(2.0), 0.05 * std::log(2.0));
    EXPECT_NEAR(qh(1024, 0.0, 0.9), std::log(10.0), 0.05 * std::log(10.0));
}

TEST(Quasihyperbolic, PathAndBounds) {
    const SphereGrid& g = disk(512);
    const CellId a = g.owning_cell(ComplexPoint::from_z(cplx(-0.4, 0.2)));
    const CellId b = g.owning_cell(ComplexPoint::from_z(cplx(0.6, -0.3)));
    const DistanceResult r = quasihyperbolic_distance(disk_graph(512), g, a, b);
    ASSERT_GE(r.path.size(), 2u);
    EXPECT_EQ(r.path.front(), a);
    EXPECT_EQ(r.path.back(), b);
    EXPECT_LE(r.lower_bound, r.value);
    EXPECT_LE(r.value, r.upper_bound);
}

TEST(Quasihyperbolic, BracketsClosedFormOnDisk) {
    // quarter of the surrogate <= hyperbolic <= surrogate, up to 5%.
    std::mt19937_64 rng(24);
    const SphereGrid& g = disk(512);
    for (int i = 0; i < 20; ++i) {
        const cplx a = random_in_disk(rng, 0.85), b = random_in_disk(rng, 0.85);
        const CellId ca = g.owning_cell(ComplexPoint::from_z(a)), cb = g.owning_cell(ComplexPoint::from_z(b));
        if (ca == cb) continue;
        const DistanceResult r = quasihyperbolic_distance(disk_graph(512), g, ca, cb);
        const double exact = disk_reference_distance(g.center(ca), g.center(cb));
        EXPECT_LE(r.lower_bound, exact * 1.05);
        EXPECT_LE(exact, r.upper_bound * 1.05);
    }
}

TEST(Quasihyperbolic, SymmetryAndTriangle) {
    std::mt19937_64 rng(25);
    const SphereGrid& g = disk(512);
    const MetricGraph& mg = disk_graph(512);
    std::uniform_int_distribution<std::size_t> pick(0, mg.vertex_count() - 1);
    for (int i = 0; i < 10; ++i) {
        const std::int32_t a = static_cast<std::int32_t>(pick(rng)), b = static_cast<std::int32_t>(pick(rng)),
                           c = static_cast<std::int32_t>(pick(rng));
        const auto da = single_source_distances(mg, a);
        const auto db = single_source_distances(mg, b);
        EXPECT_NEAR(da[b], db[a], 1e-12 * da[b]);
        EXPECT_LE(da[c], (da[b] + db[c]) * (1.0 + 1e-12));
        EXPECT_NEAR(quasihyperbolic_distance(mg, g, mg.vertices[a], mg.vertices[b]).value, da[b], 1e-12 * da[b]);
    }
}

TEST(Quasihyperbolic, MonotoneUnderMasking) {
    const SphereGrid& full = disk(512);
    const SphereGrid half = boundary_distance(label_components(
        restrict_membership(full, [](const ComplexPoint& p) { return p.chart == Chart::Z && p.re > 0.0; })));
    const MetricGraph gf = disk_graph(512);
    const MetricGraph gh = build_metric_graph(half, 1);
    std::mt19937_64 rng(26);
    std::uniform_int_distribution<std::size_t> pick(0, gh.vertex_count() - 1);
    int violations = 0;
    for (int i = 0; i < 100; ++i) {
        const CellId a = gh.vertices[pick(rng)], b = gh.vertices[pick(rng)];
        if (quasihyperbolic_distance(gh, half, a, b).value < quasihyperbolic_distance(gf, full, a, b).value) ++violations;
    }
    EXPECT_EQ(violations, 0);
}

TEST(Quasihyperbolic, CellOutsideComponent) {
    const SphereGrid& g = disk(512);
    const CellId inside = g.owning_cell(ComplexPoint::from_z(0.0));
    const CellId outside = g.owning_cell(ComplexPoint::from_z(2.0));
    EXPECT_THROW(quasihyperbolic_distance(disk_graph(512), g, inside, outside), Error);
}

TEST(SchwarzPick, SurrogateOnBasinOfInfinity) {
    const RationalMap m = make({1, 0, 1}, {1});
    const SphereGrid g = build_basin_grid(m, ComplexPoint::infinity(), spec_at(512));
    std::mt19937_64 rng(27);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<std::pair<ComplexPoint, ComplexPoint>> pairs;
    while (pairs.size() < 30) {
        const ComplexPoint a = ComplexPoint::from_z(cplx(u(rng), u(rng)));
        const ComplexPoint b = ComplexPoint::from_z(cplx(u(rng), u(rng)));
        pairs.emplace_back(a, b);
    }
    const auto rep = schwarz_pick_surrogate(m, g, pairs);
    EXPECT_GT(rep.pairs, 10u);
    EXPECT_LE(rep.violation_fraction(), 0.1);
}
