#include "bml/metric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>

#include "bml/error.hpp"

namespace bml {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using HeapEntry = std::pair<double, std::int32_t>;
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>>;

int sign(int v) { return (v > 0) - (v < 0); }

// Both cells a knight move passes must be members.
bool knight_clear(const SphereGrid& grid, const CellCoord& c, int dx, int dy) {
    if (std::abs(dx) + std::abs(dy) != 3) return true;
    int ax, ay, bx, by;
    if (std::abs(dx) == 1) {
        ax = c.ix;      ay = c.iy + sign(dy);
        bx = c.ix + dx; by = c.iy + sign(dy);
    } else {
        ax = c.ix + sign(dx); ay = c.iy;
        bx = c.ix + sign(dx); by = c.iy + dy;
    }
    return grid.member(grid.cell_id(c.chart, ax, ay)) && grid.member(grid.cell_id(c.chart, bx, by));
}

}  // namespace

double disk_reference_distance(cplx z1, cplx z2) {
    if (!(std::abs(z1) < 1.0) || !(std::abs(z2) < 1.0)) {
        throw Error(ErrorKind::OutOfDomain, "disk distance needs points of the open unit disk");
    }
    const double r = std::abs(z1 - z2) / std::abs(1.0 - std::conj(z1) * z2);
    return std::atanh(std::min(r, 1.0));
}

std::int32_t MetricGraph::vertex_of(const SphereGrid& grid, CellId cell) const {
    if (cell < 0 || static_cast<std::size_t>(cell) >= vertex_index.size()) return -1;
    return vertex_index[grid.representative(cell)];
}

MetricGraph build_metric_graph(const SphereGrid& grid, int component_id) {
    if (!grid.labeled() || component_id < 1 || component_id > grid.component_count()) {
        throw Error(ErrorKind::NoSuchComponent, "component " + std::to_string(component_id) + " does not exist");
    }
    if (!grid.has_distance()) throw Error(ErrorKind::InvalidArgument, "grid has no boundary distance field");

    MetricGraph g;
    g.component_id = component_id;
    g.vertices = grid.component_cells(component_id);
    const std::size_t n = g.vertices.size();
    if (n < 2) throw Error(ErrorKind::DegenerateComponent, "component " + std::to_string(component_id) + " is a single cell");

    g.vertex_index.assign(grid.cell_count(), -1);
    for (std::size_t v = 0; v < n; ++v) g.vertex_index[g.vertices[v]] = static_cast<std::int32_t>(v);

    // Stencil edges found from each vertex. An edge crossing the chart seam is
    // seen from one side only, so its reverse is recorded separately.
    std::vector<std::int64_t> first(n + 1, 0);
    std::vector<std::int32_t> found;
    found.reserve(n * 16);
    std::vector<std::pair<std::int32_t, std::int32_t>> seam;
    const auto stencil = sixteen_offsets();
    for (std::size_t v = 0; v < n; ++v) {
        const CellId cell = g.vertices[v];
        const CellCoord c = grid.coord(cell);
        grid.for_each_neighbor(cell, stencil, [&](CellId target, int dx, int dy) {
            const std::int32_t t = g.vertex_index[target];
            if (t < 0 || !knight_clear(grid, c, dx, dy)) return;
            found.push_back(t);
            if (grid.coord(target).chart != c.chart) seam.emplace_back(t, static_cast<std::int32_t>(v));
        });
        first[v + 1] = static_cast<std::int64_t>(found.size());
    }
    std::sort(seam.begin(), seam.end());

    std::vector<double> inv_delta(n);
    std::vector<ComplexPoint> centers(n);
    for (std::size_t v = 0; v < n; ++v) {
        inv_delta[v] = 1.0 / grid.boundary_distance(g.vertices[v]);
        centers[v] = grid.center_point(g.vertices[v]);
    }

    g.offsets.assign(n + 1, 0);
    g.targets.reserve(found.size() + seam.size());
    g.weights.reserve(found.size() + seam.size());
    std::vector<std::int32_t> local;
    auto s = seam.begin();
    for (std::size_t v = 0; v < n; ++v) {
        local.assign(found.begin() + first[v], found.begin() + first[v + 1]);
        for (; s != seam.end() && s->first == static_cast<std::int32_t>(v); ++s) local.push_back(s->second);
        std::sort(local.begin(), local.end());
        local.erase(std::unique(local.begin(), local.end()), local.end());
        for (std::int32_t t : local) {
            g.targets.push_back(t);
            g.weights.push_back(spherical_distance(centers[v], centers[t]) * 0.5 * (inv_delta[v] + inv_delta[t]));
        }
        g.offsets[v + 1] = static_cast<std::int64_t>(g.targets.size());
    }
    return g;
}

DistanceResult quasihyperbolic_distance(const MetricGraph& graph, const SphereGrid& grid, CellId a, CellId b) {
    const std::int32_t va = graph.vertex_of(grid, a);
    const std::int32_t vb = graph.vertex_of(grid, b);
    if (va < 0 || vb < 0) {
        throw Error(ErrorKind::InvalidArgument,
                    "cell outside component " + std::to_string(graph.component_id));
    }
    const std::size_t n = graph.vertex_count();
    std::vector<double> dist(n, kInf);
    std::vector<std::int32_t> pred(n, -1);
    MinHeap heap;
    dist[va] = 0.0;
    heap.emplace(0.0, va);
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        if (v == vb) break;
        for (std::int64_t e = graph.offsets[v]; e < graph.offsets[v + 1]; ++e) {
            const std::int32_t t = graph.targets[e];
            const double nd = d + graph.weights[e];
            if (nd < dist[t]) {
                dist[t] = nd;
                pred[t] = v;
                heap.emplace(nd, t);
            }
        }
    }
    if (dist[vb] == kInf) {
        throw Error(ErrorKind::DisconnectedPair, "no path inside component " + std::to_string(graph.component_id));
    }
    DistanceResult r;
    r.value = dist[vb];
    for (std::int32_t v = vb; v >= 0; v = pred[v]) r.path.push_back(graph.vertices[v]);
    std::reverse(r.path.begin(), r.path.end());
    r.lower_bound = r.value / 4.0;
    r.upper_bound = r.value;
    return r;
}

std::vector<double> single_source_distances(const MetricGraph& graph, std::int32_t source_vertex) {
    std::vector<double> dist(graph.vertex_count(), kInf);
    MinHeap heap;
    dist[source_vertex] = 0.0;
    heap.emplace(0.0, source_vertex);
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        for (std::int64_t e = graph.offsets[v]; e < graph.offsets[v + 1]; ++e) {
            const std::int32_t t = graph.targets[e];
            const double nd = d + graph.weights[e];
            if (nd < dist[t]) {
                dist[t] = nd;
                heap.emplace(nd, t);
            }
        }
    }
    return dist;
}

SchwarzPickReport schwarz_pick_disk(const RationalMap& map, std::span<const std::pair<cplx, cplx>> pairs, double tol) {
    SchwarzPickReport rep;
    for (const auto& [a, b] : pairs) {
        if (!(std::abs(a) < 1.0) || !(std::abs(b) < 1.0)) { ++rep.skipped; continue; }
        const ComplexPoint fa = map.evaluate(ComplexPoint::from_z(a));
        const ComplexPoint fb = map.evaluate(ComplexPoint::from_z(b));
        if (fa.chart != Chart::Z || fb.chart != Chart::Z || !(std::abs(fa.coord()) < 1.0) ||
            !(std::abs(fb.coord()) < 1.0)) {
            ++rep.skipped;
            continue;
        }
        const double d = disk_reference_distance(a, b);
        const double d_img = disk_reference_distance(fa.coord(), fb.coord());
        ++rep.pairs;
        if (d_img > d + tol) ++rep.violations;
        if (d > 0.0) rep.max_ratio = std::max(rep.max_ratio, d_img / d);
        rep.max_abs_gap = std::max(rep.max_abs_gap, std::abs(d_img - d));
    }
    return rep;
}

SchwarzPickReport schwarz_pick_surrogate(const RationalMap& map, const SphereGrid& grid,
                                         std::span<const std::pair<ComplexPoint, ComplexPoint>> pairs) {
    SchwarzPickReport rep;
    std::map<int, MetricGraph> graphs;
    auto graph_for = [&](int comp) -> const MetricGraph* {
        auto it = graphs.find(comp);
        if (it == graphs.end()) {
            try {
                it = graphs.emplace(comp, build_metric_graph(grid, comp)).first;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::DegenerateComponent) throw;
                return nullptr;
            }
        }
        return &it->second;
    };
    auto find = [&](const ComplexPoint& p, Location& out) {
        try {
            out = locate(grid, p);
            return true;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::NotInBasin) throw;
            return false;
        }
    };
    const double per_hop = 4.0 / grid.resolution();
    for (const auto& [a, b] : pairs) {
        Location la{}, lb{}, lfa{}, lfb{};
        if (!find(a, la) || !find(b, lb) || la.component != lb.component || la.cell == lb.cell) {
            ++rep.skipped;
            continue;
        }
        if (!find(map.evaluate(a), lfa) || !find(map.evaluate(b), lfb) || lfa.component != lfb.component) {
            ++rep.skipped;
            continue;
        }
        const MetricGraph* g = graph_for(la.component);
        const MetricGraph* gi = graph_for(lfa.component);
        if (g == nullptr || gi == nullptr) {
            ++rep.skipped;
            continue;
        }
        const DistanceResult d = quasihyperbolic_distance(*g, grid, la.cell, lb.cell);
        const double d_img = lfa.cell == lfb.cell ? 0.0 : quasihyperbolic_distance(*gi, grid, lfa.cell, lfb.cell).value;
        ++rep.pairs;
        if (d_img > d.value * (1.0 + per_hop * d.hops())) ++rep.violations;
        if (d.value > 0.0) rep.max_ratio = std::max(rep.max_ratio, d_img / d.value);
        rep.max_abs_gap = std::max(rep.max_abs_gap, std::abs(d_img - d.value));
    }
    return rep;
}

}  // namespace bml
