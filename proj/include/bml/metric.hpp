#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bml/rational_map.hpp"
#include "bml/sphere_grid.hpp"

namespace bml {

/// Poincare distance on the unit disk, atanh(|z1 - z2| / |1 - conj(z1) z2|),
/// i.e. the length of the geodesic for the density 1 / (1 - |z|^2).
/// Throws OutOfDomain outside the open disk.
double disk_reference_distance(cplx z1, cplx z2);

/// Weighted graph on the owned cells of one component. Edges follow the
/// 16-neighbour stencil (knight moves only when both cells they pass are
/// members); weight = spherical edge length * mean of 1/boundary_dist at the
/// endpoints. Stored as CSR; vertices are in increasing cell order.
struct MetricGraph {
    int component_id = 0;
    std::vector<CellId> vertices;
    std::vector<std::int64_t> offsets;
    std::vector<std::int32_t> targets;
    std::vector<double> weights;
    std::vector<std::int32_t> vertex_index;  ///< per grid cell, -1 when not a vertex

    std::size_t vertex_count() const { return vertices.size(); }
    std::size_t edge_count() const { return targets.size(); }
    /// Vertex of a cell (any raster view of it); -1 when outside the component.
    std::int32_t vertex_of(const SphereGrid& grid, CellId cell) const;
};

/// Throws NoSuchComponent, or DegenerateComponent for a single-cell component.
MetricGraph build_metric_graph(const SphereGrid& grid, int component_id);

/// Surrogate distance with the path that realises it. The bracket is the one the
/// surrogate gives for the Kobayashi distance of a simply connected component:
/// lower = value / 4, upper = value.
struct DistanceResult {
    double value = 0.0;
    std::vector<CellId> path;
    double lower_bound = 0.0;
    double upper_bound = 0.0;

    std::size_t hops() const { return path.empty() ? 0 : path.size() - 1; }
};

/// Dijkstra with early exit at b. Throws InvalidArgument when a cell is not a
/// vertex, DisconnectedPair when b is unreachable.
DistanceResult quasihyperbolic_distance(const MetricGraph& graph, const SphereGrid& grid, CellId a, CellId b);

/// Distances from one vertex to every vertex (infinity when unreachable).
std::vector<double> single_source_distances(const MetricGraph& graph, std::int32_t source_vertex);

struct SchwarzPickReport {
    std::size_t pairs = 0;       ///< pairs actually compared
    std::size_t skipped = 0;     ///< pairs whose points or images were unusable
    std::size_t violations = 0;
    double max_ratio = 0.0;      ///< max d(f a, f b) / d(a, b)
    double max_abs_gap = 0.0;    ///< max |d(f a, f b) - d(a, b)|

    double violation_fraction() const { return pairs == 0 ? 0.0 : static_cast<double>(violations) / pairs; }
};

/// Exact check with the closed form: d(f a, f b) <= d(a, b) + tol for maps of
/// the disk into itself. Pairs with an image outside the disk are skipped.
SchwarzPickReport schwarz_pick_disk(const RationalMap& map, std::span<const std::pair<cplx, cplx>> pairs,
                                    double tol = 1e-12);

/// Advisory check on the grid surrogate: a pair violates when
/// d(f a, f b) > d(a, b) * (1 + 4 / resolution * hops) with hops the edge
/// count of the a-b path. Each side uses its own component graph.
SchwarzPickReport schwarz_pick_surrogate(const RationalMap& map, const SphereGrid& grid,
                                         std::span<const std::pair<ComplexPoint, ComplexPoint>> pairs);

}  // namespace bml
