#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bml/metric.hpp"
#include "bml/rational_map.hpp"
#include "bml/sphere_grid.hpp"

namespace bml {

struct OrbitNode {
    ComplexPoint point;
    int depth = 0;
    std::int32_t parent = -1;  ///< -1 for the root
    CellId cell = -1;          ///< owned cell containing the point
    int component_id = 0;
    double residual = 0.0;     ///< spherical distance from R(point) to the parent
};

struct LevelStats {
    int depth = 0;
    std::size_t candidates = 0;  ///< preimages counted with multiplicity
    std::size_t outside = 0;     ///< discarded, not in the basin raster
    std::size_t duplicates = 0;  ///< discarded, within 1e-8 of a kept node
    std::size_t kept = 0;
};

/// Backward orbit of a base point restricted to the basin, in breadth-first
/// order: nodes of depth k precede those of depth k+1 and each level is sorted
/// by (chart, re, im).
struct OrbitTree {
    ComplexPoint base;
    int depth_max = 0;
    int effective_depth = 0;  ///< last complete level
    bool truncated = false;   ///< the node budget stopped expansion early
    std::vector<OrbitNode> nodes;
    std::vector<LevelStats> levels;  ///< index = depth, for depths 1..effective_depth

    std::size_t count_at_depth(int depth) const;
};

inline constexpr double kDedupTolerance = 1e-8;

/// Throws BaseNotInBasin, or InvalidArgument unless 1 <= depth_max <= 24.
/// Exceeding node_budget is not an error: the last complete level is kept and
/// `truncated` is set.
OrbitTree build_backward_tree(const RationalMap& map, const ComplexPoint& base, int depth_max, const SphereGrid& grid,
                              std::size_t node_budget = 2'000'000, int threads = 0);

struct TreeCheck {
    std::size_t nodes = 0;
    std::size_t residual_violations = 0;  ///< residual above 1e-8
    std::size_t duplicate_pairs = 0;      ///< pairs within 1e-8
    std::size_t tag_mismatches = 0;       ///< component differs from locate()
    double max_residual = 0.0;

    bool ok() const { return residual_violations == 0 && duplicate_pairs == 0 && tag_mismatches == 0; }
};

TreeCheck verify_tree(const OrbitTree& tree, const RationalMap& map, const SphereGrid& grid);

/// Tree nodes seen from one component graph: per vertex, the shallowest node
/// it hosts (lowest index on ties), or -1.
struct OrbitIndex {
    int component_id = 0;
    std::vector<std::int32_t> node_at_vertex;
    int min_depth = -1;  ///< shallowest depth present, -1 when there is none
};

OrbitIndex index_tree(const OrbitTree& tree, const MetricGraph& graph, const SphereGrid& grid);

/// For every K in [0, max_depth], the graph distance from a source vertex to
/// the nearest node of depth <= K, from one Dijkstra run. Ties prefer lower
/// depth, then lower cell index. Unresolved depths hold infinity and node -1.
struct DepthMinima {
    std::vector<double> distance;
    std::vector<std::int32_t> node;
};

DepthMinima nearest_by_depth(const OrbitTree& tree, const MetricGraph& graph, const OrbitIndex& index,
                             std::int32_t source_vertex, int max_depth);

struct NearestResult {
    std::int32_t node = -1;
    DistanceResult distance;
};

/// Nearest tree node to z0 inside z0's component, with the path.
/// Throws NotInBasin, InvalidArgument when z0 lies outside the graph's
/// component, NoOrbitNodeInComponent when the component hosts no node.
NearestResult nearest_orbit_point(const ComplexPoint& z0, const OrbitTree& tree, const MetricGraph& graph,
                                  const SphereGrid& grid);

/// CSV: version line, header, one row per node.
void write_tree_csv(std::ostream& out, const OrbitTree& tree);

}  // namespace bml
