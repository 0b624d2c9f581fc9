#include "bml/orbit_tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>
#include <unordered_map>

#include "bml/error.hpp"
#include "bml/io_format.hpp"
#include "bml/parallel.hpp"

namespace bml {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Buckets of the embedded sphere, side 1e-7; a point within the dedup
// tolerance of another lies in one of the 27 surrounding buckets.
class SpatialHash {
public:
    static constexpr double kSide = 1e-7;

    void insert(const std::array<double, 3>& p, std::int32_t id) {
        const std::uint64_t key = key_of(bucket(p));
        if (static_cast<std::size_t>(id) >= next_.size()) next_.resize(static_cast<std::size_t>(id) + 1, -1);
        auto [it, fresh] = head_.try_emplace(key, id);
        if (!fresh) {
            next_[id] = it->second;
            it->second = id;
        }
    }

    // Visits ids stored in the neighbourhood of p until f returns true.
    template <typename F>
    bool any_near(const std::array<double, 3>& p, F&& f) const {
        const auto b = bucket(p);
        for (int dx = -1; dx <= 1; ++dx)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dz = -1; dz <= 1; ++dz) {
                    const auto it = head_.find(key_of({b[0] + dx, b[1] + dy, b[2] + dz}));
                    if (it == head_.end()) continue;
                    for (std::int32_t id = it->second; id >= 0; id = next_[id])
                        if (f(id)) return true;
                }
        return false;
    }

private:
    static std::array<std::int64_t, 3> bucket(const std::array<double, 3>& p) {
        return {static_cast<std::int64_t>(std::floor(p[0] / kSide)), static_cast<std::int64_t>(std::floor(p[1] / kSide)),
                static_cast<std::int64_t>(std::floor(p[2] / kSide))};
    }
    static std::uint64_t key_of(const std::array<std::int64_t, 3>& b) {
        std::uint64_t h = 0x9E3779B97F4A7C15ull;
        for (std::int64_t v : b) {
            h ^= static_cast<std::uint64_t>(v) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
            h *= 0xBF58476D1CE4E5B9ull;
        }
        return h;
    }

    std::unordered_map<std::uint64_t, std::int32_t> head_;
    std::vector<std::int32_t> next_;
};

bool point_less(const ComplexPoint& a, const ComplexPoint& b) {
    if (a.chart != b.chart) return a.chart < b.chart;
    if (a.re != b.re) return a.re < b.re;
    return a.im < b.im;
}

using HeapEntry = std::pair<double, std::int32_t>;
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>>;

}  // namespace

std::size_t OrbitTree::count_at_depth(int depth) const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [depth](const OrbitNode& n) { return n.depth == depth; }));
}

OrbitTree build_backward_tree(const RationalMap& map, const ComplexPoint& base, int depth_max, const SphereGrid& grid,
                              std::size_t node_budget, int threads) {
    if (depth_max < 1 || depth_max > 24) throw Error(ErrorKind::InvalidArgument, "tree depth must lie in [1, 24]");
    map.require_dynamical();
    OrbitTree tree;
    tree.base = base.canonical();
    tree.depth_max = depth_max;
    Location root;
    try {
        root = locate(grid, tree.base);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NotInBasin) throw;
        throw Error(ErrorKind::BaseNotInBasin, to_string(tree.base) + " is not in the basin raster");
    }
    tree.nodes.push_back({tree.base, 0, -1, root.cell, root.component, 0.0});
    tree.levels.push_back({});

    SpatialHash hash;
    hash.insert(to_sphere(tree.base), 0);

    struct Candidate {
        ComplexPoint point;
        std::int32_t parent;
        int multiplicity;
    };
    std::size_t level_begin = 0;
    for (int depth = 1; depth <= depth_max; ++depth) {
        const std::size_t level_end = tree.nodes.size();
        const std::size_t parents = level_end - level_begin;
        std::vector<std::vector<Preimage>> found(parents);
        parallel_for(parents, threads, [&](std::size_t i) { found[i] = preimages(map, tree.nodes[level_begin + i].point); });

        LevelStats stats;
        stats.depth = depth;
        std::vector<Candidate> cands;
        for (std::size_t i = 0; i < parents; ++i) {
            for (const Preimage& q : found[i]) {
                stats.candidates += static_cast<std::size_t>(q.multiplicity);
                cands.push_back({q.point.canonical(), static_cast<std::int32_t>(level_begin + i), q.multiplicity});
            }
        }
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Candidate& a, const Candidate& b) { return point_less(a.point, b.point); });

        // Kept nodes of this level are hashed separately so the budget check
        // can drop the whole level without touching the tree.
        std::vector<OrbitNode> unique;
        std::vector<std::array<double, 3>> unique_xyz;
        SpatialHash level_hash;
        for (const Candidate& c : cands) {
            const CellId cell = grid.owning_cell(c.point);
            if (!grid.member(cell)) {
                stats.outside += static_cast<std::size_t>(c.multiplicity);
                continue;
            }
            const auto xyz = to_sphere(c.point);
            const bool dup =
                hash.any_near(xyz, [&](std::int32_t id) {
                    return spherical_distance(tree.nodes[id].point, c.point) <= kDedupTolerance;
                }) ||
                level_hash.any_near(xyz, [&](std::int32_t id) {
                    return spherical_distance(unique[id].point, c.point) <= kDedupTolerance;
                });
            if (dup) {
                stats.duplicates += static_cast<std::size_t>(c.multiplicity);
                continue;
            }
            level_hash.insert(xyz, static_cast<std::int32_t>(unique.size()));
            unique.push_back({c.point, depth, c.parent, cell, grid.component(cell),
                              spherical_distance(map.evaluate(c.point), tree.nodes[c.parent].point)});
            unique_xyz.push_back(xyz);
        }
        if (tree.nodes.size() + unique.size() > node_budget) {
            tree.truncated = true;
            break;
        }
        stats.kept = unique.size();
        for (std::size_t k = 0; k < unique.size(); ++k) {
            hash.insert(unique_xyz[k], static_cast<std::int32_t>(tree.nodes.size()));
            tree.nodes.push_back(unique[k]);
        }
        tree.levels.push_back(stats);
        tree.effective_depth = depth;
        level_begin = level_end;
        if (unique.empty()) {
            // Nothing left to expand; deeper levels stay empty.
            for (int d = depth + 1; d <= depth_max; ++d) tree.levels.push_back({d, 0, 0, 0, 0});
            tree.effective_depth = depth_max;
            break;
        }
    }
    return tree;
}

TreeCheck verify_tree(const OrbitTree& tree, const RationalMap& map, const SphereGrid& grid) {
    TreeCheck check;
    check.nodes = tree.nodes.size();
    SpatialHash hash;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const OrbitNode& n = tree.nodes[i];
        if (n.parent >= 0) {
            const double r = spherical_distance(map.evaluate(n.point), tree.nodes[n.parent].point);
            check.max_residual = std::max(check.max_residual, r);
            if (!(r <= kDedupTolerance)) ++check.residual_violations;
        }
        const auto xyz = to_sphere(n.point);
        hash.any_near(xyz, [&](std::int32_t id) {
            if (spherical_distance(tree.nodes[id].point, n.point) <= kDedupTolerance) ++check.duplicate_pairs;
            return false;
        });
        hash.insert(xyz, static_cast<std::int32_t>(i));
        const CellId cell = grid.owning_cell(n.point);
        if (!grid.member(cell) || grid.component(cell) != n.component_id || cell != n.cell) ++check.tag_mismatches;
    }
    return check;
}

OrbitIndex index_tree(const OrbitTree& tree, const MetricGraph& graph, const SphereGrid& grid) {
    OrbitIndex index;
    index.component_id = graph.component_id;
    index.node_at_vertex.assign(graph.vertex_count(), -1);
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const OrbitNode& n = tree.nodes[i];
        if (n.component_id != graph.component_id) continue;
        const std::int32_t v = graph.vertex_of(grid, n.cell);
        if (v < 0) continue;
        // breadth-first storage: the first node seen is the shallowest
        if (index.node_at_vertex[v] < 0) index.node_at_vertex[v] = static_cast<std::int32_t>(i);
        if (index.min_depth < 0 || n.depth < index.min_depth) index.min_depth = n.depth;
    }
    return index;
}

DepthMinima nearest_by_depth(const OrbitTree& tree, const MetricGraph& graph, const OrbitIndex& index,
                             std::int32_t source_vertex, int max_depth) {
    DepthMinima out;
    out.distance.assign(static_cast<std::size_t>(max_depth) + 1, kInf);
    out.node.assign(static_cast<std::size_t>(max_depth) + 1, -1);
    if (index.min_depth < 0 || index.min_depth > max_depth) return out;

    auto better = [&](std::int32_t a, std::int32_t b) {
        const OrbitNode& na = tree.nodes[a];
        const OrbitNode& nb = tree.nodes[b];
        if (na.depth != nb.depth) return na.depth < nb.depth;
        return na.cell < nb.cell;
    };
    const auto first = static_cast<std::size_t>(index.min_depth);
    std::vector<double> dist(graph.vertex_count(), kInf);
    MinHeap heap;
    dist[source_vertex] = 0.0;
    heap.emplace(0.0, source_vertex);
    while (!heap.empty()) {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        // Every depth is settled once the shallowest one is and d has moved past it.
        if (out.node[first] >= 0 && d > out.distance[first]) break;
        const std::int32_t hosted = index.node_at_vertex[v];
        if (hosted >= 0) {
            for (auto k = static_cast<std::size_t>(tree.nodes[hosted].depth); k < out.node.size(); ++k) {
                if (out.node[k] < 0 || (out.distance[k] == d && better(hosted, out.node[k]))) {
                    out.node[k] = hosted;
                    out.distance[k] = d;
                }
            }
        }
        for (std::int64_t e = graph.offsets[v]; e < graph.offsets[v + 1]; ++e) {
            const std::int32_t t = graph.targets[e];
            const double nd = d + graph.weights[e];
            if (nd < dist[t]) {
                dist[t] = nd;
                heap.emplace(nd, t);
            }
        }
    }
    return out;
}

NearestResult nearest_orbit_point(const ComplexPoint& z0, const OrbitTree& tree, const MetricGraph& graph,
                                  const SphereGrid& grid) {
    const Location loc = locate(grid, z0);
    const std::int32_t source = graph.vertex_of(grid, loc.cell);
    if (source < 0) {
        throw Error(ErrorKind::InvalidArgument, to_string(z0.canonical()) + " is outside component " +
                                                    std::to_string(graph.component_id));
    }
    const OrbitIndex index = index_tree(tree, graph, grid);
    const DepthMinima all = nearest_by_depth(tree, graph, index, source, std::max(tree.effective_depth, 0));
    const std::int32_t node = all.node.back();
    if (node < 0) {
        throw Error(ErrorKind::NoOrbitNodeInComponent,
                    "component " + std::to_string(graph.component_id) + " hosts no tree node");
    }
    NearestResult r;
    r.node = node;
    r.distance = quasihyperbolic_distance(graph, grid, loc.cell, tree.nodes[node].cell);
    return r;
}

void write_tree_csv(std::ostream& out, const OrbitTree& tree) {
    out << kVersionLine << '\n' << "node_id,parent_id,depth,re,im,chart,component_id,residual\n";
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const OrbitNode& n = tree.nodes[i];
        out << i << ',' << n.parent << ',' << n.depth << ',' << format_real(n.point.re) << ','
            << format_real(n.point.im) << ',' << chart_letter(n.point.chart) << ',' << n.component_id << ','
            << format_real(n.residual) << '\n';
    }
}

}  // namespace bml
