#include "bml/sphere_grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "bml/error.hpp"
#include "bml/parallel.hpp"

namespace bml {
namespace {

constexpr std::pair<int, int> kKing[] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
constexpr std::pair<int, int> kSixteen[] = {{1, 0},  {-1, 0}, {0, 1},  {0, -1}, {1, 1},   {1, -1},  {-1, 1},  {-1, -1},
                                            {1, 2},  {2, 1},  {-1, 2}, {-2, 1}, {1, -2},  {2, -1},  {-1, -2}, {-2, -1}};

double chord2(const Homogeneous& a, const Homogeneous& b) {
    const double num = std::norm(a.x * b.y - b.x * a.y);
    return 4.0 * num / ((std::norm(a.x) + std::norm(a.y)) * (std::norm(b.x) + std::norm(b.y)));
}

Homogeneous normalized(Homogeneous h) {
    const double s = std::max(std::abs(h.x), std::abs(h.y));
    if (s > 0.0 && std::isfinite(s)) {
        h.x /= s;
        h.y /= s;
    }
    return h;
}

struct DisjointSet {
    std::vector<CellId> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    CellId find(CellId a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(CellId a, CellId b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

// Felzenszwalb-Huttenlocher lower envelope of parabolas on one line; arg
// receives the index of the minimising sample.
void edt_line(const double* f, int n, double* d, int* arg, int* v, double* z) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    auto intersect = [&](int q, int r) {
        return ((f[q] + double(q) * q) - (f[r] + double(r) * r)) / (2.0 * (q - r));
    };
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        double s = intersect(q, v[k]);
        while (s <= z[k]) {
            --k;
            s = intersect(q, v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = double(q) - v[k];
        d[q] = dq * dq + f[v[k]];
        arg[q] = v[k];
    }
}

}  // namespace

// Nearest seed (raster index) of every cell of a res x res raster, -1 when
// there is no seed at all.
std::vector<std::int32_t> nearest_seed(std::span<const std::uint8_t> seed, int res) {
    constexpr double kBig = 1e30;
    const std::size_t n = static_cast<std::size_t>(res) * res;
    std::vector<double> col(n, kBig);
    std::vector<std::int32_t> col_row(n, -1);
    std::vector<double> f(res), d(res), z(res + 1);
    std::vector<int> v(res), arg(res);
    for (int x = 0; x < res; ++x) {
        bool any = false;
        for (int y = 0; y < res; ++y) {
            f[y] = seed[static_cast<std::size_t>(y) * res + x] ? 0.0 : kBig;
            any = any || f[y] == 0.0;
        }
        if (!any) continue;
        edt_line(f.data(), res, d.data(), arg.data(), v.data(), z.data());
        for (int y = 0; y < res; ++y) {
            col[static_cast<std::size_t>(y) * res + x] = d[y];
            col_row[static_cast<std::size_t>(y) * res + x] = arg[y];
        }
    }
    std::vector<std::int32_t> out(n, -1);
    for (int y = 0; y < res; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * res;
        bool any = false;
        for (int x = 0; x < res; ++x) {
            f[x] = col[row + x];
            any = any || f[x] < kBig;
        }
        if (!any) continue;
        edt_line(f.data(), res, d.data(), arg.data(), v.data(), z.data());
        for (int x = 0; x < res; ++x) {
            const int fx = arg[x];
            out[row + x] = col_row[row + fx] * res + fx;
        }
    }
    return out;
}

std::span<const std::pair<int, int>> king_offsets() { return kKing; }
std::span<const std::pair<int, int>> sixteen_offsets() { return kSixteen; }

void GridSpec::validate() const {
    if (resolution < 64 || resolution > 8192) {
        throw Error(ErrorKind::ValidationError, "resolution must lie in [64, 8192]");
    }
    if (!(epsilon_attract > 0.0 && epsilon_attract < 0.1)) {
        throw Error(ErrorKind::ValidationError, "epsilon_attract must lie in (0, 0.1)");
    }
    if (max_iter < 50 || max_iter > 100000) {
        throw Error(ErrorKind::ValidationError, "max_iter must lie in [50, 100000]");
    }
    if (chart_extent != 1.5) throw Error(ErrorKind::ValidationError, "chart_extent is fixed at 1.5");
}

SphereGrid::SphereGrid(const GridSpec& spec, const ComplexPoint& attracting_point)
    : spec_(spec), pitch_(spec.pitch()), attracting_(attracting_point.canonical()) {
    spec_.validate();
    const int res = spec_.resolution;
    const std::size_t n = 2 * static_cast<std::size_t>(res) * res;
    owned_.assign(n, 0);
    rep_.assign(n, -1);
    member_.assign(n, 0);
    for (CellId id = 0; id < static_cast<CellId>(n); ++id) {
        const CellCoord cc = coord(id);
        const double r = std::abs(center(id));
        owned_[id] = cc.chart == Chart::Z ? (r <= 1.0) : (r < 1.0);
        if (owned_[id]) rep_[id] = id;
    }
    // A non-owned cell stands for the closest owned cell around its center in the other chart.
    for (CellId id = 0; id < static_cast<CellId>(n); ++id) {
        if (owned_[id]) continue;
        const CellCoord cc = coord(id);
        const cplx c = center(id);
        const ComplexPoint here{c.real(), c.imag(), cc.chart};
        const Chart target = other(cc.chart);
        const CellId base = raster_cell(target, 1.0 / c);
        const CellCoord bc = coord(base);
        double best = std::numeric_limits<double>::infinity();
        for (int radius = 1; radius <= 3 && rep_[id] < 0; ++radius) {
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int x = bc.ix + dx, y = bc.iy + dy;
                    if (x < 0 || y < 0 || x >= res || y >= res) continue;
                    const CellId cand = cell_id(target, x, y);
                    if (!owned_[cand]) continue;
                    const double dist = chordal_distance(here, center_point(cand));
                    if (dist < best) {
                        best = dist;
                        rep_[id] = cand;
                    }
                }
            }
        }
    }
}

CellId SphereGrid::cell_id(Chart chart, int ix, int iy) const {
    const int res = spec_.resolution;
    return static_cast<CellId>((static_cast<std::size_t>(chart) * res + iy) * res + ix);
}

CellCoord SphereGrid::coord(CellId cell) const {
    const int res = spec_.resolution;
    const std::size_t per_chart = static_cast<std::size_t>(res) * res;
    const auto chart = static_cast<Chart>(cell / per_chart);
    const std::size_t rem = cell % per_chart;
    return {chart, static_cast<int>(rem % res), static_cast<int>(rem / res)};
}

cplx SphereGrid::center(CellId cell) const {
    const CellCoord c = coord(cell);
    return {-spec_.chart_extent + (c.ix + 0.5) * pitch_, -spec_.chart_extent + (c.iy + 0.5) * pitch_};
}

ComplexPoint SphereGrid::center_point(CellId cell) const {
    const cplx c = center(cell);
    return {c.real(), c.imag(), coord(cell).chart};
}

CellId SphereGrid::raster_cell(Chart chart, cplx c) const {
    const int res = spec_.resolution;
    auto index = [&](double v) {
        const double t = std::floor((v + spec_.chart_extent) / pitch_);
        return static_cast<int>(std::clamp(t, 0.0, static_cast<double>(res - 1)));
    };
    return cell_id(chart, index(c.real()), index(c.imag()));
}

CellId SphereGrid::owning_cell(const ComplexPoint& p) const {
    const ComplexPoint c = p.canonical();
    return rep_[raster_cell(c.chart, c.coord())];
}

std::size_t SphereGrid::member_count_all() const {
    return static_cast<std::size_t>(std::count(member_.begin(), member_.end(), std::uint8_t{1}));
}

std::size_t SphereGrid::member_count_owned() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < member_.size(); ++i) n += (member_[i] && owned_[i]);
    return n;
}

std::vector<CellId> SphereGrid::component_cells(int component_id) const {
    if (component_id < 1 || component_id > component_count_) {
        throw Error(ErrorKind::NoSuchComponent, "component " + std::to_string(component_id));
    }
    std::vector<CellId> out;
    out.reserve(static_cast<std::size_t>(component_sizes_[component_id]));
    for (CellId id = 0; id < static_cast<CellId>(cell_count()); ++id) {
        if (owned_[id] && component_[id] == component_id) out.push_back(id);
    }
    return out;
}

double SphereGrid::boundary_distance(CellId cell) const {
    if (!member(cell)) throw Error(ErrorKind::NotInBasin, "boundary distance queried on a non-member cell");
    if (!has_distance()) throw Error(ErrorKind::InvalidArgument, "boundary distance not computed");
    return boundary_sph_[cell];
}

double SphereGrid::boundary_distance_chart(CellId cell) const {
    return boundary_distance(cell) / chart_factor(center(rep_[cell]));
}

double SphereGrid::boundary_distance_cells(CellId cell) const {
    return boundary_distance_chart(cell) / pitch_ + 0.5;
}

void SphereGrid::sync_views() {
    for (std::size_t i = 0; i < member_.size(); ++i) {
        if (!owned_[i]) member_[i] = member_[rep_[i]];
    }
}

SphereGrid compute_basin(const RationalMap& map, const ComplexPoint& p, const GridSpec& spec, int threads) {
    spec.validate();
    map.require_dynamical();
    const ComplexPoint target = p.canonical();
    const cplx lambda = multiplier(map, target);
    if (std::abs(lambda) >= 1.0) {
        throw Error(ErrorKind::NotAttracting, to_string(target) + " has |multiplier| = " + std::to_string(std::abs(lambda)));
    }

    // Orbits captured by another attracting fixed point can never reach p.
    std::vector<Homogeneous> rivals;
    for (const FixedPointInfo& fp : fixed_points(map)) {
        if (std::abs(fp.multiplier) < 1.0 && spherical_distance(fp.location, target) > 1e-6) {
            rivals.push_back(fp.location.homogeneous());
        }
    }

    SphereGrid grid(spec, target);
    const double capture = std::pow(2.0 * std::sin(0.5 * spec.epsilon_attract), 2);
    const Homogeneous goal = target.homogeneous();
    const std::size_t n = grid.cell_count();
    parallel_for(n, threads, [&](std::size_t i) {
        const auto id = static_cast<CellId>(i);
        if (!grid.owned(id)) return;
        Homogeneous h = grid.center_point(id).homogeneous();
        for (int it = 0; it <= spec.max_iter; ++it) {
            if (chord2(h, goal) <= capture) {
                grid.member_[id] = 1;
                return;
            }
            for (const Homogeneous& r : rivals) {
                if (chord2(h, r) <= capture) return;
            }
            h = normalized(map.evaluate_homogeneous(h));
        }
    });

    if (std::abs(lambda) <= 1e-9) {
        // Distance estimate s log(1/s) / |(R^n)'| in the spherical metric, with
        // s the distance of the orbit to p; the Boettcher analogue of G / |grad G|.
        // Cells it places within one pitch of the Julia set stop being members.
        const double h = grid.pitch();
        parallel_for(n, threads, [&](std::size_t i) {
            const auto id = static_cast<CellId>(i);
            if (!grid.owned(id) || !grid.member_[id]) return;
            const cplx c = grid.center(id);
            Homogeneous z = grid.center_point(id).homogeneous();
            double deriv = 1.0;
            double s = std::sqrt(chord2(z, goal));
            for (int it = 0; it < spec.max_iter + 64 && s > 1e-8 && deriv > 0.0; ++it) {
                deriv *= map.spherical_derivative(z);
                z = normalized(map.evaluate_homogeneous(z));
                s = std::sqrt(chord2(z, goal));
            }
            if (s > 1e-8 || deriv == 0.0 || s == 0.0) {
                if (s > 1e-8 && deriv > 0.0) grid.member_[id] = 0;
                return;
            }
            const double estimate = s * std::log(1.0 / s) / deriv;
            if (estimate < h * chart_factor(c)) grid.member_[id] = 0;
        });
    }
    grid.sync_views();
    return grid;
}

Labeling label_mask(const SphereGrid& g, std::span<const std::uint8_t> mask, CellId anchor) {
    const std::size_t n = g.cell_count();
    DisjointSet sets(n);
    for (CellId id = 0; id < static_cast<CellId>(n); ++id) {
        if (!g.owned(id) || !mask[id]) continue;
        g.for_each_neighbor(id, king_offsets(), [&](CellId nb, int, int) {
            if (mask[nb]) sets.unite(id, nb);
        });
    }
    struct Group {
        CellId root;
        std::int64_t size;
        CellId first;
    };
    std::vector<std::int32_t> slot(n, -1);
    std::vector<Group> groups;
    for (CellId id = 0; id < static_cast<CellId>(n); ++id) {
        if (!g.owned(id) || !mask[id]) continue;
        const CellId r = sets.find(id);
        if (slot[r] < 0) {
            slot[r] = static_cast<std::int32_t>(groups.size());
            groups.push_back({r, 0, id});
        }
        ++groups[slot[r]].size;
    }
    const CellId anchor_root = (anchor >= 0 && mask[anchor]) ? sets.find(anchor) : -1;
    std::sort(groups.begin(), groups.end(), [&](const Group& a, const Group& b) {
        if ((a.root == anchor_root) != (b.root == anchor_root)) return a.root == anchor_root;
        if (a.size != b.size) return a.size > b.size;
        return a.first < b.first;
    });
    Labeling out;
    out.count = static_cast<int>(groups.size());
    out.sizes.assign(groups.size() + 1, 0);
    for (std::size_t k = 0; k < groups.size(); ++k) {
        slot[groups[k].root] = static_cast<std::int32_t>(k + 1);
        out.sizes[k + 1] = groups[k].size;
    }
    out.label.assign(n, 0);
    for (CellId id = 0; id < static_cast<CellId>(n); ++id) {
        const CellId owner = g.representative(id);
        if (mask[owner]) out.label[id] = slot[sets.find(owner)];
    }
    return out;
}

SphereGrid label_components(SphereGrid grid) {
    const CellId anchor = grid.owning_cell(grid.attracting_);
    if (!grid.member(anchor)) {
        throw Error(ErrorKind::AttractorNotMember,
                    "the cell of " + to_string(grid.attracting_) + " is not a member; check epsilon_attract/max_iter");
    }
    Labeling lab = label_mask(grid, grid.member_, anchor);
    grid.component_ = std::move(lab.label);
    grid.component_sizes_ = std::move(lab.sizes);
    grid.component_count_ = lab.count;
    return grid;
}

SphereGrid boundary_distance(SphereGrid grid) {
    const int res = grid.resolution();
    const std::size_t per_chart = static_cast<std::size_t>(res) * res;
    const double h = grid.pitch();
    const double extent = grid.spec().chart_extent;
    constexpr double kInf = std::numeric_limits<double>::infinity();

    // Seeds: every non-member cell, plus each owned non-member center projected
    // into the other chart, so thin features survive the many-to-one views.
    std::vector<std::uint8_t> blocked(grid.cell_count(), 0);
    for (CellId id = 0; id < static_cast<CellId>(grid.cell_count()); ++id) {
        if (grid.member_[id]) continue;
        blocked[id] = 1;
        if (!grid.owned(id)) continue;
        const cplx c = grid.center(id);
        if (c == cplx(0.0, 0.0)) continue;
        const cplx alt = 1.0 / c;
        if (std::max(std::abs(alt.real()), std::abs(alt.imag())) >= extent) continue;
        const CellId view = grid.raster_cell(other(grid.coord(id).chart), alt);
        if (!grid.owned(view)) blocked[view] = 1;
    }
    std::vector<CellId> feature(grid.cell_count(), -1);
    for (int chart = 0; chart < 2; ++chart) {
        const std::vector<std::uint8_t> seed(blocked.begin() + chart * per_chart,
                                             blocked.begin() + (chart + 1) * per_chart);
        const std::vector<std::int32_t> near = nearest_seed(seed, res);
        for (std::size_t k = 0; k < per_chart; ++k) {
            if (near[k] >= 0) feature[chart * per_chart + k] = static_cast<CellId>(chart * per_chart + near[k]);
        }
    }

    // Distance in the coordinates of `chart` from x to the basin boundary, which
    // sits half a pitch beyond the nearest blocked center. Candidates are the
    // nearest blocked cell of this raster and that of the other raster, whose
    // center is carried over by w = 1/z.
    auto chart_distance = [&](Chart chart, cplx x) {
        double best = kInf;
        const CellId here = grid.raster_cell(chart, x);
        if (feature[here] >= 0) best = std::abs(grid.center(feature[here]) - x) - 0.5 * h;
        if (x != cplx(0.0, 0.0)) {
            const cplx alt = 1.0 / x;
            if (std::max(std::abs(alt.real()), std::abs(alt.imag())) < extent) {
                const CellId there = feature[grid.raster_cell(other(chart), alt)];
                const cplx y = there >= 0 ? grid.center(there) : cplx(0.0, 0.0);
                if (there >= 0 && y != cplx(0.0, 0.0)) best = std::min(best, std::abs(1.0 / y - x) - 0.5 * h / std::norm(y));
            }
        }
        return std::max(best, 0.5 * h);
    };

    // The owning chart decides; on 0.9 <= |c| <= 1 it is blended linearly with
    // the other chart so the field is continuous across the seam.
    constexpr double kBlendStart = 0.9;
    grid.boundary_sph_.assign(grid.cell_count(), 0.0);
    for (CellId id = 0; id < static_cast<CellId>(grid.cell_count()); ++id) {
        if (!grid.owned(id) || !grid.member_[id]) continue;
        const Chart chart = grid.coord(id).chart;
        const cplx c = grid.center(id);
        double delta = chart_distance(chart, c) * chart_factor(c);
        const double r = std::abs(c);
        if (r > kBlendStart && std::isfinite(delta)) {
            const cplx alt = 1.0 / c;
            const double other_delta = chart_distance(other(chart), alt) * chart_factor(alt);
            if (std::isfinite(other_delta)) {
                const double own = 1.0 - 0.5 * std::min(1.0, (r - kBlendStart) / (1.0 - kBlendStart));
                delta = own * delta + (1.0 - own) * other_delta;
            }
        }
        if (!std::isfinite(delta)) delta = std::numbers::pi;
        grid.boundary_sph_[id] = delta;
    }
    for (CellId id = 0; id < static_cast<CellId>(grid.cell_count()); ++id) {
        if (!grid.owned(id)) grid.boundary_sph_[id] = grid.boundary_sph_[grid.rep_[id]];
    }
    return grid;
}

SphereGrid build_basin_grid(const RationalMap& map, const ComplexPoint& p, const GridSpec& spec, int threads) {
    return boundary_distance(label_components(compute_basin(map, p, spec, threads)));
}

SphereGrid restrict_membership(const SphereGrid& grid, const std::function<bool(const ComplexPoint&)>& keep) {
    SphereGrid out = grid;
    for (CellId id = 0; id < static_cast<CellId>(out.cell_count()); ++id) {
        if (out.owned(id) && out.member_[id] && !keep(out.center_point(id))) out.member_[id] = 0;
    }
    out.sync_views();
    out.component_.clear();
    out.component_sizes_.clear();
    out.component_count_ = 0;
    out.boundary_sph_.clear();
    return out;
}

SphereGrid grid_from_membership(const GridSpec& spec, const ComplexPoint& anchor,
                                const std::function<bool(const ComplexPoint&)>& inside) {
    SphereGrid grid(spec, anchor);
    for (CellId id = 0; id < static_cast<CellId>(grid.cell_count()); ++id) {
        if (grid.owned(id)) grid.member_[id] = inside(grid.center_point(id)) ? 1 : 0;
    }
    grid.sync_views();
    return grid;
}

Location locate(const SphereGrid& grid, const ComplexPoint& z) {
    const CellId cell = grid.owning_cell(z);
    if (!grid.member(cell)) throw Error(ErrorKind::NotInBasin, to_string(z.canonical()) + " is not in the basin raster");
    return {cell, grid.component(cell)};
}

double member_area_chart(const SphereGrid& grid, Chart chart) {
    const int res = grid.resolution();
    std::size_t count = 0;
    for (int iy = 0; iy < res; ++iy)
        for (int ix = 0; ix < res; ++ix) count += grid.member(grid.cell_id(chart, ix, iy));
    return static_cast<double>(count) * grid.pitch() * grid.pitch();
}

double member_sphere_fraction(const SphereGrid& grid) {
    double area = 0.0;
    const double h = grid.pitch();
    for (CellId id = 0; id < static_cast<CellId>(grid.cell_count()); ++id) {
        if (!grid.owned(id) || !grid.member(id)) continue;
        const double f = chart_factor(grid.center(id));
        area += f * f * h * h;
    }
    return area / (4.0 * std::numbers::pi);
}

}  // namespace bml
