#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bml/complex_point.hpp"
#include "bml/rational_map.hpp"

namespace bml {

/// Discretisation parameters for a basin raster.
struct GridSpec {
    int resolution = 512;          ///< cells per chart side
    double chart_extent = 1.5;     ///< each chart covers [-extent, extent]^2
    double epsilon_attract = 1e-3; ///< spherical capture radius around the attractor
    int max_iter = 2000;

    /// Throws ValidationError naming the violated bound.
    void validate() const;
    double pitch() const { return 2.0 * chart_extent / resolution; }
};

using CellId = std::int32_t;

struct CellCoord {
    Chart chart;
    int ix;
    int iy;
};

/// Two equal square rasters, one per chart, covering the sphere.
///
/// A cell is "owned" when its center lies in the canonical region of its chart
/// (|z| <= 1 for Z, |w| < 1 for W); owned cells partition the sphere. Every
/// other cell is a view onto the owned cell of the opposite chart that contains
/// its center (its representative), so membership, labels and distances agree
/// across the overlap by construction.
class SphereGrid {
public:
    SphereGrid() = default;
    SphereGrid(const GridSpec& spec, const ComplexPoint& attracting_point);

    const GridSpec& spec() const { return spec_; }
    int resolution() const { return spec_.resolution; }
    double pitch() const { return pitch_; }
    const ComplexPoint& attracting_point() const { return attracting_; }
    std::size_t cell_count() const { return owned_.size(); }

    CellId cell_id(Chart chart, int ix, int iy) const;
    CellCoord coord(CellId cell) const;
    cplx center(CellId cell) const;  ///< chart coordinate of the center
    ComplexPoint center_point(CellId cell) const;
    bool owned(CellId cell) const { return owned_[cell] != 0; }
    CellId representative(CellId cell) const { return rep_[cell]; }

    /// Raster cell of the given chart containing chart coordinate c (clamped).
    CellId raster_cell(Chart chart, cplx c) const;
    /// Owned cell containing the point.
    CellId owning_cell(const ComplexPoint& p) const;

    /// Visits the owned cells standing for the stencil neighbours of an owned cell.
    /// Offsets that leave the raster or resolve back to `cell` are skipped.
    template <typename F>
    void for_each_neighbor(CellId cell, std::span<const std::pair<int, int>> offsets, F&& f) const;

    bool member(CellId cell) const { return member_[cell] != 0; }
    std::size_t member_count_all() const;   ///< members over both full rasters
    std::size_t member_count_owned() const; ///< members over the owned partition

    bool labeled() const { return !component_.empty(); }
    int component(CellId cell) const { return labeled() ? component_[cell] : 0; }
    int component_count() const { return component_count_; }
    /// Owned member cells per label; index 0 unused.
    const std::vector<std::int64_t>& component_sizes() const { return component_sizes_; }
    /// Owned cells of one component in increasing cell order.
    std::vector<CellId> component_cells(int component_id) const;

    bool has_distance() const { return !boundary_sph_.empty(); }
    /// Spherical distance from the cell center to the basin boundary. NotInBasin for non-members.
    double boundary_distance(CellId cell) const;
    /// The same distance in chart units of the owning cell.
    double boundary_distance_chart(CellId cell) const;
    /// Distance to the nearest non-member cell center, in cells of the owning chart.
    double boundary_distance_cells(CellId cell) const;

    /// Raw per-cell arrays for renderers and bindings.
    std::span<const std::uint8_t> membership() const { return member_; }
    std::span<const std::int32_t> components() const { return component_; }

    // Module operations that fill the fields above.
    friend SphereGrid compute_basin(const RationalMap&, const ComplexPoint&, const GridSpec&, int);
    friend SphereGrid label_components(SphereGrid);
    friend SphereGrid boundary_distance(SphereGrid);
    friend SphereGrid restrict_membership(const SphereGrid&, const std::function<bool(const ComplexPoint&)>&);
    friend SphereGrid grid_from_membership(const GridSpec&, const ComplexPoint&,
                                           const std::function<bool(const ComplexPoint&)>&);

private:
    void sync_views();  // copy owned membership into non-owned cells

    GridSpec spec_;
    double pitch_ = 0.0;
    ComplexPoint attracting_;
    std::vector<std::uint8_t> owned_;
    std::vector<CellId> rep_;
    std::vector<std::uint8_t> member_;
    std::vector<std::int32_t> component_;
    std::vector<std::int64_t> component_sizes_;
    int component_count_ = 0;
    std::vector<double> boundary_sph_;   // per cell, via representative
};

/// 8-neighbourhood (king moves).
std::span<const std::pair<int, int>> king_offsets();
/// 16-neighbourhood (king and knight moves).
std::span<const std::pair<int, int>> sixteen_offsets();

/// Membership raster: a cell is a member iff its center's orbit enters the
/// epsilon_attract ball around p within max_iter steps. When p is
/// superattracting, cells the distance estimate places within one pitch of the
/// Julia set are dropped, so thin or measure-zero Julia sets still separate the
/// raster. Throws NotAttracting.
SphereGrid compute_basin(const RationalMap& map, const ComplexPoint& p, const GridSpec& spec, int threads = 0);

/// 8-connected labels with seam stitching. Component 1 contains p, the rest
/// are ordered by decreasing size. Throws AttractorNotMember.
SphereGrid label_components(SphereGrid grid);

/// Exact two-pass Euclidean distance transform per chart, scaled to the sphere
/// by the chart factor at the cell center. Each chart also sees the boundary
/// found by the other chart, and the two estimates are blended near |c| = 1.
SphereGrid boundary_distance(SphereGrid grid);

/// compute_basin, label_components and boundary_distance in sequence.
SphereGrid build_basin_grid(const RationalMap& map, const ComplexPoint& p, const GridSpec& spec, int threads = 0);

/// Intersects the membership with a predicate on cell centers; labels and
/// distances are dropped and must be recomputed.
SphereGrid restrict_membership(const SphereGrid& grid, const std::function<bool(const ComplexPoint&)>& keep);

/// Raster of an explicitly given domain (used for synthetic test domains).
SphereGrid grid_from_membership(const GridSpec& spec, const ComplexPoint& anchor,
                                const std::function<bool(const ComplexPoint&)>& inside);

struct Location {
    CellId cell;
    int component;
};

/// Owned cell containing z and its component. Throws NotInBasin.
Location locate(const SphereGrid& grid, const ComplexPoint& z);

/// Connected components of an arbitrary owned-cell mask with the same
/// connectivity and seam rules as label_components.
struct Labeling {
    std::vector<std::int32_t> label;   ///< per cell, 0 outside the mask
    std::vector<std::int64_t> sizes;   ///< owned cells per label, index 0 unused
    int count = 0;
};
Labeling label_mask(const SphereGrid& geometry, std::span<const std::uint8_t> mask, CellId anchor = -1);

/// Sum of cell areas h^2 over member cells of one full chart raster.
double member_area_chart(const SphereGrid& grid, Chart chart);
/// Spherical area of the member cells divided by 4 pi.
double member_sphere_fraction(const SphereGrid& grid);

/// Exact Euclidean nearest seed for each cell of one res x res raster
/// (index iy * res + ix), -1 everywhere when there are no seeds.
std::vector<std::int32_t> nearest_seed(std::span<const std::uint8_t> seed, int res);

// ---------------------------------------------------------------------------

template <typename F>
void SphereGrid::for_each_neighbor(CellId cell, std::span<const std::pair<int, int>> offsets, F&& f) const {
    const CellCoord c = coord(cell);
    const int res = spec_.resolution;
    for (const auto& [dx, dy] : offsets) {
        const int nx = c.ix + dx;
        const int ny = c.iy + dy;
        if (nx < 0 || ny < 0 || nx >= res || ny >= res) continue;
        const CellId target = rep_[cell_id(c.chart, nx, ny)];
        if (target == cell) continue;
        f(target, dx, dy);
    }
}

}  // namespace bml
