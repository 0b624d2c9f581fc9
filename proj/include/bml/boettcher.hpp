#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bml/orbit_tree.hpp"
#include "bml/rational_map.hpp"
#include "bml/sphere_grid.hpp"

namespace bml {

inline constexpr double kEscapeRadius = 1e8;

/// Green's function of the basin of infinity of a polynomial at one point:
/// d^-n (log|f^n z| + log|a_d| / (d - 1)) at the first n with |f^n z| above the
/// escape radius, 0 when the orbit stays bounded for max_iter steps and
/// +inf at infinity. Throws NotPolynomial.
double greens_at(const RationalMap& map, const ComplexPoint& z, int max_iter = 2000,
                 double escape_radius = kEscapeRadius);

/// G at every cell center of a basin-of-infinity raster (views share their
/// representative's value). Non-member cells hold 0.
struct GreensField {
    int degree = 0;
    double escape_radius = kEscapeRadius;
    std::vector<double> value;
    double at(CellId cell) const { return value[cell]; }
};

/// Throws NotPolynomial, InvalidArgument when the grid is not the basin of infinity.
GreensField greens_function(const RationalMap& map, const SphereGrid& grid, int threads = 0);

/// Outer threshold for U_0 = {G > t0}. Tree levels sit at G(base) d^-k and
/// critical points at their own levels; t0 is placed in the middle of the widest
/// gap between those levels (taken modulo a factor d) and then raised by
/// factors of d until it exceeds every critical level, so no level line carries
/// a tree node or a critical point and U_0 holds no branching.
double choose_t0(const RationalMap& map, const ComplexPoint& base, int max_iter = 2000);

/// Bands W_n = {t_n < G <= t_(n-1)}, t_n = t0 d^-n, n = 1..n_max, each labeled
/// into 8-connected components. U_0 is the region G > t0.
struct AnnulusDecomposition {
    double t0 = 0.0;
    int n_max = 0;
    int degree = 0;
    std::vector<double> levels;              ///< t_0 .. t_(n_max)
    std::vector<std::int8_t> band;           ///< per cell: 0 for U_0, n for W_n, -1 elsewhere
    std::vector<Labeling> annuli;            ///< index n = 1..n_max; index 0 unused
    int component_count(int n) const { return annuli[n].count; }
    int band_of(CellId cell) const { return band[cell]; }
    /// Component label of the cell inside its band, 0 outside W_1..W_n_max.
    int component_of(CellId cell) const;
};

/// Throws BadThreshold when U_0 is empty, disconnected or misses infinity,
/// InvalidArgument when t0 <= 0 or n_max < 1.
AnnulusDecomposition annulus_decomposition(const GreensField& field, const SphereGrid& grid, double t0, int n_max);

inline constexpr std::int64_t kCoverageMinCells = 25;

struct LevelCoverage {
    int level = 0;
    int components = 0;  ///< all components of the band
    int eligible = 0;    ///< components of at least kCoverageMinCells cells
    int covered = 0;     ///< eligible components holding a tree node
    double fraction() const { return eligible == 0 ? 1.0 : static_cast<double>(covered) / eligible; }
};

struct CoverageReport {
    std::vector<LevelCoverage> levels;  ///< n = 1..n_max
    std::vector<std::pair<int, int>> uncovered;  ///< (level, component)
    int eligible() const;
    int covered() const;
    double fraction() const;
    bool complete() const { return uncovered.empty(); }
};

/// Counts tree nodes of depth <= max_depth (all when negative) by the band
/// component of their cell. A node whose point lies within half a cell of a
/// level line is therefore assigned by its cell center.
CoverageReport verify_annulus_coverage(const AnnulusDecomposition& dec, const OrbitTree& tree, int max_depth = -1);

/// CSV of boundary segments of every band component:
/// version line, "level,component,chart,x0,y0,x1,y1", one row per cell side.
void write_contours_csv(std::ostream& out, const AnnulusDecomposition& dec, const SphereGrid& grid);

}  // namespace bml
