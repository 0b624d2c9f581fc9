#include "bml/boettcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "bml/error.hpp"
#include "bml/io_format.hpp"
#include "bml/parallel.hpp"

namespace bml {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_polynomial(const RationalMap& map) {
    if (!map.is_polynomial()) throw Error(ErrorKind::NotPolynomial, "Green's function needs a polynomial map");
    map.require_dynamical();
}

}  // namespace

double greens_at(const RationalMap& map, const ComplexPoint& z, int max_iter, double escape_radius) {
    require_polynomial(map);
    const ComplexPoint c = z.canonical();
    if (c.is_infinity()) return kInf;
    const Poly& p = map.numerator();
    const cplx q0 = map.denominator()[0];
    const int d = map.degree();
    const double shift = std::log(std::abs(p.back() / q0)) / (d - 1);
    cplx x = c.z();
    double scale = 1.0;  // d^-n
    for (int n = 0; n <= max_iter; ++n) {
        const double r = std::abs(x);
        if (r > escape_radius) return scale * (std::log(r) + shift);
        x = horner(p, x) / q0;
        scale /= d;
    }
    return 0.0;
}

GreensField greens_function(const RationalMap& map, const SphereGrid& grid, int threads) {
    require_polynomial(map);
    if (!grid.attracting_point().is_infinity()) {
        throw Error(ErrorKind::InvalidArgument, "Green's function needs the basin-of-infinity raster");
    }
    GreensField field;
    field.degree = map.degree();
    field.value.assign(grid.cell_count(), 0.0);
    const int max_iter = grid.spec().max_iter;
    parallel_for(grid.cell_count(), threads, [&](std::size_t i) {
        const auto id = static_cast<CellId>(i);
        if (grid.owned(id) && grid.member(id)) field.value[i] = greens_at(map, grid.center_point(id), max_iter);
    });
    for (CellId id = 0; id < static_cast<CellId>(grid.cell_count()); ++id) {
        if (!grid.owned(id)) field.value[id] = field.value[grid.representative(id)];
    }
    return field;
}

double choose_t0(const RationalMap& map, const ComplexPoint& base, int max_iter) {
    require_polynomial(map);
    const double g0 = greens_at(map, base, max_iter);
    if (!(g0 > 0.0) || !std::isfinite(g0)) {
        throw Error(ErrorKind::BadThreshold, "base point " + to_string(base.canonical()) +
                                                 " needs a finite positive Green's value");
    }
    const double d = map.degree();
    std::vector<double> phase{0.0, 1.0};
    double top_critical = 0.0;
    for (const ComplexPoint& c : critical_points(map)) {
        if (c.is_infinity()) continue;
        const double g = greens_at(map, c, max_iter);
        if (!(g > 0.0)) continue;
        top_critical = std::max(top_critical, g);
        const double a = std::log(g0 / g) / std::log(d);
        phase.push_back(a - std::floor(a));
    }
    std::sort(phase.begin(), phase.end());
    double best_gap = -1.0;
    double phi = 0.5;
    for (std::size_t k = 1; k < phase.size(); ++k) {
        if (phase[k] - phase[k - 1] > best_gap) {
            best_gap = phase[k] - phase[k - 1];
            phi = 0.5 * (phase[k] + phase[k - 1]);
        }
    }
    double t0 = g0 * std::pow(d, -phi);
    while (t0 <= top_critical) t0 *= d;
    return t0;
}

int AnnulusDecomposition::component_of(CellId cell) const {
    const int n = band[cell];
    return n >= 1 ? annuli[n].label[cell] : 0;
}

AnnulusDecomposition annulus_decomposition(const GreensField& field, const SphereGrid& grid, double t0, int n_max) {
    if (!(t0 > 0.0) || !std::isfinite(t0)) throw Error(ErrorKind::InvalidArgument, "t0 must be positive and finite");
    if (n_max < 1 || n_max > 60) throw Error(ErrorKind::InvalidArgument, "n_max must lie in [1, 60]");
    AnnulusDecomposition dec;
    dec.t0 = t0;
    dec.n_max = n_max;
    dec.degree = field.degree;
    for (int n = 0; n <= n_max; ++n) dec.levels.push_back(t0 * std::pow(static_cast<double>(field.degree), -n));

    const std::size_t cells = grid.cell_count();
    dec.band.assign(cells, -1);
    for (std::size_t i = 0; i < cells; ++i) {
        const double g = field.value[i];
        if (g > t0) {
            dec.band[i] = 0;
            continue;
        }
        for (int n = 1; n <= n_max; ++n) {
            if (g > dec.levels[n]) {
                dec.band[i] = static_cast<std::int8_t>(n);
                break;
            }
        }
    }

    const CellId infinity_cell = grid.owning_cell(ComplexPoint::infinity());
    std::vector<std::uint8_t> mask(cells);
    for (std::size_t i = 0; i < cells; ++i) mask[i] = dec.band[i] == 0;
    const Labeling outer = label_mask(grid, mask, infinity_cell);
    if (outer.count != 1 || !mask[infinity_cell]) {
        throw Error(ErrorKind::BadThreshold, "U_0 = {G > " + format_real(t0) + "} has " + std::to_string(outer.count) +
                                                 " components" + (mask[infinity_cell] ? "" : " and misses infinity"));
    }

    dec.annuli.resize(static_cast<std::size_t>(n_max) + 1);
    for (int n = 1; n <= n_max; ++n) {
        for (std::size_t i = 0; i < cells; ++i) mask[i] = dec.band[i] == n;
        dec.annuli[n] = label_mask(grid, mask);
    }
    return dec;
}

int CoverageReport::eligible() const {
    int s = 0;
    for (const auto& l : levels) s += l.eligible;
    return s;
}

int CoverageReport::covered() const {
    int s = 0;
    for (const auto& l : levels) s += l.covered;
    return s;
}

double CoverageReport::fraction() const {
    const int e = eligible();
    return e == 0 ? 1.0 : static_cast<double>(covered()) / e;
}

CoverageReport verify_annulus_coverage(const AnnulusDecomposition& dec, const OrbitTree& tree, int max_depth) {
    std::vector<std::vector<char>> hit(static_cast<std::size_t>(dec.n_max) + 1);
    for (int n = 1; n <= dec.n_max; ++n) hit[n].assign(static_cast<std::size_t>(dec.annuli[n].count) + 1, 0);
    for (const OrbitNode& node : tree.nodes) {
        if (max_depth >= 0 && node.depth > max_depth) continue;
        if (node.cell < 0) continue;
        const int n = dec.band_of(node.cell);
        if (n >= 1) hit[n][dec.annuli[n].label[node.cell]] = 1;
    }
    CoverageReport report;
    for (int n = 1; n <= dec.n_max; ++n) {
        LevelCoverage lc;
        lc.level = n;
        lc.components = dec.annuli[n].count;
        for (int i = 1; i <= lc.components; ++i) {
            if (dec.annuli[n].sizes[i] < kCoverageMinCells) continue;
            ++lc.eligible;
            if (hit[n][i]) {
                ++lc.covered;
            } else {
                report.uncovered.emplace_back(n, i);
            }
        }
        report.levels.push_back(lc);
    }
    return report;
}

void write_contours_csv(std::ostream& out, const AnnulusDecomposition& dec, const SphereGrid& grid) {
    out << kVersionLine << '\n' << "level,component,chart,x0,y0,x1,y1\n";
    const int res = grid.resolution();
    const double half = 0.5 * grid.pitch();
    // side k: neighbour offset and the segment endpoints relative to the center
    struct Side {
        int dx, dy;
        double x0, y0, x1, y1;
    };
    const Side sides[] = {{1, 0, 1, -1, 1, 1}, {0, 1, 1, 1, -1, 1}, {-1, 0, -1, 1, -1, -1}, {0, -1, -1, -1, 1, -1}};
    for (CellId id = 0; id < static_cast<CellId>(grid.cell_count()); ++id) {
        if (!grid.owned(id)) continue;
        const int n = dec.band_of(id);
        if (n < 1) continue;
        const int comp = dec.annuli[n].label[id];
        const CellCoord cc = grid.coord(id);
        const cplx c = grid.center(id);
        for (const Side& s : sides) {
            const int nx = cc.ix + s.dx;
            const int ny = cc.iy + s.dy;
            if (nx >= 0 && ny >= 0 && nx < res && ny < res) {
                const CellId nb = grid.representative(grid.cell_id(cc.chart, nx, ny));
                if (dec.band_of(nb) == n && dec.annuli[n].label[nb] == comp) continue;
            }
            out << n << ',' << comp << ',' << chart_letter(cc.chart) << ',' << format_real(c.real() + s.x0 * half)
                << ',' << format_real(c.imag() + s.y0 * half) << ',' << format_real(c.real() + s.x1 * half) << ','
                << format_real(c.imag() + s.y1 * half) << '\n';
        }
    }
}

}  // namespace bml
