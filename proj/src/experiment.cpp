#include "bml/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>

#include "bml/error.hpp"
#include "bml/io_format.hpp"
#include "bml/parallel.hpp"
#include "bml/render.hpp"

namespace bml {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// Unbiased integer in [0, n) (Lemire), independent of the standard library's
// distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(rng()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t floor = (0 - n) % n;
        while (low < floor) {
            m = static_cast<unsigned __int128>(rng()) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

RationalMap map_of(const ScenarioConfig& c) {
    RationalMap m = RationalMap::parse(c.num_coeffs, c.den_coeffs);
    m.require_dynamical();
    return m;
}

struct Sampled {
    std::vector<ComponentRecord> components;
    std::vector<SampleRecord> samples;
};

Sampled sample_components(const SphereGrid& grid, const OrbitTree& tree, const ScenarioConfig& config) {
    Sampled out;
    const int depth = tree.effective_depth;
    for (int comp : studied_components(grid, config)) {
        ComponentRecord rec;
        rec.component_id = comp;
        rec.cells = grid.component_sizes()[comp];
        rec.eligible_cells = sampling_cells(grid, comp).size();
        rec.C_by_depth.assign(static_cast<std::size_t>(depth) + 1, 0.0);
        rec.unresolved_by_depth.assign(static_cast<std::size_t>(depth) + 1, 0);

        const std::vector<CellId> cells = draw_samples(grid, comp, config.sample_count, config.sample_seed);
        std::vector<SampleRecord> samples(cells.size());
        if (!cells.empty()) {
            const MetricGraph graph = build_metric_graph(grid, comp);
            const OrbitIndex index = index_tree(tree, graph, grid);
            parallel_for(cells.size(), config.threads, [&](std::size_t i) {
                SampleRecord& s = samples[i];
                s.component_id = comp;
                s.cell = cells[i];
                s.point = grid.center_point(cells[i]);
                const DepthMinima m = nearest_by_depth(tree, graph, index, graph.vertex_of(grid, cells[i]), depth);
                s.by_depth = m.distance;
                s.node = m.node.back();
                s.resolved = s.node >= 0;
                s.min_dist = m.distance.back();
                if (s.resolved) {
                    s.q = tree.nodes[s.node].point;
                    s.q_depth = tree.nodes[s.node].depth;
                }
            });
        }
        double sum = 0.0;
        for (const SampleRecord& s : samples) {
            ++rec.samples_used;
            if (!s.resolved) ++rec.unresolved;
            else sum += s.min_dist;
            for (int k = 0; k <= depth; ++k) {
                if (std::isinf(s.by_depth[k])) ++rec.unresolved_by_depth[k];
                else rec.C_by_depth[k] = std::max(rec.C_by_depth[k], s.by_depth[k]);
            }
        }
        for (int k = 0; k <= depth; ++k)
            if (rec.unresolved_by_depth[k] > 0) rec.C_by_depth[k] = kInf;
        rec.empirical_C = rec.C_by_depth.back();
        const int resolved = rec.samples_used - rec.unresolved;
        rec.mean_distance = resolved > 0 ? sum / resolved : 0.0;
        out.components.push_back(std::move(rec));
        out.samples.insert(out.samples.end(), std::make_move_iterator(samples.begin()),
                           std::make_move_iterator(samples.end()));
    }
    return out;
}

double max_over(const std::vector<ComponentRecord>& comps) {
    double m = 0.0;
    for (const auto& c : comps)
        if (c.samples_used > 0) m = std::max(m, c.empirical_C);
    return m;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    return out;
}

void close_out(std::ofstream& out, const std::filesystem::path& path) {
    out.close();
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace

int ExperimentReport::unresolved_total() const {
    int s = 0;
    for (const auto& c : components) s += c.unresolved;
    return s;
}

bool ExperimentReport::c_monotone_in_depth() const {
    for (const auto& c : components)
        for (std::size_t k = 1; k < c.C_by_depth.size(); ++k)
            if (c.C_by_depth[k] > c.C_by_depth[k - 1]) return false;
    return true;
}

ComplexPoint resolve_attractor(const RationalMap& map, const ScenarioConfig& config) {
    if (config.attracting_point || config.scenario == ScenarioKind::BasinOfInfinity) {
        const ComplexPoint p = config.attracting_point ? config.attracting_point->canonical() : ComplexPoint::infinity();
        const cplx m = multiplier(map, p);
        if (!(std::abs(m) < 1.0)) {
            throw Error(ErrorKind::NotAttracting, to_string(p) + " has multiplier modulus " + format_real(std::abs(m), 6));
        }
        return p;
    }
    for (const FixedPointInfo& f : fixed_points(map)) {
        if (f.kind == FixedPointClass::Superattracting || f.kind == FixedPointClass::Attracting) return f.location;
    }
    throw Error(ErrorKind::NotAttracting, "the map has no attracting fixed point");
}

ComplexPoint resolve_base(const RationalMap& map, const SphereGrid& grid, const ScenarioConfig& config,
                          std::string* rule) {
    const ComplexPoint p = grid.attracting_point().canonical();
    auto say = [&](const std::string& s) {
        if (rule) *rule = s;
    };
    double offset = config.base_offset;
    switch (config.base_policy) {
        case BasePolicy::Explicit:
            say("explicit");
            return config.base_point.canonical();
        case BasePolicy::FixedPoint:
            say("fixed point");
            return p;
        case BasePolicy::Auto: {
            for (const Preimage& q : preimages(map, p)) {
                if (spherical_distance(q.point, p) <= kDedupTolerance) continue;
                const CellId cell = grid.owning_cell(q.point);
                if (grid.member(cell) && grid.component(cell) == 1) {
                    say("fixed point (another preimage in the immediate basin)");
                    return p;
                }
            }
            offset = 0.1;
            break;
        }
        case BasePolicy::Offset:
            break;
    }
    // Step toward the neighbouring cell farthest from the boundary.
    const int res = grid.resolution();
    const CellId here = grid.raster_cell(p.chart, p.coord());
    const CellCoord cc = grid.coord(here);
    double best = -1.0;
    cplx dir(1.0, 0.0);
    for (const auto& [dx, dy] : king_offsets()) {
        const int x = cc.ix + dx, y = cc.iy + dy;
        if (x < 0 || y < 0 || x >= res || y >= res) continue;
        const CellId nb = grid.representative(grid.cell_id(p.chart, x, y));
        if (!grid.member(nb)) continue;
        const double d = grid.boundary_distance(nb);
        if (d > best) {
            best = d;
            dir = cplx(dx, dy) / std::hypot(dx, dy);
        }
    }
    say("offset " + format_real(offset) + " toward the deepest neighbour");
    const cplx c = p.coord() + offset * dir;
    return ComplexPoint{c.real(), c.imag(), p.chart}.canonical();
}

std::vector<int> studied_components(const SphereGrid& grid, const ScenarioConfig& config) {
    std::vector<int> out;
    const int limit = config.scenario == ScenarioKind::FiniteBasin ? 1 : config.max_components;
    for (int c = 1; c <= grid.component_count() && static_cast<int>(out.size()) < limit; ++c) {
        if (grid.component_sizes()[c] >= 2) out.push_back(c);
    }
    return out;
}

std::vector<CellId> sampling_cells(const SphereGrid& grid, int component_id) {
    std::vector<CellId> out;
    for (CellId c : grid.component_cells(component_id))
        if (grid.boundary_distance_cells(c) > 2.0) out.push_back(c);
    return out;
}

std::vector<CellId> draw_samples(const SphereGrid& grid, int component_id, int count, std::uint64_t seed) {
    const std::vector<CellId> cells = grid.component_cells(component_id);
    std::vector<CellId> out;
    if (cells.empty() || sampling_cells(grid, component_id).empty()) return out;
    std::mt19937_64 rng(seed ^ (kGolden * static_cast<std::uint64_t>(component_id + 1)));
    while (static_cast<int>(out.size()) < count) {
        const CellId c = cells[bounded(rng, cells.size())];
        if (grid.boundary_distance_cells(c) > 2.0) out.push_back(c);
    }
    return out;
}

LemmaSummary lemma_summary(const RationalMap& map, const SphereGrid& grid, const OrbitTree& tree,
                           const ScenarioConfig& config, AnnulusDecomposition* out, int threads) {
    LemmaSummary s;
    const GreensField field = greens_function(map, grid, threads);
    s.t0_auto = !config.t0.has_value();
    s.t0 = config.t0 ? *config.t0 : choose_t0(map, tree.base, grid.spec().max_iter);
    AnnulusDecomposition dec = annulus_decomposition(field, grid, s.t0, config.n_max);
    s.component_counts.assign(static_cast<std::size_t>(config.n_max) + 1, 0);
    for (int n = 1; n <= config.n_max; ++n) s.component_counts[n] = dec.component_count(n);
    for (int k = 0; k <= tree.effective_depth; ++k) {
        s.coverage_by_depth.push_back(verify_annulus_coverage(dec, tree, k));
        if (k > 0) {
            const auto& a = s.coverage_by_depth[k - 1];
            const auto& b = s.coverage_by_depth[k];
            for (std::size_t n = 0; n < a.levels.size(); ++n)
                if (b.levels[n].fraction() < a.levels[n].fraction()) s.monotone = false;
        }
    }
    if (out) *out = std::move(dec);
    return s;
}

Experiment run_experiment(const ScenarioConfig& config) {
    config.validate();
    Experiment ex;
    ExperimentReport& r = ex.report;
    r.config = config;
    const RationalMap map = map_of(config);
    r.degree = map.degree();
    r.fixed = fixed_points(map);
    if (config.scenario == ScenarioKind::BasinOfInfinity && !map.is_polynomial()) {
        throw Error(ErrorKind::NotPolynomial, "basin-of-infinity scenario needs a polynomial");
    }
    r.attracting = resolve_attractor(map, config);
    r.multiplier = multiplier(map, r.attracting);

    ex.grid = build_basin_grid(map, r.attracting, config.grid, config.threads);
    r.component_total = ex.grid.component_count();
    r.member_cells = ex.grid.member_count_owned();
    r.base = resolve_base(map, ex.grid, config, &r.base_rule);

    ex.tree = build_backward_tree(map, r.base, config.tree_depth, ex.grid, config.node_budget, config.threads);
    r.tree_effective_depth = ex.tree.effective_depth;
    r.tree_truncated = ex.tree.truncated;
    r.tree_levels = ex.tree.levels;
    r.tree_check = verify_tree(ex.tree, map, ex.grid);

    if (config.scenario == ScenarioKind::BasinOfInfinity) {
        AnnulusDecomposition dec;
        r.lemma = lemma_summary(map, ex.grid, ex.tree, config, &dec, config.threads);
        ex.annuli = std::move(dec);
    }

    Sampled main = sample_components(ex.grid, ex.tree, config);
    r.components = std::move(main.components);
    r.samples = std::move(main.samples);
    r.max_C = max_over(r.components);
    r.max_C_by_depth.assign(static_cast<std::size_t>(ex.tree.effective_depth) + 1, 0.0);
    for (const auto& c : r.components)
        if (c.samples_used > 0)
            for (std::size_t k = 0; k < c.C_by_depth.size(); ++k)
                r.max_C_by_depth[k] = std::max(r.max_C_by_depth[k], c.C_by_depth[k]);

    for (int res : config.extra_resolutions) {
        ScenarioConfig alt = config;
        alt.grid.resolution = res;
        const SphereGrid g = build_basin_grid(map, r.attracting, alt.grid, config.threads);
        const OrbitTree t = build_backward_tree(map, r.base, config.tree_depth, g, config.node_budget, config.threads);
        const Sampled s = sample_components(g, t, alt);
        ResolutionPoint pt;
        pt.resolution = res;
        pt.components = g.component_count();
        pt.max_C = max_over(s.components);
        for (const auto& c : s.components) pt.per_component.emplace_back(c.component_id, c.empirical_C);
        r.resolutions.push_back(std::move(pt));
    }
    return ex;
}

void write_samples_csv(std::ostream& out, const ExperimentReport& r) {
    out << kVersionLine << '\n'
        << "scenario_id,component_id,sample_re,sample_im,sample_chart,depth,min_dist,q_re,q_im,q_chart,q_depth\n";
    for (const SampleRecord& s : r.samples) {
        if (!s.resolved) continue;
        out << r.config.scenario_id << ',' << s.component_id << ',' << format_real(s.point.re) << ','
            << format_real(s.point.im) << ',' << chart_letter(s.point.chart) << ',' << r.tree_effective_depth << ','
            << format_real(s.min_dist) << ',' << format_real(s.q.re) << ',' << format_real(s.q.im) << ','
            << chart_letter(s.q.chart) << ',' << s.q_depth << '\n';
    }
}

void write_components_csv(std::ostream& out, const ExperimentReport& r) {
    out << kVersionLine << '\n'
        << "scenario_id,component_id,cells,eligible_cells,samples_used,unresolved,empirical_C,mean_distance\n";
    for (const ComponentRecord& c : r.components) {
        out << r.config.scenario_id << ',' << c.component_id << ',' << c.cells << ',' << c.eligible_cells << ','
            << c.samples_used << ',' << c.unresolved << ',' << format_real(c.empirical_C) << ','
            << format_real(c.mean_distance) << '\n';
    }
}

void write_report_txt(std::ostream& o, const ExperimentReport& r) {
    const auto f6 = [](double v) { return format_real(v, 6); };
    o << kVersionLine << "\n\n";
    o << "scenario " << r.config.scenario_id << " (" << to_string(r.config.scenario) << "), degree " << r.degree << '\n';
    o << "fixed points:\n";
    for (const FixedPointInfo& f : r.fixed) {
        o << "  " << format_point(f.location) << "  |multiplier| " << f6(std::abs(f.multiplier)) << "  "
          << to_string(f.kind) << "  x" << f.multiplicity << '\n';
    }
    o << "attracting point " << format_point(r.attracting) << ", |multiplier| " << f6(std::abs(r.multiplier)) << '\n';
    o << "base point " << format_point(r.base) << " (" << r.base_rule << ")\n";
    o << "grid resolution " << r.config.grid.resolution << ", member cells " << r.member_cells << ", components "
      << r.component_total << "\n\n";

    o << "backward tree: depth " << r.tree_effective_depth << " of " << r.config.tree_depth
      << (r.tree_truncated ? " (node budget reached)" : "") << '\n';
    o << "  depth candidates outside duplicates kept\n";
    for (std::size_t k = 1; k < r.tree_levels.size(); ++k) {
        const LevelStats& l = r.tree_levels[k];
        o << "  " << l.depth << ' ' << l.candidates << ' ' << l.outside << ' ' << l.duplicates << ' ' << l.kept << '\n';
    }
    o << "  nodes " << r.tree_check.nodes << ", residual violations " << r.tree_check.residual_violations
      << ", duplicate pairs " << r.tree_check.duplicate_pairs << ", tag mismatches " << r.tree_check.tag_mismatches
      << ", max residual " << format_real(r.tree_check.max_residual, 3) << "\n\n";

    if (r.lemma) {
        const LemmaSummary& L = *r.lemma;
        o << "annulus coverage: t0 " << f6(L.t0) << (L.t0_auto ? " (auto)" : "") << '\n';
        o << "  level components eligible covered\n";
        for (const LevelCoverage& l : L.final().levels)
            o << "  " << l.level << ' ' << l.components << ' ' << l.eligible << ' ' << l.covered << '\n';
        o << "  coverage " << f6(L.final().fraction()) << ", monotone in depth " << (L.monotone ? "yes" : "no") << '\n';
        o << "  coverage by depth:";
        for (const auto& c : L.coverage_by_depth) o << ' ' << format_real(c.fraction(), 4);
        o << "\n\n";
    }

    o << "components (component cells samples unresolved C mean):\n";
    for (const ComponentRecord& c : r.components) {
        o << "  " << c.component_id << ' ' << c.cells << ' ' << c.samples_used << ' ' << c.unresolved << ' '
          << f6(c.empirical_C) << ' ' << f6(c.mean_distance) << '\n';
    }
    o << "max empirical C " << f6(r.max_C) << ", unresolved samples " << r.unresolved_total() << '\n';
    o << "max C by depth:";
    for (double c : r.max_C_by_depth) o << ' ' << f6(c);
    o << "\nC non-increasing in depth: " << (r.c_monotone_in_depth() ? "yes" : "no") << '\n';
    if (!r.resolutions.empty()) {
        o << "\nresolution series (resolution components max C):\n";
        o << "  " << r.config.grid.resolution << ' ' << r.component_total << ' ' << f6(r.max_C) << '\n';
        for (const ResolutionPoint& p : r.resolutions)
            o << "  " << p.resolution << ' ' << p.components << ' ' << f6(p.max_C) << '\n';
    }
    o << "\nconfiguration:\n" << echo_config(r.config);
}

void emit_outputs(const Experiment& ex, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
    const ExperimentReport& r = ex.report;
    auto emit = [&](const char* name, auto&& body) {
        const auto path = dir / name;
        std::ofstream out = open_out(path);
        body(out);
        close_out(out, path);
    };
    emit("samples.csv", [&](std::ostream& o) { write_samples_csv(o, r); });
    emit("components.csv", [&](std::ostream& o) { write_components_csv(o, r); });
    emit("basin.ppm", [&](std::ostream& o) { write_ppm(o, render_basin(ex.grid)); });
    emit("heat.ppm", [&](std::ostream& o) {
        std::vector<std::pair<CellId, double>> values;
        for (const SampleRecord& s : r.samples) values.emplace_back(s.cell, s.resolved ? s.min_dist : kInf);
        write_ppm(o, render_heat(ex.grid, values));
    });
    emit("report.txt", [&](std::ostream& o) { write_report_txt(o, r); });
    if (ex.annuli) emit("contours.csv", [&](std::ostream& o) { write_contours_csv(o, *ex.annuli, ex.grid); });
}

}  // namespace bml
