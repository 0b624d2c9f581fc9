#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include "bml/boettcher.hpp"
#include "bml/error.hpp"
#include "bml/experiment.hpp"
#include "bml/io_format.hpp"
#include "bml/render.hpp"

using namespace bml;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNumerical = 2;
constexpr int kVerification = 3;

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::CommonFactor:
        case ErrorKind::DegreeTooLow:
        case ErrorKind::ParseError:
        case ErrorKind::ValidationError:
        case ErrorKind::IoError:
            return kUsage;
        default:
            return kNumerical;
    }
}

struct Options {
    std::string config;
    std::string out;
    std::optional<int> resolution, depth, samples, threads;
    std::optional<std::uint64_t> seed;
};

ScenarioConfig load(const Options& o) {
    ScenarioConfig c = load_config(o.config);
    if (o.resolution) c.grid.resolution = *o.resolution;
    if (o.depth) c.tree_depth = *o.depth;
    if (o.samples) c.sample_count = *o.samples;
    if (o.seed) c.sample_seed = *o.seed;
    if (o.threads) c.threads = *o.threads;
    c.validate();
    return c;
}

std::filesystem::path out_dir(const Options& o, const ScenarioConfig& c) {
    const std::filesystem::path dir = o.out.empty() ? std::filesystem::path(c.output_dir) : std::filesystem::path(o.out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

// Runs body with stdout when --out is "-", else with the named file inside the output directory.
template <typename F>
void with_output(const Options& o, const ScenarioConfig& c, const char* name, F&& body) {
    if (o.out == "-") {
        body(std::cout);
        std::cout.flush();
        return;
    }
    const auto path = out_dir(o, c) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    body(f);
    f.close();
    if (!f) throw Error(ErrorKind::IoError, "write failed for " + path.string());
    std::cerr << "wrote " << path.string() << '\n';
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

RationalMap map_of(const ScenarioConfig& c) { return RationalMap::parse(c.num_coeffs, c.den_coeffs); }

SphereGrid grid_of(const RationalMap& map, const ScenarioConfig& c) {
    Stopwatch sw;
    SphereGrid g = build_basin_grid(map, resolve_attractor(map, c), c.grid, c.threads);
    std::cerr << "basin raster " << c.grid.resolution << ": " << g.component_count() << " components, "
              << g.member_count_owned() << " member cells, " << format_real(sw.seconds(), 3) << " s\n";
    return g;
}

int cmd_fixed_points(const Options& o) {
    const ScenarioConfig c = load(o);
    const RationalMap map = map_of(c);
    const auto fixed = fixed_points(map);
    with_output(o, c, "fixed_points.csv", [&](std::ostream& out) {
        out << kVersionLine << '\n' << "location,multiplier_re,multiplier_im,abs_multiplier,class,multiplicity\n";
        for (const FixedPointInfo& f : fixed) {
            out << '"' << format_point(f.location) << "\"," << format_real(f.multiplier.real()) << ','
                << format_real(f.multiplier.imag()) << ',' << format_real(std::abs(f.multiplier)) << ','
                << to_string(f.kind) << ',' << f.multiplicity << '\n';
        }
    });
    return kOk;
}

int cmd_basin(const Options& o) {
    const ScenarioConfig c = load(o);
    const RationalMap map = map_of(c);
    const SphereGrid g = grid_of(map, c);
    with_output(o, c, "basin_components.csv", [&](std::ostream& out) {
        out << kVersionLine << '\n' << "component_id,cells\n";
        for (int k = 1; k <= g.component_count(); ++k) out << k << ',' << g.component_sizes()[k] << '\n';
    });
    if (o.out != "-") {
        with_output(o, c, "basin.ppm", [&](std::ostream& out) { write_ppm(out, render_basin(g)); });
    }
    return kOk;
}

int cmd_tree(const Options& o) {
    const ScenarioConfig c = load(o);
    const RationalMap map = map_of(c);
    const SphereGrid g = grid_of(map, c);
    std::string rule;
    const ComplexPoint base = resolve_base(map, g, c, &rule);
    Stopwatch sw;
    const OrbitTree t = build_backward_tree(map, base, c.tree_depth, g, c.node_budget, c.threads);
    const TreeCheck check = verify_tree(t, map, g);
    std::cerr << "tree from " << format_point(base) << " (" << rule << "): " << t.nodes.size() << " nodes, depth "
              << t.effective_depth << (t.truncated ? " (budget)" : "") << ", " << format_real(sw.seconds(), 3)
              << " s\n";
    with_output(o, c, "tree.csv", [&](std::ostream& out) { write_tree_csv(out, t); });
    if (!check.ok()) {
        std::cerr << "tree invariants violated: " << check.residual_violations << " residual, "
                  << check.duplicate_pairs << " duplicate, " << check.tag_mismatches << " tag\n";
        return kVerification;
    }
    return kOk;
}

int cmd_verify_lemma(const Options& o) {
    const ScenarioConfig c = load(o);
    const RationalMap map = map_of(c);
    if (c.scenario != ScenarioKind::BasinOfInfinity || !map.is_polynomial()) {
        throw Error(ErrorKind::ValidationError, "verify-lemma needs a polynomial basin-of-infinity scenario");
    }
    const SphereGrid g = grid_of(map, c);
    const ComplexPoint base = resolve_base(map, g, c);
    const OrbitTree t = build_backward_tree(map, base, c.tree_depth, g, c.node_budget, c.threads);
    const TreeCheck check = verify_tree(t, map, g);
    const LemmaSummary s = lemma_summary(map, g, t, c, nullptr, c.threads);
    with_output(o, c, "coverage.csv", [&](std::ostream& out) {
        out << kVersionLine << '\n' << "level,components,eligible,covered\n";
        for (const LevelCoverage& l : s.final().levels)
            out << l.level << ',' << l.components << ',' << l.eligible << ',' << l.covered << '\n';
    });
    std::cerr << "t0 " << format_real(s.t0, 6) << ", tree depth " << t.effective_depth << ", coverage "
              << s.final().covered() << '/' << s.final().eligible() << ", monotone " << (s.monotone ? "yes" : "no")
              << '\n';
    for (const auto& [level, comp] : s.final().uncovered)
        std::cerr << "uncovered: level " << level << " component " << comp << '\n';
    if (!s.final().complete() || !s.monotone || !check.ok()) return kVerification;
    return kOk;
}

int cmd_experiment(const Options& o) {
    const ScenarioConfig c = load(o);
    Stopwatch sw;
    const Experiment ex = run_experiment(c);
    const auto dir = o.out.empty() || o.out == "-" ? std::filesystem::path(c.output_dir) : std::filesystem::path(o.out);
    emit_outputs(ex, dir);
    const ExperimentReport& r = ex.report;
    std::cerr << "experiment " << c.scenario_id << ": " << r.components.size() << " components sampled, max C "
              << format_real(r.max_C, 6) << ", unresolved " << r.unresolved_total() << ", tree depth "
              << r.tree_effective_depth << ", " << format_real(sw.seconds(), 3) << " s; outputs in " << dir.string()
              << '\n';
    return r.tree_check.ok() ? kOk : kVerification;
}

int cmd_render(const Options& o) {
    const ScenarioConfig c = load(o);
    const RationalMap map = map_of(c);
    const SphereGrid g = grid_of(map, c);
    with_output(o, c, "basin.ppm", [&](std::ostream& out) { write_ppm(out, render_basin(g)); });
    if (c.scenario == ScenarioKind::BasinOfInfinity && map.is_polynomial() && o.out != "-") {
        const GreensField field = greens_function(map, g, c.threads);
        const double t0 = c.t0 ? *c.t0 : choose_t0(map, resolve_base(map, g, c), c.grid.max_iter);
        const AnnulusDecomposition dec = annulus_decomposition(field, g, t0, c.n_max);
        with_output(o, c, "contours.csv", [&](std::ostream& out) { write_contours_csv(out, dec, g); });
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Basins of attraction, backward orbits and grid quasi-hyperbolic distances"};
    app.require_subcommand(1);
    Options opt;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "output directory, or - for standard output");
        sub->add_option("--resolution", opt.resolution, "cells per chart side");
        sub->add_option("--depth", opt.depth, "backward tree depth");
        sub->add_option("--samples", opt.samples, "samples per component");
        sub->add_option("--seed", opt.seed, "sampling seed");
        sub->add_option("--threads", opt.threads, "worker threads, 0 = all cores");
    };
    struct Command {
        const char* name;
        const char* help;
        int (*run)(const Options&);
    };
    const Command commands[] = {
        {"fixed-points", "list fixed points with multipliers", cmd_fixed_points},
        {"basin", "compute and label the basin raster", cmd_basin},
        {"tree", "build the backward orbit tree", cmd_tree},
        {"verify-lemma", "annulus coverage check for the basin of infinity", cmd_verify_lemma},
        {"experiment", "full pipeline with sampling and all outputs", cmd_experiment},
        {"render", "basin image (and level contours)", cmd_render},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const Command& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        add_common(sub);
        subs.emplace_back(sub, &c);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    try {
        for (const auto& [sub, cmd] : subs)
            if (sub->parsed()) return cmd->run(opt);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}
