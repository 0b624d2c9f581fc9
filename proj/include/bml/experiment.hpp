#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bml/boettcher.hpp"
#include "bml/config.hpp"
#include "bml/metric.hpp"
#include "bml/orbit_tree.hpp"

namespace bml {

struct SampleRecord {
    int component_id = 0;
    CellId cell = -1;
    ComplexPoint point;
    bool resolved = false;
    double min_dist = 0.0;       ///< at the effective tree depth
    std::int32_t node = -1;      ///< nearest tree node
    ComplexPoint q;              ///< its point
    int q_depth = -1;
    std::vector<double> by_depth;  ///< nearest node of depth <= K, K = 0..effective depth
};

struct ComponentRecord {
    int component_id = 0;
    std::int64_t cells = 0;
    std::size_t eligible_cells = 0;  ///< cells outside the exclusion band
    int samples_used = 0;
    int unresolved = 0;
    double empirical_C = 0.0;    ///< max over samples; +inf while any sample is unresolved
    double mean_distance = 0.0;  ///< over resolved samples
    std::vector<double> C_by_depth;
    std::vector<int> unresolved_by_depth;
};

struct LemmaSummary {
    double t0 = 0.0;
    bool t0_auto = true;
    std::vector<int> component_counts;            ///< index n = 1..n_max
    std::vector<CoverageReport> coverage_by_depth;  ///< index K = 0..effective depth
    bool monotone = true;
    const CoverageReport& final() const { return coverage_by_depth.back(); }
};

struct ResolutionPoint {
    int resolution = 0;
    int components = 0;
    double max_C = 0.0;
    std::vector<std::pair<int, double>> per_component;
};

struct ExperimentReport {
    ScenarioConfig config;
    int degree = 0;
    std::vector<FixedPointInfo> fixed;
    ComplexPoint attracting;
    cplx multiplier;
    ComplexPoint base;
    std::string base_rule;
    int component_total = 0;
    std::size_t member_cells = 0;
    int tree_effective_depth = 0;
    bool tree_truncated = false;
    std::vector<LevelStats> tree_levels;
    TreeCheck tree_check;
    std::vector<ComponentRecord> components;
    std::vector<SampleRecord> samples;
    double max_C = 0.0;  ///< over studied components
    std::vector<double> max_C_by_depth;
    std::optional<LemmaSummary> lemma;
    std::vector<ResolutionPoint> resolutions;

    int unresolved_total() const;
    bool c_monotone_in_depth() const;
};

/// Everything an experiment produced, for the writers.
struct Experiment {
    ExperimentReport report;
    SphereGrid grid;
    OrbitTree tree;
    std::optional<AnnulusDecomposition> annuli;
};

/// Attracting fixed point chosen by the configuration: the explicit value,
/// infinity for the basin-of-infinity scenario, otherwise the first
/// attracting fixed point. Throws NotAttracting.
ComplexPoint resolve_attractor(const RationalMap& map, const ScenarioConfig& config);

/// Base point p0 under the configured policy; `rule` receives a short description.
ComplexPoint resolve_base(const RationalMap& map, const SphereGrid& grid, const ScenarioConfig& config,
                          std::string* rule = nullptr);

/// Components sampled by the scenario: the immediate basin for finite-basin,
/// otherwise up to max_components of the largest.
std::vector<int> studied_components(const SphereGrid& grid, const ScenarioConfig& config);

/// Cells of a component eligible for sampling (more than two cells from the
/// membership boundary), in cell order.
std::vector<CellId> sampling_cells(const SphereGrid& grid, int component_id);

/// Seeded uniform draw with replacement over the component's eligible cells;
/// returns the sampled cells in draw order.
std::vector<CellId> draw_samples(const SphereGrid& grid, int component_id, int count, std::uint64_t seed);

/// Lemma coverage for a basin-of-infinity polynomial scenario.
LemmaSummary lemma_summary(const RationalMap& map, const SphereGrid& grid, const OrbitTree& tree,
                           const ScenarioConfig& config, AnnulusDecomposition* out = nullptr, int threads = 0);

Experiment run_experiment(const ScenarioConfig& config);

/// samples.csv, components.csv, basin.ppm, heat.ppm, report.txt (plus
/// contours.csv when annuli were computed). Throws IoError.
void emit_outputs(const Experiment& experiment, const std::filesystem::path& dir);

void write_samples_csv(std::ostream& out, const ExperimentReport& report);
void write_components_csv(std::ostream& out, const ExperimentReport& report);
void write_report_txt(std::ostream& out, const ExperimentReport& report);

}  // namespace bml
