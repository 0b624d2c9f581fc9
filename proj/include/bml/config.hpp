#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bml/complex_point.hpp"
#include "bml/sphere_grid.hpp"

namespace bml {

enum class ScenarioKind { FiniteBasin, BasinOfInfinity, PerComponent };
const char* to_string(ScenarioKind kind);

enum class BasePolicy {
    Auto,        ///< p itself when it has another preimage in the immediate basin, else offset 0.1
    FixedPoint,  ///< p itself
    Offset,      ///< p + r * (unit direction toward the deepest neighbouring cell)
    Explicit,
};

/// Scenario file: "key = value" lines after the version line, '#' comments,
/// complex numbers written "re,im" (or "re"), coefficient lists separated by
/// ';' in increasing powers of z.
struct ScenarioConfig {
    std::string scenario_id = "scenario";
    ScenarioKind scenario = ScenarioKind::FiniteBasin;
    std::vector<cplx> num_coeffs;
    std::vector<cplx> den_coeffs{cplx(1.0, 0.0)};
    std::optional<ComplexPoint> attracting_point;  ///< empty = auto
    BasePolicy base_policy = BasePolicy::Auto;
    double base_offset = 0.1;
    ComplexPoint base_point;  ///< used by BasePolicy::Explicit
    GridSpec grid;
    int tree_depth = 10;
    std::size_t node_budget = 2'000'000;
    int sample_count = 200;
    std::uint64_t sample_seed = 1;
    int max_components = 10;
    int n_max = 6;
    std::optional<double> t0;  ///< empty = auto
    std::string output_dir = "out";
    int threads = 0;
    std::vector<int> extra_resolutions;

    /// Throws ValidationError naming the violated bound.
    void validate() const;
};

/// Throws ParseError (with line and key) or ValidationError.
ScenarioConfig parse_config(std::string_view text, const std::string& source = "<config>");
/// Throws IoError when the file cannot be read, then as parse_config.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Resolved values, one "key = value" line each, in a fixed order. The echo
/// parses back to the same configuration.
std::string echo_config(const ScenarioConfig& config);

/// "re,im" with round-trip precision; "inf" for infinity.
std::string format_point(const ComplexPoint& p);

}  // namespace bml
