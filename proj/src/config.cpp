#include "bml/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "bml/error.hpp"
#include "bml/io_format.hpp"

namespace bml {
namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

class Parser {
public:
    Parser(std::string source, int line, std::string key) : source_(std::move(source)), line_(line), key_(std::move(key)) {}

    [[noreturn]] void fail(const std::string& why) const {
        throw Error(ErrorKind::ParseError, source_ + ":" + std::to_string(line_) + ": key '" + key_ + "': " + why);
    }

    double real(std::string_view s) const {
        s = trim(s);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
            fail("expected a real number, got '" + std::string(s) + "'");
        }
        return v;
    }

    long long integer(std::string_view s) const {
        s = trim(s);
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
            fail("expected an integer, got '" + std::string(s) + "'");
        }
        return v;
    }

    cplx complex(std::string_view s) const {
        const auto parts = split(s, ',');
        if (parts.size() == 1) return {real(parts[0]), 0.0};
        if (parts.size() == 2) return {real(parts[0]), real(parts[1])};
        fail("expected 're,im', got '" + std::string(s) + "'");
    }

    ComplexPoint point(std::string_view s) const {
        if (trim(s) == "inf") return ComplexPoint::infinity();
        return ComplexPoint::from_z(complex(s));
    }

    std::vector<cplx> coefficients(std::string_view s) const {
        std::vector<cplx> out;
        for (std::string_view part : split(s, ';')) out.push_back(complex(part));
        return out;
    }

private:
    std::string source_;
    int line_;
    std::string key_;
};

[[noreturn]] void invalid(const std::string& why) { throw Error(ErrorKind::ValidationError, why); }

std::string join_coeffs(const std::vector<cplx>& c) {
    std::string out;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i) out += "; ";
        out += format_real(c[i].real()) + "," + format_real(c[i].imag());
    }
    return out;
}

}  // namespace

const char* to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::FiniteBasin: return "finite-basin";
        case ScenarioKind::BasinOfInfinity: return "basin-of-infinity";
        case ScenarioKind::PerComponent: return "per-component";
    }
    return "unknown";
}

std::string format_point(const ComplexPoint& p) {
    const ComplexPoint c = p.canonical();
    if (c.is_infinity()) return "inf";
    const cplx z = c.z();
    return format_real(z.real()) + "," + format_real(z.imag());
}

void ScenarioConfig::validate() const {
    if (scenario_id.empty()) invalid("scenario_id must not be empty");
    if (scenario_id.find_first_of(",\n\"") != std::string::npos) invalid("scenario_id must not contain ',', '\"' or newlines");
    if (num_coeffs.empty()) invalid("num_coeffs is required");
    if (den_coeffs.empty()) invalid("den_coeffs must not be empty");
    grid.validate();
    if (tree_depth < 1 || tree_depth > 24) invalid("tree_depth must lie in [1, 24]");
    if (node_budget < 1) invalid("node_budget must be at least 1");
    if (sample_count < 1) invalid("sample_count must be at least 1");
    if (max_components < 1) invalid("max_components must be at least 1");
    if (n_max < 1 || n_max > 30) invalid("n_max must lie in [1, 30]");
    if (t0 && !(*t0 > 0.0)) invalid("t0 must be positive");
    if (base_policy == BasePolicy::Offset && !(base_offset > 0.0 && base_offset < 1.0)) {
        invalid("base_point offset must lie in (0, 1)");
    }
    if (threads < 0) invalid("threads must be non-negative");
    if (output_dir.empty()) invalid("output_dir must not be empty");
    for (int r : extra_resolutions) {
        GridSpec g = grid;
        g.resolution = r;
        g.validate();
    }
}

ScenarioConfig parse_config(std::string_view text, const std::string& source) {
    ScenarioConfig cfg;
    std::map<std::string, int> seen;
    int line_no = 0;
    bool header = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        if (!header) {
            if (line != kVersionLine) {
                Parser(source, line_no, "").fail(std::string("first line must be '") + kVersionLine + "'");
            }
            header = true;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) Parser(source, line_no, std::string(line)).fail("expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        const Parser p(source, line_no, key);
        if (value.empty()) p.fail("empty value");
        if (!seen.emplace(key, line_no).second) p.fail("duplicate key (first on line " + std::to_string(seen[key]) + ")");

        if (key == "scenario_id") {
            cfg.scenario_id = std::string(value);
        } else if (key == "scenario") {
            if (value == "finite-basin") cfg.scenario = ScenarioKind::FiniteBasin;
            else if (value == "basin-of-infinity") cfg.scenario = ScenarioKind::BasinOfInfinity;
            else if (value == "per-component") cfg.scenario = ScenarioKind::PerComponent;
            else p.fail("expected finite-basin, basin-of-infinity or per-component");
        } else if (key == "num_coeffs") {
            cfg.num_coeffs = p.coefficients(value);
        } else if (key == "den_coeffs") {
            cfg.den_coeffs = p.coefficients(value);
        } else if (key == "attracting_point") {
            if (value == "auto") cfg.attracting_point.reset();
            else cfg.attracting_point = p.point(value);
        } else if (key == "base_point") {
            if (value == "auto") {
                cfg.base_policy = BasePolicy::Auto;
            } else if (value == "fixed-point") {
                cfg.base_policy = BasePolicy::FixedPoint;
            } else if (value.substr(0, 7) == "offset:") {
                cfg.base_policy = BasePolicy::Offset;
                cfg.base_offset = p.real(value.substr(7));
            } else {
                cfg.base_policy = BasePolicy::Explicit;
                cfg.base_point = p.point(value);
            }
        } else if (key == "resolution") {
            cfg.grid.resolution = static_cast<int>(p.integer(value));
        } else if (key == "epsilon_attract") {
            cfg.grid.epsilon_attract = p.real(value);
        } else if (key == "max_iter") {
            cfg.grid.max_iter = static_cast<int>(p.integer(value));
        } else if (key == "tree_depth") {
            cfg.tree_depth = static_cast<int>(p.integer(value));
        } else if (key == "node_budget") {
            const double b = p.real(value);
            if (b < 1 || b > 1e9 || b != std::floor(b)) p.fail("expected a whole number in [1, 1e9]");
            cfg.node_budget = static_cast<std::size_t>(b);
        } else if (key == "sample_count") {
            cfg.sample_count = static_cast<int>(p.integer(value));
        } else if (key == "sample_seed") {
            const long long s = p.integer(value);
            if (s < 0) p.fail("seed must be non-negative");
            cfg.sample_seed = static_cast<std::uint64_t>(s);
        } else if (key == "max_components") {
            cfg.max_components = static_cast<int>(p.integer(value));
        } else if (key == "n_max") {
            cfg.n_max = static_cast<int>(p.integer(value));
        } else if (key == "t0") {
            if (value == "auto") cfg.t0.reset();
            else cfg.t0 = p.real(value);
        } else if (key == "output_dir") {
            cfg.output_dir = std::string(value);
        } else if (key == "threads") {
            cfg.threads = static_cast<int>(p.integer(value));
        } else if (key == "extra_resolutions") {
            cfg.extra_resolutions.clear();
            if (value != "none")
                for (std::string_view part : split(value, ';')) cfg.extra_resolutions.push_back(static_cast<int>(p.integer(part)));
        } else {
            p.fail("unknown key");
        }
    }
    if (!header) Parser(source, line_no, "").fail("empty configuration");
    if (!seen.count("num_coeffs")) Parser(source, line_no, "num_coeffs").fail("required key missing");
    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

std::string echo_config(const ScenarioConfig& c) {
    std::ostringstream o;
    o << kVersionLine << '\n';
    o << "scenario_id = " << c.scenario_id << '\n';
    o << "scenario = " << to_string(c.scenario) << '\n';
    o << "num_coeffs = " << join_coeffs(c.num_coeffs) << '\n';
    o << "den_coeffs = " << join_coeffs(c.den_coeffs) << '\n';
    o << "attracting_point = " << (c.attracting_point ? format_point(*c.attracting_point) : "auto") << '\n';
    o << "base_point = ";
    switch (c.base_policy) {
        case BasePolicy::Auto: o << "auto"; break;
        case BasePolicy::FixedPoint: o << "fixed-point"; break;
        case BasePolicy::Offset: o << "offset:" << format_real(c.base_offset); break;
        case BasePolicy::Explicit: o << format_point(c.base_point); break;
    }
    o << '\n';
    o << "resolution = " << c.grid.resolution << '\n';
    o << "epsilon_attract = " << format_real(c.grid.epsilon_attract) << '\n';
    o << "max_iter = " << c.grid.max_iter << '\n';
    o << "tree_depth = " << c.tree_depth << '\n';
    o << "node_budget = " << c.node_budget << '\n';
    o << "sample_count = " << c.sample_count << '\n';
    o << "sample_seed = " << c.sample_seed << '\n';
    o << "max_components = " << c.max_components << '\n';
    o << "n_max = " << c.n_max << '\n';
    o << "t0 = " << (c.t0 ? format_real(*c.t0) : "auto") << '\n';
    o << "output_dir = " << c.output_dir << '\n';
    o << "threads = " << c.threads << '\n';
    o << "extra_resolutions = ";
    if (c.extra_resolutions.empty()) o << "none";
    for (std::size_t i = 0; i < c.extra_resolutions.size(); ++i) o << (i ? "; " : "") << c.extra_resolutions[i];
    o << '\n';
    return o.str();
}

}  // namespace bml
