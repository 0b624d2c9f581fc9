#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <memory>

#include "bml/boettcher.hpp"
#include "bml/error.hpp"
#include "bml/experiment.hpp"
#include "bml/io_format.hpp"
#include "bml/metric.hpp"

namespace py = pybind11;
using namespace bml;

namespace {

// Python side: a complex number, or None for the point at infinity.
ComplexPoint to_point(const py::object& o) {
    if (o.is_none()) return ComplexPoint::infinity();
    return ComplexPoint::from_z(o.cast<cplx>());
}

py::object from_point(const ComplexPoint& p) {
    if (p.canonical().is_infinity()) return py::none();
    return py::cast(p.z());
}

// A labeled basin raster with its distance field and lazily built component graphs.
class Basin {
public:
    Basin(const RationalMap& map, const py::object& attractor, int resolution, int threads) {
        GridSpec spec;
        spec.resolution = resolution;
        grid_ = build_basin_grid(map, to_point(attractor), spec, threads);
    }

    int resolution() const { return grid_.resolution(); }
    int component_count() const { return grid_.component_count(); }
    std::vector<std::int64_t> component_sizes() const {
        const auto& s = grid_.component_sizes();
        return {s.begin() + 1, s.end()};
    }
    std::size_t member_cells() const { return grid_.member_count_owned(); }

    py::array_t<std::int32_t> components() const {
        const int r = grid_.resolution();
        py::array_t<std::int32_t> out({2, r, r});
        auto v = out.mutable_unchecked<3>();
        for (int c = 0; c < 2; ++c)
            for (int y = 0; y < r; ++y)
                for (int x = 0; x < r; ++x) v(c, y, x) = grid_.component(grid_.cell_id(static_cast<Chart>(c), x, y));
        return out;
    }

    py::object locate(const py::object& z) const {
        const CellId cell = grid_.owning_cell(to_point(z));
        if (!grid_.member(cell)) return py::none();
        return py::cast(grid_.component(cell));
    }

    double boundary_distance(const py::object& z) const { return grid_.boundary_distance(bml::locate(grid_, to_point(z)).cell); }

    double distance(const py::object& a, const py::object& b) {
        const Location la = bml::locate(grid_, to_point(a)), lb = bml::locate(grid_, to_point(b));
        if (la.component != lb.component) throw Error(ErrorKind::DisconnectedPair, "points lie in different components");
        return quasihyperbolic_distance(graph(la.component), grid_, la.cell, lb.cell).value;
    }

private:
    const MetricGraph& graph(int comp) {
        auto it = graphs_.find(comp);
        if (it == graphs_.end()) it = graphs_.emplace(comp, build_metric_graph(grid_, comp)).first;
        return it->second;
    }

    SphereGrid grid_;
    std::map<int, MetricGraph> graphs_;
};

py::dict summary(const ExperimentReport& r) {
    py::dict d;
    d["scenario_id"] = r.config.scenario_id;
    d["attracting_point"] = from_point(r.attracting);
    d["base_point"] = from_point(r.base);
    d["component_total"] = r.component_total;
    d["tree_effective_depth"] = r.tree_effective_depth;
    d["tree_nodes"] = r.tree_check.nodes;
    d["tree_ok"] = r.tree_check.ok();
    d["max_C"] = r.max_C;
    d["max_C_by_depth"] = r.max_C_by_depth;
    d["unresolved"] = r.unresolved_total();
    py::list comps;
    for (const ComponentRecord& c : r.components) {
        py::dict e;
        e["component_id"] = c.component_id;
        e["cells"] = c.cells;
        e["samples_used"] = c.samples_used;
        e["unresolved"] = c.unresolved;
        e["empirical_C"] = c.empirical_C;
        e["mean_distance"] = c.mean_distance;
        e["C_by_depth"] = c.C_by_depth;
        comps.append(e);
    }
    d["components"] = comps;
    if (r.lemma) {
        d["coverage"] = r.lemma->final().fraction();
        d["t0"] = r.lemma->t0;
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Basins of rational maps, backward orbit trees and grid quasi-hyperbolic distances.";
    py::register_exception<Error>(m, "BmlError", PyExc_RuntimeError);

    py::class_<RationalMap>(m, "RationalMap")
        .def(py::init([](const std::vector<cplx>& num, const std::vector<cplx>& den) {
                 return RationalMap::parse(num, den);
             }),
             py::arg("num_coeffs"), py::arg("den_coeffs") = std::vector<cplx>{1.0})
        .def_property_readonly("degree", &RationalMap::degree)
        .def_property_readonly("is_polynomial", &RationalMap::is_polynomial)
        .def("__call__", [](const RationalMap& f, const py::object& z) { return from_point(f.evaluate(to_point(z))); })
        .def("fixed_points",
             [](const RationalMap& f) {
                 py::list out;
                 for (const FixedPointInfo& p : fixed_points(f)) {
                     py::dict d;
                     d["point"] = from_point(p.location);
                     d["multiplier"] = p.multiplier;
                     d["kind"] = to_string(p.kind);
                     d["multiplicity"] = p.multiplicity;
                     out.append(d);
                 }
                 return out;
             })
        .def("critical_points",
             [](const RationalMap& f) {
                 py::list out;
                 for (const ComplexPoint& c : critical_points(f)) out.append(from_point(c));
                 return out;
             })
        .def("preimages", [](const RationalMap& f, const py::object& z) {
            py::list out;
            for (const Preimage& q : preimages(f, to_point(z))) out.append(py::make_tuple(from_point(q.point), q.multiplicity));
            return out;
        });

    m.def("disk_reference_distance", &disk_reference_distance, py::arg("z1"), py::arg("z2"));
    m.def(
        "greens_function", [](const RationalMap& f, const py::object& z) { return greens_at(f, to_point(z)); },
        py::arg("map"), py::arg("z"));
    m.def(
        "spherical_distance",
        [](const py::object& a, const py::object& b) { return spherical_distance(to_point(a), to_point(b)); });

    py::class_<Basin>(m, "Basin")
        .def(py::init<const RationalMap&, const py::object&, int, int>(), py::arg("map"), py::arg("attractor"),
             py::arg("resolution") = 512, py::arg("threads") = 0)
        .def_property_readonly("resolution", &Basin::resolution)
        .def_property_readonly("component_count", &Basin::component_count)
        .def_property_readonly("component_sizes", &Basin::component_sizes)
        .def_property_readonly("member_cells", &Basin::member_cells)
        .def("components", &Basin::components, "labels as an array of shape (2, res, res): chart, row (imag), column (real)")
        .def("locate", &Basin::locate, "component of a point, None outside the basin")
        .def("boundary_distance", &Basin::boundary_distance)
        .def("distance", &Basin::distance, "grid quasi-hyperbolic distance between two points of one component");

    m.def(
        "echo_config", [](const std::string& text) { return echo_config(parse_config(text)); }, py::arg("text"));
    m.def(
        "run_experiment",
        [](const std::string& text, const std::optional<std::filesystem::path>& out_dir) {
            const Experiment ex = run_experiment(parse_config(text));
            if (out_dir) emit_outputs(ex, *out_dir);
            return summary(ex.report);
        },
        py::arg("config_text"), py::arg("out_dir") = py::none(),
        "run a scenario given as configuration text; outputs are written when out_dir is set");
    m.attr("VERSION_LINE") = kVersionLine;
}
