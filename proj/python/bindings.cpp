#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>
#include <optional>

#include "monofield/builtin_fields.hpp"
#include "monofield/field_io.hpp"
#include "monofield/levelset.hpp"
#include "monofield/monotonicity.hpp"
#include "monofield/pharmonic.hpp"
#include "monofield/pipeline.hpp"

namespace py = pybind11;
using namespace monofield;

namespace {

ScalarField field_from_values(int nx, int ny, double h, double x0, double y0,
                              const std::vector<std::optional<double>>& values) {
    if (static_cast<int>(values.size()) != nx * ny)
        throw Error("values must have nx*ny entries (None for out-of-domain nodes)");
    std::vector<std::uint8_t> mask(nx * ny, 0);
    std::vector<double> v(nx * ny, std::numeric_limits<double>::quiet_NaN());
    for (int n = 0; n < nx * ny; ++n) {
        if (!values[n].has_value()) continue;
        mask[n] = 1;
        v[n] = *values[n];
    }
    auto grid = std::make_shared<DomainGrid>(nx, ny, h, x0, y0, std::move(mask));
    return ScalarField(std::move(grid), std::move(v));
}

std::vector<std::optional<double>> field_values(const ScalarField& f) {
    std::vector<std::optional<double>> out(f.grid().node_count());
    for (int n = 0; n < f.grid().node_count(); ++n)
        if (f.grid().node_in(n)) out[n] = f[n];
    return out;
}

py::dict monotonicity_dict(const MonotonicityReport& r, const DomainGrid& g) {
    py::list witnesses;
    for (const auto& w : r.witnesses) {
        py::dict d;
        d["window"] = py::make_tuple(w.i0, w.j0, w.i1, w.j1);
        d["kind"] = w.is_max ? "max" : "min";
        d["node"] = py::make_tuple(g.node_i(w.node), g.node_j(w.node));
        d["interior_value"] = w.interior_value;
        d["boundary_extremum"] = w.boundary_extremum;
        witnesses.append(d);
    }
    py::dict out;
    out["monotone"] = r.monotone;
    out["method"] = to_string(r.method);
    out["tolerance"] = r.tolerance;
    out["witnesses"] = witnesses;
    return out;
}

py::dict levelset_dict(const LevelSetAnalysis& a) {
    py::list components;
    for (const auto& c : a.components) {
        py::dict d;
        d["class"] = to_string(c.classification);
        d["closed"] = c.closed;
        d["length"] = c.length;
        d["touches_boundary"] = c.touches_boundary;
        py::list pts;
        for (int k = 0; k < c.size(); ++k) pts.append(py::make_tuple(c.xs[k], c.ys[k]));
        d["points"] = pts;
        components.append(d);
    }
    py::dict out;
    out["t"] = a.t;
    out["components"] = components;
    out["junctions"] = a.junctions.size();
    out["total_length"] = a.total_length;
    out["regular"] = a.all_regular();
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "monotone scalar fields on planar grids: monotonicity certification, level-set "
              "topology, p-harmonic replacement, level-curve smoothing";

    py::register_exception<Error>(m, "MonofieldError");

    py::class_<ScalarField>(m, "ScalarField")
        .def_property_readonly("nx", [](const ScalarField& f) { return f.grid().nx(); })
        .def_property_readonly("ny", [](const ScalarField& f) { return f.grid().ny(); })
        .def_property_readonly("h", [](const ScalarField& f) { return f.grid().h(); })
        .def_property_readonly("origin",
                               [](const ScalarField& f) {
                                   return py::make_tuple(f.grid().x0(), f.grid().y0());
                               })
        .def("values", &field_values,
             "row-major node values, None outside the domain mask")
        .def("min", &ScalarField::min)
        .def("max", &ScalarField::max)
        .def("to_json", &field_to_json);

    m.def("builtin_field", &make_builtin, py::arg("name"), py::arg("resolution") = 128);
    m.def("field_from_values", &field_from_values, py::arg("nx"), py::arg("ny"), py::arg("h"),
          py::arg("x0"), py::arg("y0"), py::arg("values"));
    m.def("field_from_json", &field_from_json);

    m.def(
        "is_monotone",
        [](const ScalarField& f, const std::string& method, double tol) {
            const auto m_ = method == "exhaustive" ? MonotonicityMethod::ExhaustiveWindow
                                                   : MonotonicityMethod::LevelComponent;
            return monotonicity_dict(is_monotone(f, m_, tol), f.grid());
        },
        py::arg("field"), py::arg("method") = "level", py::arg("tolerance") = -1.0);
    m.def(
        "is_strictly_monotone",
        [](const ScalarField& f, double tol) {
            return monotonicity_dict(is_strictly_monotone(f, tol), f.grid());
        },
        py::arg("field"), py::arg("tolerance") = -1.0);
    m.def("local_extremal_values", &local_extremal_values);

    m.def(
        "extract_level_set",
        [](const ScalarField& f, double t) { return levelset_dict(extract_level_set(f, t)); },
        py::arg("field"), py::arg("t"));
    m.def(
        "coarea_check",
        [](const ScalarField& f, int n_levels) {
            const CoareaReport r = coarea_check(f, n_levels);
            py::dict out;
            out["lhs"] = r.lhs;
            out["rhs"] = r.rhs;
            out["rel_error"] = r.rel_error;
            return out;
        },
        py::arg("field"), py::arg("n_levels") = 64);
    m.def("select_regular_levels",
          [](const ScalarField& f, const std::vector<double>& targets, double jitter) {
              return select_regular_levels(f, targets, jitter);
          });

    m.def("p_energy", &p_energy, py::arg("field"), py::arg("p"));
    m.def("sup_distance", &sup_distance);
    m.def("lp_grad_distance", &lp_grad_distance);

    m.def(
        "approximate",
        [](const ScalarField& f, double eps, double p) {
            ApproximateResult res = approximate(f, eps, p);
            py::dict out;
            out["field"] = res.field;
            out["report"] = res.report.to_json();
            out["sup_dist"] = res.report.sup_dist_total;
            out["p_harmonic_fraction"] = res.report.p_harmonic_fraction;
            out["all_pass"] = res.report.all_pass();
            return out;
        },
        py::arg("field"), py::arg("eps") = 0.2, py::arg("p") = 2.0);
}
