#include "pscur/scenario.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace pscur;

namespace {

py::dict result_to_dict(const RunResult& rr) {
    py::dict d;
    d["name"] = rr.name;
    d["kind"] = rr.kind;
    d["hash"] = rr.hash;
    d["value"] = rr.value;
    d["estimate"] = rr.estimate;
    d["converged"] = rr.converged;
    d["flagged"] = rr.flagged;
    d["cells"] = rr.cells;
    d["pass"] = rr.pass;
    d["from_cache"] = rr.from_cache;
    d["exit_code"] = rr.exit_code();
    if (rr.has_routes) {
        d["lhs"] = rr.lhs;
        d["rhs"] = rr.rhs;
        d["defect"] = rr.defect;
    }
    if (!rr.cohom_checks.empty()) {
        py::list checks;
        for (const auto& c : rr.cohom_checks) checks.append(py::make_tuple(c.name, c.pass));
        d["cohom_checks"] = checks;
    }
    d["record"] = rr.record_text();
    return d;
}

RunOptions make_options(const std::string& out_dir, int workers, bool no_cache) {
    RunOptions o;
    o.out_dir = out_dir;
    o.workers = workers;
    o.no_cache = no_cache;
    return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "generalized Monge-Ampere products and pullbacks of pseudosmooth currents";

    m.def("list_oracles", &oracle_names, "names of the shipped paper-oracle suite");

    m.def(
        "run_oracle",
        [](const std::string& name, const std::string& out_dir, int workers, bool no_cache) {
            return result_to_dict(run_scenario(make_oracle(name), make_options(out_dir, workers,
                                                                               no_cache)));
        },
        py::arg("name"), py::arg("out_dir") = ".pscur-out", py::arg("workers") = 1,
        py::arg("no_cache") = false, py::call_guard<py::gil_scoped_release>());

    m.def(
        "run_scenario_text",
        [](const std::string& text, const std::string& out_dir, int workers, bool no_cache) {
            return result_to_dict(
                run_scenario(parse_scenario_text(text), make_options(out_dir, workers, no_cache)));
        },
        py::arg("text"), py::arg("out_dir") = ".pscur-out", py::arg("workers") = 1,
        py::arg("no_cache") = false, py::call_guard<py::gil_scoped_release>());

    m.def(
        "run_scenario_file",
        [](const std::string& path, const std::string& out_dir, int workers, bool no_cache) {
            return result_to_dict(
                run_scenario(parse_scenario_file(path), make_options(out_dir, workers, no_cache)));
        },
        py::arg("path"), py::arg("out_dir") = ".pscur-out", py::arg("workers") = 1,
        py::arg("no_cache") = false, py::call_guard<py::gil_scoped_release>());

    m.def("cohom_verify", []() {
        py::list out;
        for (const auto& c : cohom::verify_all()) out.append(py::make_tuple(c.name, c.pass));
        return out;
    });

    m.def(
        "poly_eval",
        [](const std::string& text, const std::vector<std::string>& vars,
           const std::vector<std::complex<double>>& point) {
            return parse_poly(text, vars).eval(point);
        },
        py::arg("text"), py::arg("vars"), py::arg("point"),
        "evaluate a polynomial given as infix text at a complex point");

    m.def(
        "poly_diff",
        [](const std::string& text, const std::vector<std::string>& vars, int var) {
            return parse_poly(text, vars).diff(var).str(vars);
        },
        py::arg("text"), py::arg("vars"), py::arg("var"),
        "formal partial derivative, returned as text");

    m.def("chi", &cutoff::chi, py::arg("t"), py::arg("deriv") = 0,
          "the fixed smooth cutoff profile and its derivatives");
}
