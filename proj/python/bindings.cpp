#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jetlab/harness.hpp"

namespace py = pybind11;
using namespace jetlab;

namespace {

json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error("parse", e.what());
  }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "jetlab core: config validation, experiment runs and exact jet helpers";

  static py::exception<Error> exc(m, "JetlabError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(exc.ptr(), (e.code() + ": " + e.what()).c_str());
    }
  });

  m.def("version", &tool_version);
  m.def("schema", [] { return config_schema().dump(); });
  m.def("modes", &experiment_modes);
  m.def("validate", [](const std::string& text) { parse_config(parse_text(text)); },
        "Raise JetlabError if the config (JSON text) is invalid.");
  m.def("config_hash", [](const std::string& text) { return hash_hex(config_hash(parse_text(text))); });
  m.def(
      "run",
      [](const std::string& text, std::optional<std::string> out_dir, std::optional<double> grid_scale, bool exact) {
        ExperimentConfig cfg = parse_config(parse_text(text));
        RunOptions opt;
        opt.out_dir = std::move(out_dir);
        opt.grid_scale = grid_scale;
        opt.exact = exact;
        RunManifest man;
        {
          py::gil_scoped_release release;
          man = run_experiment(cfg, opt);
        }
        return man.to_json().dump();
      },
      py::arg("config"), py::arg("out_dir") = py::none(), py::arg("grid_scale") = py::none(), py::arg("exact") = false,
      "Run an experiment; returns the manifest as JSON text.");
  m.def(
      "power_sum",
      [](const std::vector<int>& beta, int dim, int r) {
        auto p = power_sum_expand(beta, dim, r);
        std::vector<std::pair<std::vector<int>, std::string>> out;
        for (std::size_t i = 0; i < p.size(); ++i)
          if (p[i] != 0) out.push_back({p.layout().index(i), p[i].get_str()});
        return out;
      },
      py::arg("beta"), py::arg("m"), py::arg("r"),
      "Nonzero coefficients of (X_b1 + ... + X_bk)^r as (exponent, 'p/q') pairs.");
  m.def(
      "taylor",
      [](const std::string& expr, const std::vector<double>& x, int order) {
        Field f = parse_field_expression(parse_text(expr), static_cast<int>(x.size()));
        Jet<double> j = f.jet(x, order);
        std::vector<std::vector<double>> out;
        for (int c = 0; c < j.n(); ++c) {
          std::vector<double> d;
          for (std::size_t i = 0; i < j.components[c].size(); ++i) d.push_back(j.derivative(c, i));
          out.push_back(std::move(d));
        }
        return out;
      },
      py::arg("expr"), py::arg("x"), py::arg("order"),
      "Derivatives D_alpha of a field at x, graded-lex order, one list per component.");
  m.def("multi_indices", &enumerate_multiindices, py::arg("m"), py::arg("r"));
}
