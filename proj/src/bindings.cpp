#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "plrecon/pipelines.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
  m.doc() = "core bindings for the p-Laplace boundary recovery toolkit";

  py::register_exception<plr::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<plr::ExtrapolationError>(m, "ExtrapolationError");
  py::register_exception<plr::SolveError>(m, "SolveError");

  m.def(
      "run",
      [](const std::string& path) {
        plr::ExperimentConfig c = plr::parse_config_file(path);
        std::string summary, csv;
        int code = plr::run_pipeline(c, &summary, &csv);
        return py::make_tuple(code, summary, csv);
      },
      py::arg("config_path"),
      "execute the configured pipeline; returns (exit_code, summary, csv)");

  m.def(
      "run_text",
      [](const std::string& text) {
        plr::ExperimentConfig c = plr::parse_config_text(text);
        std::string summary, csv;
        int code = plr::run_pipeline(c, &summary, &csv);
        return py::make_tuple(code, summary, csv);
      },
      py::arg("config_text"),
      "same as run(), but the config is passed as text");

  m.def(
      "describe",
      [](const std::string& path) {
        return plr::describe_pipeline(plr::parse_config_file(path));
      },
      py::arg("config_path"), "resolved experiment plan; performs no solves");

  m.def(
      "describe_text",
      [](const std::string& text) {
        return plr::describe_pipeline(plr::parse_config_text(text));
      },
      py::arg("config_text"));

  m.def(
      "print_config",
      [](const std::string& text) {
        return plr::print_config(plr::parse_config_text(text));
      },
      py::arg("config_text"), "canonical round-trip of a config");

  m.def("esti01_max_ratio", &plr::esti01_max_ratio, py::arg("p"),
        py::arg("samples") = 10000, py::arg("seed") = 1,
        "max sampled ratio |a|b|^{p-2} - c|c|^{p-2}| / (|a|+|c|)^{p-2}|a-c|");

  m.def(
      "extrapolate_limit",
      [](const std::vector<double>& param,
         const std::vector<std::complex<double>>& value,
         std::optional<double> q_hint) {
        plr::LimitSeries in;
        in.param = param;
        in.value = value;
        plr::LimitSeries s = plr::extrapolate(in, q_hint);
        py::dict d;
        d["limit"] = s.limit();
        d["q"] = s.q;
        d["slope"] = s.b;
        d["residual"] = s.residual;
        d["spread"] = s.spread;
        d["confident"] = s.confident;
        if (s.richardson_used) d["richardson"] = s.richardson;
        return d;
      },
      py::arg("param"), py::arg("value"), py::arg("q_hint") = py::none(),
      "fit value ~ a + b*param^q and report the limit a");

  m.attr("__version__") = "0.1.0";
}
