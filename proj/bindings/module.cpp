#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ionsim/config.hpp"
#include "ionsim/coupling.hpp"
#include "ionsim/experiments.hpp"
#include "ionsim/output.hpp"
#include "ionsim/seqlang.hpp"
#include "ionsim/version.hpp"
#include "ionsim/zeeman.hpp"

namespace py = pybind11;
using namespace ionsim;

namespace {

RunConfig make_config(const std::string& config_json) {
    if (config_json.empty()) return RunConfig{};
    return config_from_json(config_json);
}

py::dict fit_to_dict(const FitReport& fit) {
    py::dict d;
    d["model"] = fit.model;
    py::dict params, sigmas;
    for (std::size_t i = 0; i < fit.param_names.size(); ++i) {
        params[py::str(fit.param_names[i])] = fit.params[i];
        sigmas[py::str(fit.param_names[i])] = fit.sigmas[i];
    }
    d["params"] = params;
    d["sigmas"] = sigmas;
    d["residual_ss"] = fit.residual_ss;
    d["n_points"] = fit.n_points;
    d["dof"] = fit.dof;
    d["converged"] = fit.converged;
    d["flags"] = fit.flags;
    return d;
}

py::dict scan_to_dict(const std::string& name, const ScanResult& res) {
    py::dict d;
    d["name"] = name;
    d["axis"] = scan_axis_name(res.axis);
    d["unit"] = scan_axis_unit(res.axis);
    d["readout"] = res.readout == Readout::BrightFraction ? "bright_fraction" : "mean_phonon";
    py::list points;
    for (const ScanPoint& p : res.points) {
        points.append(py::make_tuple(p.value, p.stat, p.stderr_, p.shots));
    }
    d["points"] = points;
    return d;
}

std::vector<DataPoint> to_points(const std::vector<std::tuple<double, double, double>>& raw) {
    std::vector<DataPoint> pts;
    pts.reserve(raw.size());
    for (const auto& [x, y, s] : raw) pts.push_back(DataPoint{x, y, s > 0.0 ? s : 1.0});
    return pts;
}

}  // namespace

PYBIND11_MODULE(_ionsim, m) {
    m.doc() = "trapped-ion qubit coherence simulator core";

    py::register_exception<seq::SeqError>(m, "SeqError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<SequenceError>(m, "SequenceError", PyExc_ValueError);
    py::register_exception<FitError>(m, "FitError", PyExc_ValueError);

    m.attr("__version__") = kVersion;

    m.def("default_config", [] { return config_to_json(RunConfig{}); },
          "complete default configuration as JSON");
    m.def("config_hash",
          [](const std::string& config_json) { return config_hash(make_config(config_json)); },
          py::arg("config_json") = std::string());

    m.def("parse_program",
          [](const std::string& text) { return pretty_print(seq::parse(text)); },
          py::arg("text"), "parse a pulse program and return its canonical form");

    m.def("validate_program",
          [](const std::string& text, const std::string& config_json) {
              const RunConfig cfg = make_config(config_json);
              const auto blocks = seq::validate(seq::parse(text), cfg);
              py::list out;
              for (const auto& b : blocks) {
                  py::dict d;
                  d["name"] = b.name;
                  d["axis"] = scan_axis_name(b.scan.axis);
                  d["points"] = b.scan.values.size();
                  d["shots"] = b.shots;
                  d["warnings"] = b.warnings;
                  out.append(d);
              }
              return out;
          },
          py::arg("text"), py::arg("config_json") = std::string());

    m.def("run_program",
          [](const std::string& text, const std::string& config_json, py::object seed,
             py::object shots, py::object workers) {
              RunConfig cfg = make_config(config_json);
              if (!seed.is_none()) cfg.master_seed = seed.cast<std::uint64_t>();
              if (!shots.is_none()) cfg.shots_per_point = shots.cast<long>();
              if (!workers.is_none()) cfg.workers = workers.cast<int>();
              validate_config(cfg);
              const auto blocks = seq::validate(seq::parse(text), cfg);
              py::list out;
              std::uint64_t stream = 0;
              for (const auto& b : blocks) {
                  const long n = shots.is_none() ? b.shots : cfg.shots_per_point;
                  ScanResult res;
                  {
                      py::gil_scoped_release release;
                      res = run_scan(b.sequence, b.scan, cfg, cfg.master_seed, stream, n,
                                     cfg.workers);
                  }
                  out.append(scan_to_dict(b.name, res));
                  ++stream;
              }
              return out;
          },
          py::arg("text"), py::arg("config_json") = std::string(), py::arg("seed") = py::none(),
          py::arg("shots") = py::none(), py::arg("workers") = py::none());

    m.def("figure_names", &figure_names);
    m.def("run_figure",
          [](const std::string& name, const std::string& config_json) {
              const RunConfig cfg = make_config(config_json);
              ExperimentResult res;
              {
                  py::gil_scoped_release release;
                  res = run_figure(name, cfg);
              }
              py::dict d;
              d["name"] = res.name;
              d["summary"] = res.summary;
              py::dict tables;
              for (const Table& t : res.tables) {
                  py::dict td;
                  td["columns"] = t.columns;
                  td["rows"] = t.rows;
                  tables[py::str(t.name)] = td;
              }
              d["tables"] = tables;
              py::list fits;
              for (const FitReport& f : res.fits) fits.append(fit_to_dict(f));
              d["fits"] = fits;
              d["meta"] = res.meta;
              return d;
          },
          py::arg("name"), py::arg("config_json") = std::string());

    m.def("fit",
          [](const std::string& model, const std::vector<std::tuple<double, double, double>>& raw,
             double tau_us) {
              const std::vector<DataPoint> pts = to_points(raw);
              FitReport fit;
              if (model == "line-center") {
                  if (tau_us <= 0.0) throw FitError("model 'line-center' needs tau_us > 0");
                  fit = fit_line_center(pts, tau_us);
              } else if (model == "fringe") {
                  fit = fit_fringe(pts);
              } else if (model == "contrast-decay" || model == "gaussian-vs-exponential") {
                  fit = fit_contrast_decay(pts);
              } else if (model == "sine-drift") {
                  fit = fit_sine_drift(pts);
              } else if (model == "exponential") {
                  fit = fit_exponential_decay(pts);
              } else if (model == "linear") {
                  fit = fit_linear(pts);
              } else {
                  throw FitError("unknown model '" + model + "'");
              }
              return fit_to_dict(fit);
          },
          py::arg("model"), py::arg("points"), py::arg("tau_us") = -1.0);

    // Small physics helpers, handy for notebook-side checks.
    m.def("susceptibility_khz_per_mgauss",
          [](const std::string& from_level, int from_m2, const std::string& to_level, int to_m2) {
              const auto lv = [](const std::string& s) {
                  if (s == "S") return Level::S;
                  if (s == "D") return Level::D;
                  throw std::invalid_argument("level must be 'S' or 'D'");
              };
              return susceptibility_khz_per_mgauss(make_zeeman(lv(from_level), from_m2),
                                                   make_zeeman(lv(to_level), to_m2));
          },
          py::arg("from_level"), py::arg("from_m2"), py::arg("to_level"), py::arg("to_m2"));
    m.def("motional_element",
          [](const std::string& sideband, double eta, long n) {
              Sideband sb;
              if (sideband == "carrier") {
                  sb = Sideband::Carrier;
              } else if (sideband == "blue") {
                  sb = Sideband::Blue;
              } else if (sideband == "red") {
                  sb = Sideband::Red;
              } else {
                  throw std::invalid_argument("sideband must be carrier, blue, or red");
              }
              return motional_element(sb, eta, n);
          },
          py::arg("sideband"), py::arg("eta"), py::arg("n"));
}
