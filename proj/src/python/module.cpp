#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sib/cli/commands.hpp"
#include "sib/error.hpp"
#include "sib/gamin/gamin.hpp"
#include "sib/metrics/metrics.hpp"
#include "sib/spike/encode.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

sib::Tensor2D to_tensor(const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw sib::DimensionError("expected a 2-D array");
  sib::Tensor2D t(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), t.values().begin());
  return t;
}

py::array_t<float> to_array(const sib::Tensor2D& t) {
  py::array_t<float> out({t.rows(), t.cols()});
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

sib::cli::RunConfig parse(const std::string& text) { return sib::cli::parse_run_config(json::parse(text)); }

std::vector<sib::cli::RunConfig> parse_all(const std::vector<std::string>& texts) {
  std::vector<sib::cli::RunConfig> out;
  for (const auto& t : texts) out.push_back(parse(t));
  return out;
}

py::dict report_dict(const sib::metrics::AttackReport& r) {
  py::dict d;
  d["dataset"] = r.dataset;
  d["model_type"] = r.model_type;
  d["labels"] = r.labels;
  d["seeds"] = r.seeds;
  d["m_global"] = r.m_global;
  d["m_global_sd"] = r.m_global_sd ? py::cast(*r.m_global_sd) : py::none();
  d["fidelity"] = r.fidelity;
  d["surrogate_accuracy"] = r.surrogate_accuracy;
  d["surrogate_accuracy_sd"] = r.surrogate_accuracy_sd ? py::cast(*r.surrogate_accuracy_sd) : py::none();
  d["combined_accuracy"] = r.combined_accuracy;
  d["target_accuracy"] = r.target_accuracy;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core: config handling, experiment commands and metric helpers";
  m.attr("__version__") = sib::cli::kVersion;

  auto base = py::register_exception<sib::Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<sib::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<sib::DataError>(m, "DataError", base.ptr());
  py::register_exception<sib::BudgetError>(m, "BudgetError", base.ptr());
  py::register_exception<sib::TrainingError>(m, "TrainingError", base.ptr());
  py::register_exception<sib::ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<sib::DimensionError>(m, "DimensionError", base.ptr());

  m.def("configure_logging", &sib::cli::configure_logging);

  m.def(
      "materialize_config", [](const std::string& text) { return sib::cli::to_json(parse(text)).dump(); },
      "Validates a JSON config and returns it with every default filled in.");
  m.def(
      "config_hash", [](const std::string& text) { return sib::cli::config_hash(parse(text)); },
      "Hash of the materialized config.");
  m.def("parse_label_list", &sib::cli::parse_label_list);

  m.def(
      "train_target",
      [](const std::string& text) {
        sib::cli::TrainOutcome r;
        {
          py::gil_scoped_release release;
          r = sib::cli::train_target(parse(text));
        }
        py::dict d;
        d["test_accuracy"] = r.test_accuracy;
        d["checkpoint"] = r.checkpoint.string();
        return d;
      },
      py::arg("config"));

  m.def(
      "attack",
      [](const std::string& text, std::size_t parallel, bool resume) {
        sib::cli::AttackOutcome r;
        {
          py::gil_scoped_release release;
          r = sib::cli::attack(parse(text), {parallel, resume});
        }
        py::list jobs;
        for (const auto& j : r.jobs) {
          py::dict d;
          d["label"] = j.label;
          d["seed"] = j.seed;
          d["batches_run"] = j.batches_run;
          d["queries_used"] = j.queries_used;
          d["budget_exhausted"] = j.budget_exhausted;
          d["best_m_global"] = j.best_m_global;
          jobs.append(d);
        }
        return jobs;
      },
      py::arg("config"), py::arg("parallel") = 1, py::arg("resume") = false);

  m.def(
      "evaluate",
      [](const std::vector<std::string>& texts, const std::string& out_dir) {
        sib::cli::EvaluateOutcome r;
        {
          py::gil_scoped_release release;
          r = sib::cli::evaluate(parse_all(texts), out_dir);
        }
        py::dict d;
        d["text"] = r.rendered.text;
        d["csv"] = r.rendered.csv;
        py::list reports;
        for (const auto& rep : r.reports) reports.append(report_dict(rep));
        d["reports"] = reports;
        return d;
      },
      py::arg("configs"), py::arg("out_dir") = "");

  m.def(
      "reconstruct",
      [](const std::vector<std::string>& texts, const std::string& out_dir) {
        std::vector<std::string> grids;
        {
          py::gil_scoped_release release;
          for (const auto& g : sib::cli::reconstruct(parse_all(texts), out_dir).grids) grids.push_back(g.string());
        }
        return grids;
      },
      py::arg("configs"), py::arg("out_dir") = "");

  m.def(
      "fidelity_of",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& target,
         const py::array_t<float, py::array::c_style | py::array::forcecast>& surrogate) {
        return sib::metrics::fidelity_of(to_tensor(target), to_tensor(surrogate));
      },
      "1 − mean absolute difference between two probability matrices.");

  m.def(
      "update_k",
      [](double k, double lambda_k, double gamma_k, double loss_xs, double loss_xg) {
        return sib::gamin::update_k({k, lambda_k, gamma_k}, loss_xs, loss_xg).k;
      },
      py::arg("k"), py::arg("lambda_k"), py::arg("gamma_k"), py::arg("loss_xs"), py::arg("loss_xg"));

  m.def(
      "m_global",
      [](double loss_xs, double loss_xg, double gamma_k, const std::string& mode) {
        sib::gamin::EquilibriumState eq;
        eq.gamma_k = gamma_k;
        return sib::gamin::compute_m_global(loss_xs, loss_xg, eq, sib::gamin::parse_m_global_mode(mode));
      },
      py::arg("loss_xs"), py::arg("loss_xg"), py::arg("gamma_k") = 0.5, py::arg("mode") = "began");

  m.def(
      "rate_encode",
      [](const py::array_t<float, py::array::c_style | py::array::forcecast>& image, std::size_t steps,
         std::uint64_t seed) {
        if (image.ndim() != 1) throw sib::DimensionError("rate_encode expects a 1-D image");
        sib::Rng rng(seed);
        return to_array(sib::spike::rate_encode({image.data(), static_cast<std::size_t>(image.size())}, steps, rng).bits);
      },
      py::arg("image"), py::arg("steps"), py::arg("seed") = 0, "Bernoulli spike train, steps × d.");
}
