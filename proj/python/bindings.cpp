#include "localboost/boost.hpp"
#include "localboost/error.hpp"
#include "localboost/harness.hpp"
#include "localboost/localize.hpp"
#include "localboost/weighting.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace localboost;

namespace {

RunConfig config_from(const std::string& json_text) { return parse_run_config(Json::parse(json_text)); }

std::span<const double> as_span(const std::vector<double>& v) { return {v.data(), v.size()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "localized boosting over weakly labeled data";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);
  py::register_exception<GroupingError>(m, "GroupingError", PyExc_ValueError);

  m.def("estimate_alpha", &estimate_alpha, py::arg("err"));
  m.def(
      "update_data_weights",
      [](const std::vector<double>& w, double alpha, const std::vector<int>& preds, const std::vector<int>& labels) {
        return update_data_weights(as_span(w), alpha, preds, labels);
      },
      py::arg("w"), py::arg("alpha"), py::arg("preds"), py::arg("labels"));
  m.def(
      "perturb_weights",
      [](const std::vector<double>& v, std::size_t n_p, double mu, double sigma, std::uint64_t seed) {
        return perturb_weights(as_span(v), n_p, mu, sigma, seed);
      },
      py::arg("v"), py::arg("n_p"), py::arg("mu"), py::arg("sigma"), py::arg("seed"));
  m.def(
      "clean_error",
      [](const Eigen::MatrixXd& scores, const std::vector<int>& gold) { return clean_error(scores, gold); },
      py::arg("scores"), py::arg("gold"));

  m.def(
      "avg_pairwise_distance",
      [](const Features& x, std::uint64_t seed) { return avg_pairwise_distance(x, seed).value; }, py::arg("x"),
      py::arg("seed") = 0);
  m.def(
      "sample_cluster",
      [](const std::vector<double>& anchor, const Features& pool, double radius, std::size_t n_min) {
        const auto c = sample_cluster(as_span(anchor), pool, radius, n_min);
        return py::make_tuple(c.members, c.fallback);
      },
      py::arg("anchor"), py::arg("pool"), py::arg("radius"), py::arg("n_min") = kDefaultMinCluster);

  m.def("prop1", []() { return prop1_counterexample().to_json().dump(); });

  m.def(
      "train",
      [](const std::string& config_json, std::uint64_t seed, const std::filesystem::path& out_dir) {
        return train_run(config_from(config_json), seed, out_dir).dump();
      },
      py::arg("config_json"), py::arg("seed"), py::arg("out_dir"), "Trains one run; returns the report as JSON text.");
  m.def(
      "sweep",
      [](const std::string& config_json, const std::vector<std::uint64_t>& seeds) {
        return seed_sweep(config_from(config_json), seeds).to_json().dump();
      },
      py::arg("config_json"), py::arg("seeds"));
  m.def(
      "predict",
      [](const std::filesystem::path& ensemble_file, const Features& x, const LabelMatrix& lf_rows) {
        const auto e = Ensemble::from_json(read_json_file(ensemble_file), ensemble_file.parent_path());
        return e.predict(x, lf_rows);
      },
      py::arg("ensemble_file"), py::arg("x"), py::arg("lf_rows") = LabelMatrix());
}
