#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <span>

#include "tsc/common/errors.hpp"
#include "tsc/experiment/evaluate.hpp"
#include "tsc/experiment/generate.hpp"
#include "tsc/neural/checkpoint.hpp"
#include "tsc/offline/collect.hpp"
#include "tsc/offline/trainer.hpp"

namespace py = pybind11;
using namespace tsc;

namespace {

sim::Scenario make_grid(int rows, int cols, const std::string& pattern, std::uint64_t seed, double episode_s) {
  experiment::GridSpec spec;
  spec.rows = rows;
  spec.cols = cols;
  spec.pattern = experiment::pattern_from_string(pattern);
  spec.seed = seed;
  spec.episode_s = episode_s;
  return experiment::generate_scenario(spec);
}

offline::OfflineDataset collect(const std::vector<sim::Scenario>& scenarios, const std::string& provenance,
                                int episodes, std::uint64_t seed) {
  offline::CollectOptions o;
  o.episodes = episodes;
  o.seed = seed;
  const auto p = offline::provenance_from_string(provenance);
  py::gil_scoped_release release;
  return offline::collect(scenarios, p, o);
}

std::pair<nn::QNetworkParams, std::vector<double>> train(const offline::OfflineDataset& data, int steps, int batch,
                                                         double alpha, double gamma, double lr, double reward_scale,
                                                         std::uint64_t seed) {
  offline::TrainerConfig c;
  c.gradient_steps = steps;
  c.batch_size = batch;
  c.alpha = alpha;
  c.gamma = gamma;
  c.learning_rate = lr;
  c.reward_scale = reward_scale;
  c.seed = seed;
  offline::TrainResult r = [&] {
    py::gil_scoped_release release;
    return offline::train(data, c);
  }();
  std::vector<double> losses;
  for (const auto& rec : r.log) losses.push_back(rec.loss);
  return {std::move(r.params), std::move(losses)};
}

std::vector<double> evaluate(const sim::Scenario& scenario, const std::string& policy,
                             std::optional<nn::QNetworkParams> params, int episodes, std::uint64_t seed) {
  std::shared_ptr<const nn::QNetworkParams> shared;
  if (params) shared = std::make_shared<const nn::QNetworkParams>(std::move(*params));
  auto p = experiment::make_policy(experiment::parse_policy_spec(policy), shared, seed);
  experiment::EvalOptions o;
  o.episodes = episodes;
  o.seed = seed;
  py::gil_scoped_release release;
  const auto rep = experiment::evaluate(scenario, *p, o);
  std::vector<double> out;
  for (const auto& ep : rep.episodes) out.push_back(ep.average_travel_time);
  return out;
}

}  // namespace

PYBIND11_MODULE(_tsc, m) {
  m.doc() = "Traffic signal simulation, offline dataset collection and conservative Q-learning";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

  py::class_<sim::Scenario>(m, "Scenario")
      .def_readonly("name", &sim::Scenario::name)
      .def_readonly("rows", &sim::Scenario::rows)
      .def_readonly("cols", &sim::Scenario::cols)
      .def_readonly("episode_s", &sim::Scenario::episode_s)
      .def_property_readonly("intersections", &sim::Scenario::intersection_count)
      .def("to_json", &sim::dump_scenario)
      .def("__repr__", [](const sim::Scenario& s) { return "<Scenario " + s.name + ">"; });

  m.def("grid_scenario", &make_grid, py::arg("rows"), py::arg("cols"), py::arg("pattern") = "uniform",
        py::arg("seed") = 0, py::arg("episode_s") = 3600.0);
  m.def("parse_scenario", [](const std::string& text) { return sim::parse_scenario(text); }, py::arg("text"));
  m.def("load_scenario", &sim::load_scenario, py::arg("path"));

  py::class_<offline::OfflineDataset>(m, "Dataset")
      .def("__len__", &offline::OfflineDataset::size)
      .def_property_readonly("provenance",
                             [](const offline::OfflineDataset& d) { return offline::to_string(d.provenance); })
      .def_property_readonly("actions",
                             [](const offline::OfflineDataset& d) {
                               std::vector<int> a;
                               for (const auto& t : d.transitions) a.push_back(t.a);
                               return a;
                             })
      .def_property_readonly("rewards",
                             [](const offline::OfflineDataset& d) {
                               std::vector<double> r;
                               for (const auto& t : d.transitions) r.push_back(t.r);
                               return r;
                             })
      .def("save", [](const offline::OfflineDataset& d, const std::filesystem::path& path) { offline::save_dataset(path, d); },
           py::arg("path"))
      .def("subsample", &offline::dataset_subsample, py::arg("fraction"), py::arg("seed") = 0);
  m.def("load_dataset", &offline::load_dataset, py::arg("path"));
  m.def("collect", &collect, py::arg("scenarios"), py::arg("provenance") = "cycle", py::arg("episodes") = 10,
        py::arg("seed") = 0);

  py::class_<nn::QNetworkParams>(m, "QNetwork")
      .def_static("init", &nn::QNetworkParams::init, py::arg("seed") = 0)
      .def("phase_scores",
           [](const nn::QNetworkParams& p, const std::vector<double>& state) { return nn::phase_scores(std::span<const double>(state), p); },
           py::arg("state"))
      .def("save", [](const nn::QNetworkParams& p, const std::filesystem::path& path) { nn::save_checkpoint(path, p); },
           py::arg("path"))
      .def("tensor_names", [](const nn::QNetworkParams& p) {
        std::vector<std::string> names;
        for (const auto& [name, _] : p.named()) names.push_back(name);
        return names;
      });
  m.def("load_checkpoint", &nn::load_checkpoint, py::arg("path"));

  m.def("train", &train, py::arg("dataset"), py::arg("steps") = 20000, py::arg("batch") = 256,
        py::arg("alpha") = 0.0005, py::arg("gamma") = 0.8, py::arg("lr") = 1e-3, py::arg("reward_scale") = 0.1,
        py::arg("seed") = 0, "Returns (network, per-step losses).");
  m.def("evaluate", &evaluate, py::arg("scenario"), py::arg("policy") = "fixed_time", py::arg("network") = py::none(),
        py::arg("episodes") = 5, py::arg("seed") = 0, "Average travel time per episode.");
}
