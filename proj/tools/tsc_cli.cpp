// tsc: scenario generation, dataset collection, offline training and
// evaluation from the command line.
//
// Exit codes: 0 ok, 2 configuration error, 3 numeric failure.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsc/common/errors.hpp"
#include "tsc/experiment/ablate.hpp"
#include "tsc/experiment/evaluate.hpp"
#include "tsc/experiment/generate.hpp"
#include "tsc/neural/checkpoint.hpp"
#include "tsc/offline/collect.hpp"
#include "tsc/offline/dataset.hpp"
#include "tsc/offline/trainer.hpp"
#include "tsc/simcore/trajectory.hpp"

namespace {

using namespace tsc;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct GenArgs {
  int rows = 1;
  int cols = 1;
  std::string pattern = "uniform";
  std::uint64_t seed = 0;
  double demand_scale = 1.0;
  double episode_s = 3600.0;
  std::string arrivals = "poisson";
  std::string out;
};

struct CollectArgs {
  std::vector<std::string> scenarios;
  std::string provenance = "cycle";
  int episodes = 10;
  int random_every = 20;
  std::optional<std::size_t> cap;
  std::uint64_t seed = 0;
  std::string out;
};

struct TrainerArgs {
  double alpha = 0.0005;
  double gamma = 0.8;
  int steps = 20000;
  int batch = 256;
  double lr = 1e-3;
  int target_sync = 500;
  double reward_scale = 0.1;

  offline::TrainerConfig config(std::uint64_t seed) const {
    offline::TrainerConfig c;
    c.alpha = alpha;
    c.gamma = gamma;
    c.gradient_steps = steps;
    c.batch_size = batch;
    c.learning_rate = lr;
    c.target_sync_interval = target_sync;
    c.reward_scale = reward_scale;
    c.seed = seed;
    return c;
  }
};

struct TrainArgs {
  std::string dataset;
  TrainerArgs trainer;
  double fraction = 1.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string loss;
  bool quiet = false;
};

struct EvalArgs {
  std::vector<std::string> scenarios;
  std::string policy = "fixed_time";
  std::string checkpoint;
  int episodes = 5;
  std::uint64_t seed = 0;
  std::string out;
  std::string trajectory;
};

struct AblateArgs {
  std::string mode = "fractions";
  std::vector<std::string> scenarios;
  std::vector<double> fractions = {1.0, 0.5, 0.1, 0.01};
  int episodes = 5;
  int collect_episodes = 10;
  int repeats = 3;
  bool atc = false;
  TrainerArgs trainer;
  std::uint64_t seed = 0;
  std::string out;
};

void add_trainer_flags(CLI::App* cmd, TrainerArgs& t) {
  cmd->add_option("--alpha", t.alpha, "CQL regularizer weight")->capture_default_str();
  cmd->add_option("--gamma", t.gamma, "discount factor")->capture_default_str();
  cmd->add_option("--steps", t.steps, "gradient steps")->capture_default_str();
  cmd->add_option("--batch", t.batch, "minibatch size")->capture_default_str();
  cmd->add_option("--lr", t.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--target-sync", t.target_sync, "steps between target network copies")->capture_default_str();
  cmd->add_option("--reward-scale", t.reward_scale, "multiplier applied to rewards")->capture_default_str();
}

std::vector<sim::Scenario> load_scenarios(const std::vector<std::string>& paths) {
  std::vector<sim::Scenario> out;
  for (const auto& p : paths) out.push_back(sim::load_scenario(p));
  return out;
}

void write_text(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  fn(f);
}

int run_gen(const GenArgs& a) {
  experiment::GridSpec spec;
  spec.rows = a.rows;
  spec.cols = a.cols;
  spec.pattern = experiment::pattern_from_string(a.pattern);
  spec.seed = a.seed;
  spec.demand_scale = a.demand_scale;
  spec.episode_s = a.episode_s;
  if (a.arrivals == "poisson") spec.arrivals = sim::ArrivalProcess::Poisson;
  else if (a.arrivals == "uniform") spec.arrivals = sim::ArrivalProcess::Uniform;
  else throw ConfigError("arrivals must be uniform or poisson");
  const sim::Scenario sc = experiment::generate_scenario(spec);
  sim::save_scenario(sc, a.out);
  std::cout << "wrote " << a.out << ": " << sc.name << ", " << sc.intersection_count() << " intersections, "
            << sc.flows.size() << " flows\n";
  return kExitOk;
}

int run_collect(const CollectArgs& a) {
  const auto scenarios = load_scenarios(a.scenarios);
  offline::CollectOptions opt;
  opt.episodes = a.episodes;
  opt.random_every = a.random_every;
  opt.per_scenario_cap = a.cap;
  opt.seed = a.seed;
  const offline::Provenance prov = offline::provenance_from_string(a.provenance);
  const offline::OfflineDataset data = offline::collect(scenarios, prov, opt);
  offline::save_dataset(a.out, data);

  std::vector<std::size_t> per_scenario(scenarios.size(), 0);
  for (const auto& tr : data.transitions) ++per_scenario[tr.scenario_id];
  for (std::size_t i = 0; i < scenarios.size(); ++i)
    std::cout << scenarios[i].name << ": " << per_scenario[i] << " transitions\n";
  std::cout << "total: " << data.size() << " transitions (" << offline::to_string(prov) << ") -> " << a.out << '\n';
  return kExitOk;
}

int run_train(const TrainArgs& a) {
  const offline::TrainerConfig cfg = a.trainer.config(a.seed);
  offline::validate(cfg);
  offline::OfflineDataset data = offline::load_dataset(a.dataset);
  if (a.fraction != 1.0) data = offline::dataset_subsample(data, a.fraction, experiment::subsample_seed(a.seed));
  std::cout << "training on " << data.size() << " transitions, alpha=" << cfg.alpha << " gamma=" << cfg.gamma
            << " steps=" << cfg.gradient_steps << " batch=" << cfg.batch_size << '\n';

  const int report_every = std::max(1, cfg.gradient_steps / 20);
  auto progress = [&](const offline::LossRecord& r) {
    if (!a.quiet && r.step % report_every == 0)
      std::cout << "step " << r.step << " loss " << r.loss << " td " << r.td << " cql " << r.cql << '\n';
  };
  const offline::TrainResult result = offline::train(data, cfg, progress);
  nn::save_checkpoint(a.out, result.params);
  if (!a.loss.empty()) offline::save_loss_csv(a.loss, result.log);
  std::cout << "wrote checkpoint " << a.out << '\n';
  return kExitOk;
}

int run_eval(const EvalArgs& a) {
  const experiment::PolicySpec spec = experiment::parse_policy_spec(a.policy);
  std::shared_ptr<const nn::QNetworkParams> params;
  if (spec.needs_checkpoint()) {
    if (a.checkpoint.empty()) throw ConfigError("policy '" + a.policy + "' needs --checkpoint");
    params = std::make_shared<const nn::QNetworkParams>(nn::load_checkpoint(a.checkpoint));
  }
  experiment::EvalOptions opt;
  opt.episodes = a.episodes;
  opt.seed = a.seed;

  std::vector<experiment::EvalReport> reports;
  for (const auto& sc : load_scenarios(a.scenarios)) {
    auto policy = experiment::make_policy(spec, params, a.seed);
    reports.push_back(experiment::evaluate(sc, *policy, opt));
    std::cerr << sc.name << " " << spec.str() << ": mean of last " << reports.back().tail << " = "
              << reports.back().mean_tail << " s\n";
  }
  write_text(a.out, [&](std::ostream& os) { experiment::write_report_csv(os, reports); });

  // Replays episode 0 of the first scenario with a fresh controller.
  if (!a.trajectory.empty()) {
    const sim::Scenario sc = sim::load_scenario(a.scenarios.front());
    sim::World world = sim::make_world(sc, experiment::eval_demand_seed(a.seed, 0));
    write_text(a.trajectory, [&](std::ostream& os) {
      sim::TrajectoryLog log(os);
      log.attach(world);
      auto policy = experiment::make_policy(spec, params, a.seed);
      policy::EpisodeOptions eo;
      eo.t_action = opt.t_action;
      eo.duration = sc.episode_s;
      policy::run_episode(world, *policy, eo);
    });
  }
  return kExitOk;
}

int run_ablate(const AblateArgs& a) {
  experiment::AblationConfig cfg;
  cfg.mode = experiment::ablation_mode_from_string(a.mode);
  cfg.scenarios = load_scenarios(a.scenarios);
  cfg.fractions = a.fractions;
  cfg.collect.episodes = a.collect_episodes;
  cfg.trainer = a.trainer.config(a.seed);
  offline::validate(cfg.trainer);
  cfg.eval.episodes = a.episodes;
  cfg.repeats = a.repeats;
  cfg.seed = a.seed;
  cfg.atc = a.atc;
  const experiment::AblationTable table = experiment::run_ablation(cfg);
  write_text(a.out, [&](std::ostream& os) { experiment::write_ablation_csv(os, table); });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"traffic signal control: simulate, collect, train offline, evaluate"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a grid scenario file");
  gen_cmd->add_option("--rows", gen.rows, "grid rows")->capture_default_str();
  gen_cmd->add_option("--cols", gen.cols, "grid columns")->capture_default_str();
  gen_cmd->add_option("--pattern", gen.pattern, "uniform | peak | pulsed")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  gen_cmd->add_option("--demand-scale", gen.demand_scale, "flow rate multiplier")->capture_default_str();
  gen_cmd->add_option("--episode-s", gen.episode_s, "episode length in seconds")->capture_default_str();
  gen_cmd->add_option("--arrivals", gen.arrivals, "uniform | poisson")->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "scenario file to write")->required();

  CollectArgs col;
  auto* col_cmd = app.add_subcommand("collect", "roll out a behavior policy and log transitions");
  col_cmd->add_option("--scenario", col.scenarios, "scenario file (repeatable)")->required();
  col_cmd->add_option("--provenance", col.provenance, "cycle | random | expert_proxy")->capture_default_str();
  col_cmd->add_option("--episodes", col.episodes, "episodes per scenario")->capture_default_str();
  col_cmd->add_option("--random-every", col.random_every, "cycle: randomize every n-th decision")
      ->capture_default_str();
  col_cmd->add_option("--cap", col.cap, "max transitions kept per scenario");
  col_cmd->add_option("--seed", col.seed, "root seed")->capture_default_str();
  col_cmd->add_option("--out", col.out, "dataset file to write")->required();

  TrainArgs tr;
  auto* tr_cmd = app.add_subcommand("train", "offline CQL training on a dataset");
  tr_cmd->add_option("--dataset", tr.dataset, "dataset file")->required();
  add_trainer_flags(tr_cmd, tr.trainer);
  tr_cmd->add_option("--fraction", tr.fraction, "train on this fraction of the dataset")->capture_default_str();
  tr_cmd->add_option("--seed", tr.seed, "root seed")->capture_default_str();
  tr_cmd->add_option("--out", tr.out, "checkpoint file to write")->required();
  tr_cmd->add_option("--loss", tr.loss, "loss log CSV to write");
  tr_cmd->add_flag("--quiet", tr.quiet, "no progress output");

  EvalArgs ev;
  auto* ev_cmd = app.add_subcommand("eval", "evaluate a policy on scenarios");
  ev_cmd->add_option("--scenario", ev.scenarios, "scenario file (repeatable)")->required();
  ev_cmd->add_option("--policy", ev.policy, "fixed_time | max_queue | datalight | random, optional +atc")
      ->capture_default_str();
  ev_cmd->add_option("--checkpoint", ev.checkpoint, "checkpoint for learned policies");
  ev_cmd->add_option("--episodes", ev.episodes, "test episodes")->capture_default_str();
  ev_cmd->add_option("--seed", ev.seed, "root seed")->capture_default_str();
  ev_cmd->add_option("--out", ev.out, "report CSV (default stdout)");
  ev_cmd->add_option("--trajectory", ev.trajectory, "per-tick vehicle log of the first scenario's episode 0");

  AblateArgs ab;
  auto* ab_cmd = app.add_subcommand("ablate", "train and evaluate one model per dataset variant");
  ab_cmd->add_option("--mode", ab.mode, "datasets | fractions")->capture_default_str();
  ab_cmd->add_option("--scenario", ab.scenarios, "scenario file (repeatable)")->required();
  ab_cmd->add_option("--fraction", ab.fractions, "data fractions (fractions mode)")->capture_default_str();
  ab_cmd->add_option("--episodes", ab.episodes, "test episodes")->capture_default_str();
  ab_cmd->add_option("--collect-episodes", ab.collect_episodes, "collection episodes per scenario")
      ->capture_default_str();
  ab_cmd->add_option("--repeats", ab.repeats, "independent seeds")->capture_default_str();
  ab_cmd->add_flag("--atc", ab.atc, "evaluate with the cyclical wrapper");
  add_trainer_flags(ab_cmd, ab.trainer);
  ab_cmd->add_option("--seed", ab.seed, "root seed")->capture_default_str();
  ab_cmd->add_option("--out", ab.out, "table CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*col_cmd) return run_collect(col);
    if (*tr_cmd) return run_train(tr);
    if (*ev_cmd) return run_eval(ev);
    if (*ab_cmd) return run_ablate(ab);
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
