#include "tsc/experiment/evaluate.hpp"

#include <algorithm>
#include <ostream>

#include "tsc/common/errors.hpp"
#include "tsc/common/seed.hpp"

namespace tsc::experiment {

PolicySpec parse_policy_spec(const std::string& text) {
  PolicySpec spec;
  std::string base = text;
  const std::string suffix = "+atc";
  if (base.size() > suffix.size() && base.compare(base.size() - suffix.size(), suffix.size(), suffix) == 0) {
    spec.atc = true;
    base.resize(base.size() - suffix.size());
  }
  if (base != "fixed_time" && base != "max_queue" && base != "datalight" && base != "random")
    throw ConfigError("unknown policy '" + text + "' (expected fixed_time, max_queue, datalight, random, "
                      "optionally with +atc)");
  spec.base = base;
  return spec;
}

std::unique_ptr<policy::Policy> make_policy(const PolicySpec& spec, std::shared_ptr<const nn::QNetworkParams> params,
                                            std::uint64_t seed) {
  std::unique_ptr<policy::Policy> p;
  if (spec.base == "fixed_time") {
    p = std::make_unique<policy::FixedTime>(std::array<double, 4>{15.0, 15.0, 15.0, 15.0}, 15.0);
  } else if (spec.base == "max_queue") {
    p = std::make_unique<policy::MaxQueue>();
  } else if (spec.base == "random") {
    p = std::make_unique<policy::RandomPolicy>(seed);
  } else if (spec.base == "datalight") {
    if (!params) throw ConfigError("policy '" + spec.str() + "' needs a checkpoint");
    p = std::make_unique<policy::GreedyQ>(std::move(params));
  } else {
    throw ConfigError("unknown policy '" + spec.base + "'");
  }
  if (spec.atc) p = std::make_unique<policy::ArbitraryToCyclical>(std::move(p));
  return p;
}

std::uint64_t eval_demand_seed(std::uint64_t root, int episode) {
  return derive_seed(root, "eval-demand", {static_cast<std::uint64_t>(episode)});
}

EvalReport evaluate(const sim::Scenario& scenario, policy::Policy& policy, const EvalOptions& options) {
  if (options.episodes < 1) throw ConfigError("need at least one evaluation episode");
  if (options.tail < 1) throw ConfigError("tail must be positive");

  EvalReport report;
  report.scenario = scenario.name;
  report.policy = policy.name();
  report.seed = options.seed;

  policy::EpisodeOptions ep;
  ep.t_action = options.t_action;
  ep.duration = scenario.episode_s;

  for (int e = 0; e < options.episodes; ++e) {
    sim::World world = sim::make_world(scenario, eval_demand_seed(options.seed, e));
    policy::EpisodeTrace trace = policy::run_episode(world, policy, ep);

    EpisodeResult r;
    r.episode = e;
    r.average_travel_time = sim::average_travel_time(world, world.time());
    r.vehicles = static_cast<std::int64_t>(std::count_if(world.vehicles().begin(), world.vehicles().end(),
                                                         [&](const sim::Vehicle& v) {
                                                           return v.enter_time <= world.time();
                                                         }));
    r.exited = world.exited_total();
    const int n = static_cast<int>(world.network().intersections().size());
    for (int i = 0; i < n; ++i) r.throughput.push_back(world.crossings(i));
    if (options.keep_phases) r.phases = std::move(trace.phases);
    report.episodes.push_back(std::move(r));
  }

  const int tail = std::min(options.tail, options.episodes);
  double sum = 0.0;
  for (int e = options.episodes - tail; e < options.episodes; ++e) sum += report.episodes[e].average_travel_time;
  report.tail = tail;
  report.mean_tail = sum / tail;
  return report;
}

void write_report_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  out << "scenario,policy,seed,episode,average_travel_time,vehicles,exited,throughput\n";
  out.precision(10);
  for (const EvalReport& rep : reports) {
    for (const EpisodeResult& r : rep.episodes) {
      out << rep.scenario << ',' << rep.policy << ',' << rep.seed << ',' << r.episode << ',' << r.average_travel_time
          << ',' << r.vehicles << ',' << r.exited << ',';
      for (std::size_t i = 0; i < r.throughput.size(); ++i) out << (i ? ";" : "") << r.throughput[i];
      out << '\n';
    }
    out << rep.scenario << ',' << rep.policy << ',' << rep.seed << ",mean_last_" << rep.tail << ',' << rep.mean_tail
        << ",,,\n";
  }
}

}  // namespace tsc::experiment
