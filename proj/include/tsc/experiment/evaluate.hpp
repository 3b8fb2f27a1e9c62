#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "tsc/neural/qnet.hpp"
#include "tsc/policies/policies.hpp"
#include "tsc/policies/runner.hpp"
#include "tsc/simcore/scenario.hpp"

namespace tsc::experiment {

/// "fixed_time", "max_queue", "datalight", "random", optionally suffixed
/// with "+atc".
struct PolicySpec {
  std::string base;
  bool atc = false;

  std::string str() const { return atc ? base + "+atc" : base; }
  bool needs_checkpoint() const { return base == "datalight"; }
};

PolicySpec parse_policy_spec(const std::string& text);

/// Instantiates a policy. `params` is required for learned policies
/// (ConfigError when missing); `seed` feeds the random policy.
std::unique_ptr<policy::Policy> make_policy(const PolicySpec& spec, std::shared_ptr<const nn::QNetworkParams> params,
                                            std::uint64_t seed = 0);

struct EvalOptions {
  int episodes = 5;
  /// Number of trailing episodes averaged into the summary.
  int tail = 5;
  double t_action = 15.0;
  std::uint64_t seed = 0;
  bool keep_phases = false;
};

struct EpisodeResult {
  int episode = 0;
  double average_travel_time = 0.0;
  std::int64_t vehicles = 0;
  std::int64_t exited = 0;
  /// Vehicles that crossed each intersection's stop lines.
  std::vector<std::int64_t> throughput;
  /// Applied phases per intersection and decision (only with keep_phases).
  std::vector<std::vector<policy::PhaseId>> phases;
};

struct EvalReport {
  std::string scenario;
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<EpisodeResult> episodes;
  /// Mean average travel time over the last `tail` episodes.
  int tail = 0;
  double mean_tail = 0.0;
};

/// Demand seed of an evaluation episode.
std::uint64_t eval_demand_seed(std::uint64_t root, int episode);

/// Runs `episodes` full-length episodes on fresh worlds (demand seeded per
/// episode) and records travel times. Unfinished vehicles count with the
/// episode end as their exit time.
EvalReport evaluate(const sim::Scenario& scenario, policy::Policy& policy, const EvalOptions& options);

/// CSV `scenario,policy,seed,episode,average_travel_time,vehicles,exited,throughput`
/// with one row per episode and a closing row whose episode column is
/// `mean_last_<n>`. Throughput lists intersections separated by ';'.
void write_report_csv(std::ostream& out, const std::vector<EvalReport>& reports);

}  // namespace tsc::experiment
