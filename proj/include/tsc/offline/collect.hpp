#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tsc/offline/dataset.hpp"
#include "tsc/policies/policies.hpp"
#include "tsc/simcore/scenario.hpp"

namespace tsc::offline {

struct CollectOptions {
  int episodes = 10;
  double t_action = 15.0;
  /// Tuples kept per (scenario, episode, intersection); surplus is dropped.
  int tuples_per_intersection = 240;
  /// Cycle datasets replace every n-th decision by a random phase.
  int random_every = 20;
  /// Optional cap on tuples kept per scenario (across its episodes).
  std::optional<std::size_t> per_scenario_cap;
  std::uint64_t seed = 0;
};

/// Seeds used for one (scenario, episode) rollout; exposed for replay checks.
std::uint64_t demand_seed(std::uint64_t root, int scenario, int episode);
std::uint64_t behavior_seed(std::uint64_t root, int scenario, int episode);

/// Behavior policy used for a provenance and rollout.
std::unique_ptr<policy::Policy> behavior_policy(Provenance provenance, const CollectOptions& options, int scenario,
                                                int episode);

/// Rolls out the behavior policy of `provenance` on every scenario and episode
/// and logs (s, a, r, s') at every decision boundary of every intersection.
/// Episodes last the scenario's episode_s (3600 s gives 240 decisions).
OfflineDataset collect(const std::vector<sim::Scenario>& scenarios, Provenance provenance,
                       const CollectOptions& options);

/// FixedTime (15 s per phase) with every 20th decision randomized.
OfflineDataset collect_cod(const std::vector<sim::Scenario>& scenarios, const CollectOptions& options);
/// Uniform random phase at every decision.
OfflineDataset collect_random(const std::vector<sim::Scenario>& scenarios, const CollectOptions& options);
/// Max-QueueLength behavior policy.
OfflineDataset collect_expert_proxy(const std::vector<sim::Scenario>& scenarios, const CollectOptions& options);

}  // namespace tsc::offline
