#include "tsc/offline/collect.hpp"

#include "tsc/common/errors.hpp"
#include "tsc/common/seed.hpp"
#include "tsc/policies/runner.hpp"

namespace tsc::offline {

std::uint64_t demand_seed(std::uint64_t root, int scenario, int episode) {
  return derive_seed(root, "collect-demand", {static_cast<std::uint64_t>(scenario), static_cast<std::uint64_t>(episode)});
}

std::uint64_t behavior_seed(std::uint64_t root, int scenario, int episode) {
  return derive_seed(root, "collect-behavior",
                     {static_cast<std::uint64_t>(scenario), static_cast<std::uint64_t>(episode)});
}

std::unique_ptr<policy::Policy> behavior_policy(Provenance provenance, const CollectOptions& options, int scenario,
                                                int episode) {
  const std::uint64_t seed = behavior_seed(options.seed, scenario, episode);
  switch (provenance) {
    case Provenance::Cycle: {
      const double d = options.t_action;
      auto fixed = std::make_unique<policy::FixedTime>(std::array<double, 4>{d, d, d, d}, d);
      return std::make_unique<policy::PeriodicRandomOverride>(std::move(fixed), options.random_every, seed);
    }
    case Provenance::Random: return std::make_unique<policy::RandomPolicy>(seed);
    case Provenance::ExpertProxy: return std::make_unique<policy::MaxQueue>();
  }
  throw ConfigError("unknown provenance");
}

OfflineDataset collect(const std::vector<sim::Scenario>& scenarios, Provenance provenance,
                       const CollectOptions& options) {
  if (options.episodes < 0) throw ConfigError("episodes must be >= 0");
  if (options.tuples_per_intersection < 0) throw ConfigError("tuples_per_intersection must be >= 0");
  OfflineDataset data;
  data.provenance = provenance;

  policy::EpisodeOptions ep;
  ep.t_action = options.t_action;

  for (int sc = 0; sc < static_cast<int>(scenarios.size()); ++sc) {
    const sim::Scenario& scenario = scenarios[sc];
    ep.duration = scenario.episode_s;
    std::size_t kept_for_scenario = 0;
    for (int e = 0; e < options.episodes; ++e) {
      sim::World world = sim::make_world(scenario, demand_seed(options.seed, sc, e));
      auto behavior = behavior_policy(provenance, options, sc, e);

      const int n = static_cast<int>(world.network().intersections().size());
      std::vector<features::IntersectionObservation> prev_obs;
      std::vector<policy::PhaseId> prev_actions;
      auto hook = [&](int k, const std::vector<features::IntersectionObservation>& obs,
                      const std::vector<policy::PhaseId>* actions) {
        if (k > 0 && k <= options.tuples_per_intersection) {
          for (int i = 0; i < n; ++i) {
            if (options.per_scenario_cap && kept_for_scenario >= *options.per_scenario_cap) break;
            Transition tr;
            tr.s = prev_obs[i].flatten();
            tr.a = static_cast<int>(prev_actions[i]);
            tr.r = features::reward(world, i);
            tr.s_next = obs[i].flatten();
            tr.intersection_id = i;
            tr.scenario_id = sc;
            tr.episode = e;
            tr.t = k - 1;
            data.transitions.push_back(tr);
            ++kept_for_scenario;
          }
        }
        prev_obs = obs;
        if (actions) prev_actions = *actions;
      };
      policy::run_episode(world, *behavior, ep, hook);
    }
  }
  return data;
}

OfflineDataset collect_cod(const std::vector<sim::Scenario>& scenarios, const CollectOptions& options) {
  return collect(scenarios, Provenance::Cycle, options);
}

OfflineDataset collect_random(const std::vector<sim::Scenario>& scenarios, const CollectOptions& options) {
  return collect(scenarios, Provenance::Random, options);
}

OfflineDataset collect_expert_proxy(const std::vector<sim::Scenario>& scenarios, const CollectOptions& options) {
  return collect(scenarios, Provenance::ExpertProxy, options);
}

}  // namespace tsc::offline
