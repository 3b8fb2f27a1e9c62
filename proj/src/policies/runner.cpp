#include "tsc/policies/runner.hpp"

#include <cmath>

#include "tsc/common/errors.hpp"

namespace tsc::policy {

EpisodeTrace run_episode(sim::World& world, Policy& policy, const EpisodeOptions& options, const DecisionHook& hook) {
  if (!(options.t_action > 0.0) || !(options.dt > 0.0) || !(options.duration > 0.0))
    throw ConfigError("episode timing values must be positive");
  const double ticks_real = options.t_action / options.dt;
  const int ticks = static_cast<int>(std::lround(ticks_real));
  if (ticks < 1 || std::abs(ticks_real - ticks) > 1e-9) throw ConfigError("t_action must be a multiple of dt");

  const int n = static_cast<int>(world.network().intersections().size());
  EpisodeTrace trace;
  trace.decisions = static_cast<int>(std::floor(options.duration / options.t_action + 1e-9));
  trace.phases.assign(n, {});
  policy.reset(n);

  std::vector<features::IntersectionObservation> obs(n);
  std::vector<PhaseId> actions(n);
  for (int k = 0; k < trace.decisions; ++k) {
    for (int i = 0; i < n; ++i) obs[i] = features::observe(world, i, options.t_action);
    for (int i = 0; i < n; ++i) {
      actions[i] = policy.decide(DecisionContext{i, k, obs[i]});
      world.set_phase(i, actions[i]);
      trace.phases[i].push_back(actions[i]);
    }
    if (hook) hook(k, obs, &actions);
    for (int t = 0; t < ticks; ++t) {
      world.step(options.dt);
      for (int i = 0; i < n; ++i) policy.tick(i);
    }
  }
  if (hook) {
    for (int i = 0; i < n; ++i) obs[i] = features::observe(world, i, options.t_action);
    hook(trace.decisions, obs, nullptr);
  }
  return trace;
}

bool is_cyclical(const std::vector<PhaseId>& phases) {
  for (std::size_t k = 1; k < phases.size(); ++k) {
    if (phases[k] != phases[k - 1] && phases[k] != sim::next_in_cycle(phases[k - 1])) return false;
  }
  return true;
}

}  // namespace tsc::policy
