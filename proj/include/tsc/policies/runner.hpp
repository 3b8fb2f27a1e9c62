#pragma once

#include <functional>
#include <vector>

#include "tsc/policies/policies.hpp"
#include "tsc/simcore/world.hpp"

namespace tsc::policy {

struct EpisodeOptions {
  double t_action = 15.0;
  double duration = 3600.0;
  double dt = 1.0;
};

/// Invoked at every decision boundary with the observations of all
/// intersections. `actions` is null at the final boundary (t = duration).
using DecisionHook = std::function<void(int decision_index, const std::vector<features::IntersectionObservation>& obs,
                                        const std::vector<PhaseId>* actions)>;

struct EpisodeTrace {
  int decisions = 0;
  /// phases[intersection][decision]: phase applied at each decision.
  std::vector<std::vector<PhaseId>> phases;
};

/// Runs floor(duration / t_action) decisions: observe every intersection,
/// query the policy once per intersection, apply the phases, then advance
/// t_action / dt ticks.
EpisodeTrace run_episode(sim::World& world, Policy& policy, const EpisodeOptions& options,
                         const DecisionHook& hook = {});

/// True when consecutive distinct phases only ever step forward by one
/// along A,B,C,D,A,...
bool is_cyclical(const std::vector<PhaseId>& phases);

}  // namespace tsc::policy
