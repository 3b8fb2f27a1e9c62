#include "tsc/policies/policies.hpp"

#include <cmath>
#include <random>

#include "tsc/common/errors.hpp"
#include "tsc/common/seed.hpp"

namespace tsc::policy {

FixedTime::FixedTime(std::array<double, sim::kPhaseCount> split, double t_action) {
  if (!(t_action > 0.0)) throw ConfigError("t_action must be positive");
  for (int p = 0; p < sim::kPhaseCount; ++p) {
    const double ratio = split[p] / t_action;
    const double whole = std::round(ratio);
    if (!(split[p] > 0.0) || std::abs(ratio - whole) > 1e-9)
      throw ConfigError("fixed-time split durations must be positive multiples of the action duration");
    for (int k = 0; k < static_cast<int>(whole); ++k) sequence_.push_back(static_cast<PhaseId>(p));
  }
}

PhaseId FixedTime::decide(const DecisionContext& ctx) {
  return sequence_[static_cast<std::size_t>(ctx.decision_index) % sequence_.size()];
}

PhaseId max_queue_phase(const features::IntersectionObservation& obs) {
  std::array<double, sim::kPhaseCount> totals{};
  for (const auto& phase : sim::phases())
    totals[static_cast<int>(phase.id)] = obs.queue_lengths[phase.slots[0]] + obs.queue_lengths[phase.slots[1]];
  return static_cast<PhaseId>(nn::argmax_lowest(totals));
}

GreedyQ::GreedyQ(std::shared_ptr<const nn::QNetworkParams> params) : params_(std::move(params)) {
  if (!params_) throw ConfigError("greedy policy needs network parameters");
}

PhaseId GreedyQ::decide(const DecisionContext& ctx) {
  const auto scores = nn::phase_scores(ctx.obs, *params_);
  return static_cast<PhaseId>(nn::argmax_lowest(scores));
}

PhaseId keyed_random_phase(std::uint64_t seed, int intersection, int decision_index) {
  std::mt19937_64 rng(derive_seed(seed, "phase-draw",
                                  {static_cast<std::uint64_t>(intersection), static_cast<std::uint64_t>(decision_index)}));
  std::uniform_int_distribution<int> dist(0, sim::kPhaseCount - 1);
  return static_cast<PhaseId>(dist(rng));
}

PhaseId RandomPolicy::decide(const DecisionContext& ctx) {
  return keyed_random_phase(seed_, ctx.intersection, ctx.decision_index);
}

PeriodicRandomOverride::PeriodicRandomOverride(std::unique_ptr<Policy> base, int every, std::uint64_t seed)
    : base_(std::move(base)), every_(every), seed_(seed) {
  if (!base_) throw ConfigError("override needs a base policy");
  if (every_ < 0) throw ConfigError("override period must be >= 0");
}

PhaseId PeriodicRandomOverride::decide(const DecisionContext& ctx) {
  const PhaseId planned = base_->decide(ctx);
  if (!overrides(ctx.decision_index)) return planned;
  return keyed_random_phase(seed_, ctx.intersection, ctx.decision_index);
}

ArbitraryToCyclical::ArbitraryToCyclical(std::unique_ptr<Policy> base) : base_(std::move(base)) {
  if (!base_) throw ConfigError("ATC needs a base policy");
}

void ArbitraryToCyclical::reset(int intersections) {
  states_.assign(static_cast<std::size_t>(intersections), ControllerState{});
  base_->reset(intersections);
}

PhaseId ArbitraryToCyclical::decide(const DecisionContext& ctx) {
  if (ctx.intersection >= static_cast<int>(states_.size()))
    states_.resize(static_cast<std::size_t>(ctx.intersection) + 1);
  ControllerState& st = states_[ctx.intersection];
  const PhaseId proposed = base_->decide(ctx);
  if (ctx.decision_index == 0) {
    // The episode opens the cycle on A whatever the base proposes.
    st = ControllerState{};
  } else if (proposed != st.current) {
    st.current = sim::next_in_cycle(st.current);
    st.cycle_position = static_cast<int>(st.current);
  }
  st.ticks_since_decision = 0;
  return st.current;
}

void ArbitraryToCyclical::tick(int intersection) {
  if (intersection < static_cast<int>(states_.size())) ++states_[intersection].ticks_since_decision;
  base_->tick(intersection);
}

}  // namespace tsc::policy
