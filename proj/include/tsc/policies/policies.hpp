#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tsc/features/features.hpp"
#include "tsc/neural/qnet.hpp"

namespace tsc::policy {

using sim::PhaseId;

struct DecisionContext {
  int intersection = 0;
  /// Index of this decision within the episode (0, 1, 2, ...).
  int decision_index = 0;
  const features::IntersectionObservation& obs;
};

/// Chooses the phase for one intersection at a decision boundary.
class Policy {
 public:
  virtual ~Policy() = default;
  /// Called once before an episode with the intersection count.
  virtual void reset(int intersections) { (void)intersections; }
  virtual PhaseId decide(const DecisionContext& ctx) = 0;
  /// Called for every intersection after each simulation tick.
  virtual void tick(int intersection) { (void)intersection; }
  virtual std::string name() const = 0;
};

/// Cycles A -> B -> C -> D holding each phase for its share of the split,
/// independent of traffic.
class FixedTime final : public Policy {
 public:
  /// Durations in seconds per phase; each must be a positive multiple of t_action.
  FixedTime(std::array<double, sim::kPhaseCount> split, double t_action);

  PhaseId decide(const DecisionContext& ctx) override;
  std::string name() const override { return "fixed_time"; }

  const std::vector<PhaseId>& sequence() const { return sequence_; }

 private:
  std::vector<PhaseId> sequence_;
};

/// Phase whose participating lanes hold the most stopped vehicles; ties go to
/// the lowest phase index.
PhaseId max_queue_phase(const features::IntersectionObservation& obs);

class MaxQueue final : public Policy {
 public:
  PhaseId decide(const DecisionContext& ctx) override { return max_queue_phase(ctx.obs); }
  std::string name() const override { return "max_queue"; }
};

/// Argmax of the Q-network phase scores (ties to the lowest index).
class GreedyQ final : public Policy {
 public:
  explicit GreedyQ(std::shared_ptr<const nn::QNetworkParams> params);

  PhaseId decide(const DecisionContext& ctx) override;
  std::string name() const override { return "datalight"; }

 private:
  std::shared_ptr<const nn::QNetworkParams> params_;
};

/// Uniform phase draw keyed by (seed, intersection, decision index), so a
/// replay with the same seed reproduces every draw without shared state.
PhaseId keyed_random_phase(std::uint64_t seed, int intersection, int decision_index);

class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : seed_(seed) {}

  PhaseId decide(const DecisionContext& ctx) override;
  std::string name() const override { return "random"; }

 private:
  std::uint64_t seed_;
};

/// Replaces every `every`-th decision (indices every-1, 2*every-1, ...) of
/// the base policy with a keyed uniform random phase.
class PeriodicRandomOverride final : public Policy {
 public:
  PeriodicRandomOverride(std::unique_ptr<Policy> base, int every, std::uint64_t seed);

  void reset(int intersections) override { base_->reset(intersections); }
  PhaseId decide(const DecisionContext& ctx) override;
  void tick(int intersection) override { base_->tick(intersection); }
  std::string name() const override { return base_->name() + "+random_every_" + std::to_string(every_); }

  bool overrides(int decision_index) const { return every_ > 0 && decision_index % every_ == every_ - 1; }

 private:
  std::unique_ptr<Policy> base_;
  int every_;
  std::uint64_t seed_;
};

struct ControllerState {
  PhaseId current = PhaseId::A;  // p_pre
  int ticks_since_decision = 0;
  int cycle_position = 0;        // index of `current` in A,B,C,D
};

/// Arbitrary-to-cyclical wrapper: keeps the current phase when the base
/// policy proposes it, otherwise advances exactly one step along A,B,C,D.
/// The first decision of an episode (index 0) always starts the cycle on A.
class ArbitraryToCyclical final : public Policy {
 public:
  explicit ArbitraryToCyclical(std::unique_ptr<Policy> base);

  void reset(int intersections) override;
  PhaseId decide(const DecisionContext& ctx) override;
  void tick(int intersection) override;
  std::string name() const override { return base_->name() + "+atc"; }

  const ControllerState& state(int intersection) const { return states_.at(intersection); }

 private:
  std::unique_ptr<Policy> base_;
  std::vector<ControllerState> states_;
};

}  // namespace tsc::policy
