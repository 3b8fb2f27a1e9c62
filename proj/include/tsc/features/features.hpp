#pragma once

#include <array>
#include <cstddef>

#include "tsc/simcore/world.hpp"

namespace tsc::features {

/// Per-lane characteristics: phase bit, vehicle count, effective running
/// count, and four 100 m segment counts measured from the stop line.
inline constexpr int kFeatureWidth = 7;
inline constexpr int kSegmentCount = 4;
inline constexpr double kSegmentLength = 100.0;
inline constexpr int kStateSize = sim::kIncomingLanes * kFeatureWidth;

/// Flattened intersection state: 12 incoming lanes (N,E,S,W x L,T,R), 7 features each.
using StateVector = std::array<double, kStateSize>;
using LaneVector = std::array<double, kFeatureWidth>;

struct LaneFeatureVector {
  double is_active_phase = 0.0;
  double num_vehicles = 0.0;
  double effective_running = 0.0;
  std::array<double, kSegmentCount> segment_counts{};

  LaneVector to_array() const;
};

struct IntersectionObservation {
  int intersection = -1;
  sim::PhaseId active_phase = sim::PhaseId::A;
  bool clearing = false;
  std::array<LaneFeatureVector, sim::kIncomingLanes> lanes{};
  std::array<int, sim::kIncomingLanes> queue_lengths{};

  /// Participating-lane features for each phase, in phase order A..D.
  std::array<std::array<LaneFeatureVector, 2>, sim::kPhaseCount> phase_lanes() const;
  StateVector flatten() const;
};

/// Offset of lane `slot`'s feature block inside a StateVector.
constexpr std::size_t state_offset(int slot) { return static_cast<std::size_t>(slot) * kFeatureWidth; }

/// Stopped vehicles on the lane.
int queue_length(const sim::World& world, sim::LaneId lane);

/// Moving vehicles within v_free * t_action of the stop line.
int effective_running(const sim::World& world, sim::LaneId lane, double t_action);

/// Counts per [k*100, (k+1)*100) distance band from the stop line; bands
/// starting at or beyond the lane end are zero.
std::array<int, kSegmentCount> segment_counts(const sim::World& world, sim::LaneId lane);

/// Same banding over explicit distances-to-stop-line.
template <typename Range>
std::array<int, kSegmentCount> segment_counts_for(const Range& distances, double lane_length) {
  std::array<int, kSegmentCount> out{};
  for (double d : distances) {
    if (d < 0.0) continue;
    const int band = static_cast<int>(d / kSegmentLength);
    if (band < kSegmentCount && band * kSegmentLength < lane_length) ++out[band];
  }
  return out;
}

/// Negative total queue over all 12 incoming lanes.
double reward(const sim::World& world, int intersection);

IntersectionObservation observe(const sim::World& world, int intersection, double t_action);

}  // namespace tsc::features
