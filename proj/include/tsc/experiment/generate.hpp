#pragma once

#include <cstdint>
#include <string>

#include "tsc/simcore/scenario.hpp"

namespace tsc::experiment {

enum class DemandPattern {
  Uniform,  // every approach carries the same through and turning flow
  Peak,     // heavy north-south through flow, light everything else
  Pulsed,   // uniform rates switched on and off in 10 minute blocks
};

std::string to_string(DemandPattern p);
DemandPattern pattern_from_string(const std::string& s);

struct GridSpec {
  int rows = 1;
  int cols = 1;
  DemandPattern pattern = DemandPattern::Uniform;
  std::uint64_t seed = 0;
  double episode_s = 3600.0;
  sim::LaneSpec lanes;
  /// Multiplies every flow rate (intervals are divided by it).
  double demand_scale = 1.0;
  sim::ArrivalProcess arrivals = sim::ArrivalProcess::Poisson;
};

/// Turn string for a vehicle entering (row, col) from boundary side `approach`
/// that goes straight except for `turn` at its `turn_at`-th intersection.
/// The string ends when the path leaves the grid.
std::vector<sim::Turn> straight_route_with_turn(int rows, int cols, int row, int col, sim::Direction approach,
                                                int turn_at, sim::Turn turn);

/// Builds a grid scenario: one through flow per boundary entry plus one
/// left- and one right-turning flow whose turn intersection is drawn from
/// `seed`. Same spec, same scenario. Throws ConfigError on bad dimensions.
sim::Scenario generate_scenario(const GridSpec& spec);

}  // namespace tsc::experiment
