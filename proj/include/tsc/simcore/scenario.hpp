#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tsc/simcore/network.hpp"
#include "tsc/simcore/world.hpp"

namespace tsc::sim {

inline constexpr int kScenarioSchema = 1;

enum class ArrivalProcess { Uniform, Poisson };

struct LaneSpec {
  double length = 300.0;
  double v_free = 10.0;
  double sat_rate = 0.5;
};

/// Departures every `interval_s` (mean interval for Poisson arrivals) within
/// [start_s, end_s).
struct FlowSpec {
  double start_s = 0.0;
  double end_s = 3600.0;
  double interval_s = 10.0;
  RouteSpec route;
};

struct Scenario {
  std::string name;
  int rows = 1;
  int cols = 1;
  LaneSpec lanes;
  double episode_s = 3600.0;
  ArrivalProcess arrivals = ArrivalProcess::Uniform;
  std::vector<FlowSpec> flows;
  std::shared_ptr<const RoadNetwork> network;

  int intersection_count() const { return rows * cols; }
};

/// Parses a scenario document (JSON text). Throws ConfigError on schema
/// mismatch, bad values or routes that do not resolve on the grid.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical serialization; parse_scenario(dump_scenario(s)) reproduces s.
std::string dump_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Builds the network for the scenario's grid/lane settings and validates
/// every flow route against it.
void finalize(Scenario& scenario);

/// Expands flows into a time-ordered trip list. Uniform arrivals ignore
/// `seed`; Poisson arrivals draw exponential headways from it.
FlowSchedule build_schedule(const Scenario& scenario, std::uint64_t seed);

/// Fresh world for one episode with the schedule already spawned.
World make_world(const Scenario& scenario, std::uint64_t seed);

}  // namespace tsc::sim
