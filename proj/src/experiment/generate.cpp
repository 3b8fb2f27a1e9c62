#include "tsc/experiment/generate.hpp"

#include <random>

#include "tsc/common/errors.hpp"
#include "tsc/common/seed.hpp"

namespace tsc::experiment {

using sim::Direction;
using sim::Turn;

namespace {

struct Rates {
  double through;
  double turn;
};

// Mean headways in seconds per flow.
Rates rates_for(DemandPattern p, Direction approach) {
  const bool north_south = approach == Direction::North || approach == Direction::South;
  switch (p) {
    case DemandPattern::Uniform: return {20.0, 90.0};
    case DemandPattern::Peak: return north_south ? Rates{9.0, 120.0} : Rates{40.0, 120.0};
    case DemandPattern::Pulsed: return {10.0, 45.0};
  }
  return {20.0, 90.0};
}

std::pair<int, int> advance(int row, int col, Direction heading) {
  switch (heading) {
    case Direction::North: return {row - 1, col};
    case Direction::South: return {row + 1, col};
    case Direction::East: return {row, col + 1};
    case Direction::West: return {row, col - 1};
  }
  return {row, col};
}

int straight_length(int rows, int cols, Direction approach) {
  return approach == Direction::North || approach == Direction::South ? rows : cols;
}

}  // namespace

std::string to_string(DemandPattern p) {
  switch (p) {
    case DemandPattern::Uniform: return "uniform";
    case DemandPattern::Peak: return "peak";
    case DemandPattern::Pulsed: return "pulsed";
  }
  return "uniform";
}

DemandPattern pattern_from_string(const std::string& s) {
  if (s == "uniform") return DemandPattern::Uniform;
  if (s == "peak") return DemandPattern::Peak;
  if (s == "pulsed") return DemandPattern::Pulsed;
  throw ConfigError("unknown demand pattern '" + s + "' (expected uniform, peak or pulsed)");
}

std::vector<Turn> straight_route_with_turn(int rows, int cols, int row, int col, Direction approach, int turn_at,
                                           Turn turn) {
  std::vector<Turn> turns;
  Direction heading = sim::opposite(approach);
  int k = 0;
  while (row >= 0 && row < rows && col >= 0 && col < cols) {
    const Turn t = k == turn_at ? turn : Turn::Through;
    turns.push_back(t);
    heading = sim::turned(heading, t);
    std::tie(row, col) = advance(row, col, heading);
    ++k;
  }
  return turns;
}

sim::Scenario generate_scenario(const GridSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1) throw ConfigError("grid needs at least one row and one column");
  if (!(spec.demand_scale > 0.0)) throw ConfigError("demand scale must be positive");
  if (!(spec.episode_s > 0.0)) throw ConfigError("episode length must be positive");

  sim::Scenario sc;
  sc.name = "grid" + std::to_string(spec.rows) + "x" + std::to_string(spec.cols) + "_" + to_string(spec.pattern);
  sc.rows = spec.rows;
  sc.cols = spec.cols;
  sc.lanes = spec.lanes;
  sc.episode_s = spec.episode_s;
  sc.arrivals = spec.arrivals;

  std::mt19937_64 rng(derive_seed(spec.seed, "generate"));

  // Pulsed demand is on for the first 10 minutes of every 20.
  std::vector<std::pair<double, double>> windows;
  if (spec.pattern == DemandPattern::Pulsed) {
    for (double t = 0.0; t < spec.episode_s; t += 1200.0) windows.emplace_back(t, std::min(t + 600.0, spec.episode_s));
  } else {
    windows.emplace_back(0.0, spec.episode_s);
  }

  auto add_entry = [&](int row, int col, Direction approach) {
    const Rates r = rates_for(spec.pattern, approach);
    const int length = straight_length(spec.rows, spec.cols, approach);
    std::uniform_int_distribution<int> where(0, length - 1);
    const int left_at = where(rng);
    const int right_at = where(rng);
    const std::vector<std::pair<std::vector<Turn>, double>> routes = {
        {straight_route_with_turn(spec.rows, spec.cols, row, col, approach, -1, Turn::Through), r.through},
        {straight_route_with_turn(spec.rows, spec.cols, row, col, approach, left_at, Turn::Left), r.turn},
        {straight_route_with_turn(spec.rows, spec.cols, row, col, approach, right_at, Turn::Right), r.turn},
    };
    for (const auto& [turns, headway] : routes) {
      for (const auto& [start, end] : windows) {
        sim::FlowSpec f;
        f.start_s = start;
        f.end_s = end;
        f.interval_s = headway / spec.demand_scale;
        f.route = sim::RouteSpec{row, col, approach, turns};
        sc.flows.push_back(f);
      }
    }
  };

  for (int c = 0; c < spec.cols; ++c) add_entry(0, c, Direction::North);
  for (int r = 0; r < spec.rows; ++r) add_entry(r, spec.cols - 1, Direction::East);
  for (int c = 0; c < spec.cols; ++c) add_entry(spec.rows - 1, c, Direction::South);
  for (int r = 0; r < spec.rows; ++r) add_entry(r, 0, Direction::West);

  sim::finalize(sc);
  return sc;
}

}  // namespace tsc::experiment
