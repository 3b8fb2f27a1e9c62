#pragma once

// Randomized short simulations checked tick by tick against the simulator's
// conservation, ordering, discharge and clearance rules. Shared by the unit
// tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "tsc/experiment/generate.hpp"
#include "tsc/simcore/world.hpp"

namespace tsc::check {

struct SimCheck {
  bool ok = true;
  std::string failure;
  std::int64_t vehicles = 0;
  std::int64_t crossings = 0;
};

struct RandomSimSetup {
  std::shared_ptr<const sim::RoadNetwork> network;
  sim::FlowSchedule schedule;
  /// (tick, intersection, phase) signal commands, sorted by tick.
  std::vector<std::tuple<int, int, sim::PhaseId>> commands;
  int ticks = 0;
};

inline RandomSimSetup random_setup(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  RandomSimSetup s;
  const int rows = pick(1, 2), cols = pick(1, 2);
  const double length = std::round(uni(60.0, 320.0));
  s.network = std::make_shared<const sim::RoadNetwork>(rows, cols, length, std::round(uni(5.0, 15.0)),
                                                       uni(0.2, 1.2));
  s.ticks = pick(60, 240);

  const int trips = pick(0, 120);
  for (int k = 0; k < trips; ++k) {
    sim::RouteSpec r;
    const int side = pick(0, 3);
    r.approach = static_cast<sim::Direction>(side);
    if (r.approach == sim::Direction::North || r.approach == sim::Direction::South) {
      r.col = pick(0, cols - 1);
      r.row = r.approach == sim::Direction::North ? 0 : rows - 1;
    } else {
      r.row = pick(0, rows - 1);
      r.col = r.approach == sim::Direction::West ? 0 : cols - 1;
    }
    const int along = (r.approach == sim::Direction::North || r.approach == sim::Direction::South) ? rows : cols;
    r.turns = experiment::straight_route_with_turn(rows, cols, r.row, r.col, r.approach, pick(-1, along - 1),
                                                   static_cast<sim::Turn>(pick(0, 2)));
    s.schedule.push_back({std::floor(uni(0.0, s.ticks * 0.8)), s.network->resolve_route(r)});
  }

  const int n = rows * cols;
  for (int t = 0; t < s.ticks; ++t) {
    for (int i = 0; i < n; ++i) {
      if (pick(0, 9) == 0) s.commands.emplace_back(t, i, static_cast<sim::PhaseId>(pick(0, 3)));
    }
  }
  return s;
}

/// Vehicle-level snapshot used for bit-exact determinism comparisons.
inline std::string world_fingerprint(const sim::World& w) {
  std::ostringstream out;
  out.precision(17);
  for (const auto& v : w.vehicles()) {
    out << v.id << ':' << v.current_lane_index << ':' << v.position << ':' << v.queued << ':' << v.in_network << ':'
        << (v.exit_time ? *v.exit_time : -1.0) << ';';
  }
  return out.str();
}

/// Runs one randomized simulation and checks every tick:
///   conservation   spawned == in_network + exited
///   ordering       positions strictly decrease from head to tail and stay
///                  within [0, length]; no vehicle changes rank on a lane
///   discharge      crossings from a lane during each uninterrupted green
///                  interval of g ticks <= ceil(sat_rate * g)
///   clearance      no non-right crossing while red clearance is running
///   determinism    a second run yields the identical trajectory
inline SimCheck check_random_simulation(std::uint64_t seed) {
  SimCheck result;
  const RandomSimSetup setup = random_setup(seed);
  const sim::RoadNetwork& net = *setup.network;

  auto fail = [&](const std::string& what, int tick) {
    if (result.ok) {
      result.ok = false;
      result.failure = "seed " + std::to_string(seed) + " tick " + std::to_string(tick) + ": " + what;
    }
  };

  auto run = [&](bool check) {
    sim::World world(setup.network);
    world.spawn(setup.schedule);
    std::vector<int> green_run(net.lanes().size(), 0);
    std::vector<int> green_crossings(net.lanes().size(), 0);
    std::size_t cmd = 0;

    for (int tick = 0; tick < setup.ticks; ++tick) {
      while (cmd < setup.commands.size() && std::get<0>(setup.commands[cmd]) == tick) {
        world.set_phase(std::get<1>(setup.commands[cmd]), std::get<2>(setup.commands[cmd]));
        ++cmd;
      }
      std::vector<bool> permitted(net.lanes().size());
      std::vector<bool> clearing(net.lanes().size(), false);
      for (const auto& lane : net.lanes()) {
        permitted[lane.id] = world.movement_permitted(lane.id);
        if (lane.intersection >= 0) clearing[lane.id] = world.signal(lane.intersection).red_clearance_remaining > 0.0;
      }
      std::vector<int> lane_before(world.vehicles().size(), -1);
      for (const auto& v : world.vehicles())
        if (v.in_network) lane_before[v.id] = v.current_lane();

      world.step(1.0);
      if (!check) continue;

      if (world.spawned_total() != world.in_network() + world.exited_total()) fail("conservation violated", tick);

      std::vector<int> crossed(net.lanes().size(), 0);
      for (const auto& v : world.vehicles()) {
        if (lane_before[v.id] < 0) continue;
        const bool left_lane = !v.in_network || v.current_lane() != lane_before[v.id];
        if (left_lane && net.lane(lane_before[v.id]).intersection >= 0) ++crossed[lane_before[v.id]];
      }
      for (const auto& lane : net.lanes()) {
        if (lane.intersection < 0) continue;
        const bool right = sim::slot_turn(lane.slot) == sim::Turn::Right;
        if (crossed[lane.id] > 0 && clearing[lane.id] && !right) fail("crossing during red clearance", tick);
        if (crossed[lane.id] > 0 && !permitted[lane.id]) fail("crossing on a red movement", tick);
        if (permitted[lane.id]) {
          ++green_run[lane.id];
          green_crossings[lane.id] += crossed[lane.id];
          const double bound = std::ceil(lane.sat_rate * green_run[lane.id] - 1e-9);
          if (green_crossings[lane.id] > bound) fail("discharge bound exceeded", tick);
        } else {
          green_run[lane.id] = 0;
          green_crossings[lane.id] = 0;
        }
      }

      for (const auto& lane : net.lanes()) {
        const auto& ls = world.lane_state(lane.id);
        double prev = std::numeric_limits<double>::infinity();
        for (int vid : ls.vehicles) {
          const double p = world.vehicle(vid).position;
          if (p < -1e-9 || p > lane.length + 1e-9) fail("position outside lane", tick);
          if (!(p < prev)) fail("overtaking or stacked vehicles on lane " + std::to_string(lane.id), tick);
          prev = p;
        }
        for (int k = 0; k < static_cast<int>(ls.vehicles.size()); ++k) {
          if (world.vehicle(ls.vehicles[k]).queued != (k < ls.queued)) fail("queued prefix broken", tick);
        }
      }
    }
    result.vehicles = world.spawned_total();
    for (int i = 0; i < static_cast<int>(net.intersections().size()); ++i) result.crossings += world.crossings(i);
    return world_fingerprint(world);
  };

  const std::string first = run(true);
  const std::string second = run(false);
  if (first != second) fail("non-deterministic replay", setup.ticks);
  return result;
}

}  // namespace tsc::check
