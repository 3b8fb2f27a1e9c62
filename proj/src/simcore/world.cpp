#include "tsc/simcore/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tsc/common/errors.hpp"

namespace tsc::sim {

namespace {
constexpr double kEps = 1e-9;
}

World::World(std::shared_ptr<const RoadNetwork> network) : network_(std::move(network)) {
  if (!network_) throw ConfigError("world requires a network");
  lanes_.resize(network_->lanes().size());
  pending_.resize(network_->lanes().size());
  signals_.resize(network_->intersections().size());
  crossings_.assign(network_->intersections().size(), 0);
}

const SignalState& World::signal(int intersection) const {
  network_->intersection(intersection);
  return signals_[intersection];
}

const LaneState& World::lane_state(LaneId id) const {
  network_->lane(id);
  return lanes_[id];
}

const Vehicle& World::vehicle(int id) const {
  if (id < 0 || id >= static_cast<int>(vehicles_.size()))
    throw LookupError("unknown vehicle id " + std::to_string(id));
  return vehicles_[id];
}

std::int64_t World::pending_total() const {
  return static_cast<std::int64_t>(vehicles_.size()) - spawned_;
}

std::int64_t World::crossings(int intersection) const {
  network_->intersection(intersection);
  return crossings_[intersection];
}

bool World::movement_permitted(LaneId id) const {
  const Lane& lane = network_->lane(id);
  if (lane.intersection < 0) return true;
  if (slot_turn(lane.slot) == Turn::Right) return true;
  const SignalState& s = signals_[lane.intersection];
  return s.red_clearance_remaining <= kEps && phase_permits(s.active_phase, lane.slot);
}

void World::set_phase(int intersection, PhaseId phase) {
  network_->intersection(intersection);
  if (static_cast<int>(phase) < 0 || static_cast<int>(phase) >= kPhaseCount)
    throw PreconditionError("phase out of range");
  SignalState& s = signals_[intersection];
  if (s.active_phase == phase) return;
  s.active_phase = phase;
  s.red_clearance_remaining = kRedClearance;
  s.phase_elapsed = 0.0;
}

void World::spawn(const FlowSchedule& schedule) {
  const RoadNetwork& net = *network_;
  for (const Trip& trip : schedule) {
    if (!std::isfinite(trip.time) || trip.time < 0.0) throw ConfigError("trip time must be finite and >= 0");
    if (trip.route.size() < 2) throw ConfigError("route must contain at least two lanes");
    for (LaneId id : trip.route) {
      if (id < 0 || id >= static_cast<LaneId>(net.lanes().size()))
        throw ConfigError("route references unknown lane " + std::to_string(id));
    }
    if (!net.is_entry_lane(trip.route.front())) throw ConfigError("route must start on an entry lane");
    if (!net.is_exit_lane(trip.route.back())) throw ConfigError("route must end on an exit lane");
    for (std::size_t k = 0; k + 1 < trip.route.size(); ++k) {
      if (!net.connected(trip.route[k], trip.route[k + 1])) throw ConfigError("route lanes are not connected");
    }

    Vehicle v;
    v.id = static_cast<int>(vehicles_.size());
    v.route = trip.route;
    v.enter_time = trip.time;
    vehicles_.push_back(std::move(v));

    auto& waiting = pending_[trip.route.front()];
    const auto pos = std::upper_bound(waiting.begin(), waiting.end(), trip.time,
                                      [this](double t, int id) { return t < vehicles_[id].enter_time; });
    waiting.insert(pos, vehicles_.back().id);
  }
}

bool World::has_entry_space(LaneId id) const {
  const Lane& lane = network_->lanes()[id];
  const LaneState& ls = lanes_[id];
  if (static_cast<int>(ls.vehicles.size()) >= lane.capacity) return false;
  if (ls.vehicles.empty()) return true;
  return vehicles_[ls.vehicles.back()].position >= kVehicleGap - kEps;
}

void World::place_on_lane(int vehicle, LaneId lane) {
  Vehicle& v = vehicles_[vehicle];
  v.position = 0.0;
  v.queued = false;
  lanes_[lane].vehicles.push_back(vehicle);
}

void World::inject(double) {
  for (LaneId id = 0; id < static_cast<LaneId>(pending_.size()); ++id) {
    auto& waiting = pending_[id];
    while (!waiting.empty() && vehicles_[waiting.front()].enter_time <= time_ + kEps && has_entry_space(id)) {
      const int vid = waiting.front();
      waiting.pop_front();
      Vehicle& v = vehicles_[vid];
      v.in_network = true;
      v.current_lane_index = 0;
      place_on_lane(vid, id);
      ++spawned_;
      ++in_network_;
    }
  }
}

void World::discharge(double dt) {
  const auto& lanes = network_->lanes();
  for (const Lane& lane : lanes) {
    if (lane.intersection < 0) continue;
    LaneState& ls = lanes_[lane.id];
    if (!movement_permitted(lane.id)) {
      ls.discharge_credit = 0.0;
      continue;
    }
    ls.discharge_credit += lane.sat_rate * dt;
    bool moved = false;
    while (ls.queued > 0 && ls.discharge_credit >= 1.0 - kEps) {
      const int vid = ls.vehicles.front();
      Vehicle& v = vehicles_[vid];
      const LaneId next = v.route[v.current_lane_index + 1];
      if (!has_entry_space(next)) break;
      ls.vehicles.pop_front();
      --ls.queued;
      ls.discharge_credit -= 1.0;
      ++v.current_lane_index;
      place_on_lane(vid, next);
      ++crossings_[lane.intersection];
      moved = true;
    }
    if (ls.queued == 0) ls.discharge_credit = std::min(ls.discharge_credit, std::max(1.0, lane.sat_rate * dt));
    if (moved) {
      for (int k = 0; k < ls.queued; ++k)
        vehicles_[ls.vehicles[k]].position = lane.length - k * kVehicleGap;
    }
  }
}

void World::advance(double dt) {
  const auto& lanes = network_->lanes();
  for (const Lane& lane : lanes) {
    LaneState& ls = lanes_[lane.id];
    if (ls.vehicles.empty()) continue;
    const bool exit_lane = lane.intersection < 0;
    double ahead = std::numeric_limits<double>::infinity();
    int exits = 0;
    for (std::size_t i = 0; i < ls.vehicles.size(); ++i) {
      Vehicle& v = vehicles_[ls.vehicles[i]];
      if (static_cast<int>(i) < ls.queued) {
        v.position = lane.length - static_cast<double>(i) * kVehicleGap;
        ahead = v.position;
        continue;
      }
      const double free = v.position + lane.v_free * dt;
      if (exit_lane) {
        if (free >= lane.length - kEps && ahead == std::numeric_limits<double>::infinity()) {
          v.exit_time = time_ + dt;
          v.in_network = false;
          ++exits;
          continue;
        }
        v.position = std::min(free, ahead - kVehicleGap);
        ahead = v.position;
        continue;
      }
      const double target = lane.length - static_cast<double>(ls.queued) * kVehicleGap;
      const double reach = std::min(free, ahead - kVehicleGap);
      if (reach >= target - kEps) {
        v.position = target;
        v.queued = true;
        ++ls.queued;
      } else {
        v.position = std::max(v.position, reach);
      }
      ahead = v.position;
    }
    for (int k = 0; k < exits; ++k) ls.vehicles.pop_front();
    exited_ += exits;
    in_network_ -= exits;
  }
}

void World::step(double dt) {
  if (!(dt > 0.0)) throw PreconditionError("dt must be positive");
  inject(dt);
  discharge(dt);
  advance(dt);
  for (SignalState& s : signals_) {
    if (s.red_clearance_remaining > 0.0) s.red_clearance_remaining = std::max(0.0, s.red_clearance_remaining - dt);
    s.phase_elapsed += dt;
  }
  const double before = time_;
  time_ += dt;

  if (trace_) {
    for (const Vehicle& v : vehicles_) {
      if (v.exit_time && *v.exit_time > before + kEps && *v.exit_time <= time_ + kEps) trace_(time_, v, -1, 0.0);
    }
    for (LaneId id = 0; id < static_cast<LaneId>(lanes_.size()); ++id) {
      for (int vid : lanes_[id].vehicles) trace_(time_, vehicles_[vid], id, vehicles_[vid].position);
    }
  }
}

double average_travel_time(const World& world, double episode_end) {
  double total = 0.0;
  std::int64_t count = 0;
  for (const Vehicle& v : world.vehicles()) {
    if (v.enter_time > episode_end + kEps) continue;
    const double end = (v.exit_time && *v.exit_time <= episode_end + kEps) ? *v.exit_time : episode_end;
    total += end - v.enter_time;
    ++count;
  }
  return count == 0 ? 0.0 : total / static_cast<double>(count);
}

}  // namespace tsc::sim
