#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "tsc/simcore/network.hpp"

namespace tsc::sim {

struct Vehicle {
  int id = -1;
  std::vector<LaneId> route;
  /// Scheduled departure; delayed injections keep this value.
  double enter_time = 0.0;
  std::optional<double> exit_time;
  int current_lane_index = 0;
  /// Meters from the entry of the current lane.
  double position = 0.0;
  /// Stopped in the lane's queue (speed 0).
  bool queued = false;
  bool in_network = false;

  LaneId current_lane() const { return route[current_lane_index]; }
  bool pending() const { return !in_network && !exit_time; }
};

struct SignalState {
  PhaseId active_phase = PhaseId::A;
  double red_clearance_remaining = 0.0;
  double phase_elapsed = 0.0;
};

/// Per-lane dynamic state. `vehicles` is FIFO (head = closest to the stop
/// line); the first `queued` of them are stopped and packed at the stop line.
struct LaneState {
  std::deque<int> vehicles;
  int queued = 0;
  double discharge_credit = 0.0;
};

struct Trip {
  double time = 0.0;
  std::vector<LaneId> route;
};

using FlowSchedule = std::vector<Trip>;

/// Called once per vehicle per tick after the tick completes; `lane` is -1
/// on the tick a vehicle leaves the network.
using TraceFn = std::function<void(double t, const Vehicle& v, LaneId lane, double position)>;

/// Point-queue microsimulation state. Copyable; the network is shared and
/// immutable, everything else is owned.
class World {
 public:
  explicit World(std::shared_ptr<const RoadNetwork> network);

  /// Advances one tick: inject pending trips, discharge queue heads on
  /// permitted movements, advance moving vehicles, count down signals.
  void step(double dt = 1.0);

  void set_phase(int intersection, PhaseId phase);

  /// Schedules trips. Routes are validated against the network.
  void spawn(const FlowSchedule& schedule);

  double time() const { return time_; }
  const RoadNetwork& network() const { return *network_; }
  const std::shared_ptr<const RoadNetwork>& network_ptr() const { return network_; }

  const SignalState& signal(int intersection) const;
  const LaneState& lane_state(LaneId id) const;
  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  const Vehicle& vehicle(int id) const;

  /// True when the lane's head vehicle may cross its stop line this tick.
  bool movement_permitted(LaneId id) const;

  std::int64_t spawned_total() const { return spawned_; }
  std::int64_t exited_total() const { return exited_; }
  std::int64_t in_network() const { return in_network_; }
  std::int64_t pending_total() const;
  /// Stop-line crossings at an intersection since the start.
  std::int64_t crossings(int intersection) const;

  void set_trace(TraceFn fn) { trace_ = std::move(fn); }

 private:
  bool has_entry_space(LaneId id) const;
  void place_on_lane(int vehicle, LaneId lane);
  void inject(double dt);
  void discharge(double dt);
  void advance(double dt);

  std::shared_ptr<const RoadNetwork> network_;
  double time_ = 0.0;
  std::vector<Vehicle> vehicles_;
  std::vector<LaneState> lanes_;
  std::vector<SignalState> signals_;
  std::vector<std::int64_t> crossings_;
  /// Per entry lane, vehicle ids waiting to enter, in schedule order.
  std::vector<std::deque<int>> pending_;
  std::int64_t spawned_ = 0;
  std::int64_t exited_ = 0;
  std::int64_t in_network_ = 0;
  TraceFn trace_;
};

/// Mean over every scheduled vehicle with enter_time <= episode_end of
/// (exit_time - enter_time); vehicles without an exit use episode_end.
/// Returns 0 when no vehicle qualifies.
double average_travel_time(const World& world, double episode_end);

}  // namespace tsc::sim
