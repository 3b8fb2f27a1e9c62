#include "tsc/features/features.hpp"

#include <vector>

#include "tsc/common/errors.hpp"

namespace tsc::features {

using sim::LaneId;
using sim::World;

LaneVector LaneFeatureVector::to_array() const {
  return {is_active_phase, num_vehicles, effective_running,
          segment_counts[0], segment_counts[1], segment_counts[2], segment_counts[3]};
}

std::array<std::array<LaneFeatureVector, 2>, sim::kPhaseCount> IntersectionObservation::phase_lanes() const {
  std::array<std::array<LaneFeatureVector, 2>, sim::kPhaseCount> out{};
  for (const auto& phase : sim::phases()) {
    const int p = static_cast<int>(phase.id);
    out[p][0] = lanes[phase.slots[0]];
    out[p][1] = lanes[phase.slots[1]];
  }
  return out;
}

StateVector IntersectionObservation::flatten() const {
  StateVector s{};
  for (int slot = 0; slot < sim::kIncomingLanes; ++slot) {
    const auto v = lanes[slot].to_array();
    for (int k = 0; k < kFeatureWidth; ++k) s[state_offset(slot) + k] = v[k];
  }
  return s;
}

int queue_length(const World& world, LaneId lane) { return world.lane_state(lane).queued; }

int effective_running(const World& world, LaneId lane, double t_action) {
  if (!(t_action > 0.0)) throw PreconditionError("t_action must be positive");
  const auto& l = world.network().lane(lane);
  const double range = l.v_free * t_action;
  int count = 0;
  for (int vid : world.lane_state(lane).vehicles) {
    const auto& v = world.vehicles()[vid];
    if (!v.queued && l.length - v.position <= range) ++count;
  }
  return count;
}

std::array<int, kSegmentCount> segment_counts(const World& world, LaneId lane) {
  const auto& l = world.network().lane(lane);
  std::vector<double> distances;
  for (int vid : world.lane_state(lane).vehicles) distances.push_back(l.length - world.vehicles()[vid].position);
  return segment_counts_for(distances, l.length);
}

double reward(const World& world, int intersection) {
  const auto& in = world.network().intersection(intersection);
  int total = 0;
  for (LaneId id : in.incoming) total += queue_length(world, id);
  return -static_cast<double>(total);
}

IntersectionObservation observe(const World& world, int intersection, double t_action) {
  const auto& in = world.network().intersection(intersection);
  const auto& sig = world.signal(intersection);
  IntersectionObservation obs;
  obs.intersection = intersection;
  obs.active_phase = sig.active_phase;
  obs.clearing = sig.red_clearance_remaining > 0.0;
  const auto& active = sim::phases()[static_cast<int>(sig.active_phase)];
  for (int slot = 0; slot < sim::kIncomingLanes; ++slot) {
    const LaneId id = in.incoming[slot];
    LaneFeatureVector& f = obs.lanes[slot];
    const bool member = active.slots[0] == slot || active.slots[1] == slot;
    f.is_active_phase = (member && !obs.clearing) ? 1.0 : 0.0;
    f.num_vehicles = static_cast<double>(world.lane_state(id).vehicles.size());
    f.effective_running = effective_running(world, id, t_action);
    const auto seg = segment_counts(world, id);
    for (int k = 0; k < kSegmentCount; ++k) f.segment_counts[k] = seg[k];
    obs.queue_lengths[slot] = queue_length(world, id);
  }
  return obs;
}

}  // namespace tsc::features
