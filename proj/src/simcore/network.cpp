#include "tsc/simcore/network.hpp"

#include <cmath>
#include <string>

#include "tsc/common/errors.hpp"

namespace tsc::sim {

namespace {

constexpr std::array<Phase, kPhaseCount> kPhases{{
    {PhaseId::A, {incoming_slot(Direction::North, Turn::Through), incoming_slot(Direction::South, Turn::Through)}},
    {PhaseId::B, {incoming_slot(Direction::East, Turn::Through), incoming_slot(Direction::West, Turn::Through)}},
    {PhaseId::C, {incoming_slot(Direction::North, Turn::Left), incoming_slot(Direction::South, Turn::Left)}},
    {PhaseId::D, {incoming_slot(Direction::East, Turn::Left), incoming_slot(Direction::West, Turn::Left)}},
}};

std::pair<int, int> step_towards(int row, int col, Direction d) {
  switch (d) {
    case Direction::North: return {row - 1, col};
    case Direction::South: return {row + 1, col};
    case Direction::East: return {row, col + 1};
    case Direction::West: return {row, col - 1};
  }
  return {row, col};
}

}  // namespace

char to_char(Direction d) { return "NESW"[static_cast<int>(d)]; }
char to_char(Turn t) { return "LTR"[static_cast<int>(t)]; }
char to_char(PhaseId p) { return "ABCD"[static_cast<int>(p)]; }

Direction direction_from_char(char c) {
  switch (c) {
    case 'N': return Direction::North;
    case 'E': return Direction::East;
    case 'S': return Direction::South;
    case 'W': return Direction::West;
    default: throw ConfigError(std::string("unknown direction '") + c + "'");
  }
}

Turn turn_from_char(char c) {
  switch (c) {
    case 'L': return Turn::Left;
    case 'T': return Turn::Through;
    case 'R': return Turn::Right;
    default: throw ConfigError(std::string("unknown turn '") + c + "'");
  }
}

PhaseId phase_from_char(char c) {
  if (c < 'A' || c > 'D') throw ConfigError(std::string("unknown phase '") + c + "'");
  return static_cast<PhaseId>(c - 'A');
}

const std::array<Phase, kPhaseCount>& phases() { return kPhases; }

bool phase_permits(PhaseId phase, int slot) {
  if (slot_turn(slot) == Turn::Right) return true;
  const auto& p = kPhases[static_cast<int>(phase)];
  return p.slots[0] == slot || p.slots[1] == slot;
}

std::string RouteSpec::turns_string() const {
  std::string s;
  for (Turn t : turns) s.push_back(to_char(t));
  return s;
}

RoadNetwork::RoadNetwork(int rows, int cols, double lane_length, double v_free, double sat_rate)
    : rows_(rows), cols_(cols), lane_length_(lane_length), v_free_(v_free), sat_rate_(sat_rate) {
  if (rows < 1 || cols < 1) throw ConfigError("grid dimensions must be >= 1");
  if (!(lane_length > 0.0)) throw ConfigError("lane_length must be positive");
  if (!(v_free > 0.0)) throw ConfigError("v_free must be positive");
  if (!(sat_rate > 0.0)) throw ConfigError("sat_rate must be positive");
  if (std::floor(lane_length / kVehicleGap) < 1.0) throw ConfigError("lane shorter than one vehicle slot");

  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      Intersection in;
      in.id = static_cast<int>(intersections_.size());
      in.row = r;
      in.col = c;
      in.incoming.fill(-1);
      in.outgoing_roads.fill(-1);
      intersections_.push_back(in);
    }
  }

  // Outgoing roads (internal links and exits), then entry roads.
  for (auto& in : intersections_) {
    for (int h = 0; h < kApproachCount; ++h) {
      const auto heading = static_cast<Direction>(h);
      const auto [nr, nc] = step_towards(in.row, in.col, heading);
      const int to = intersection_at(nr, nc);
      in.outgoing_roads[h] = add_road(in.id, to, heading);
    }
  }
  for (auto& in : intersections_) {
    for (int a = 0; a < kApproachCount; ++a) {
      const auto approach = static_cast<Direction>(a);
      const auto [nr, nc] = step_towards(in.row, in.col, approach);
      if (intersection_at(nr, nc) < 0) add_road(-1, in.id, opposite(approach));
    }
  }

  downstream_road_.assign(lanes_.size(), -1);
  for (const auto& lane : lanes_) {
    if (lane.intersection < 0) continue;
    const auto heading_in = opposite(slot_approach(lane.slot));
    const auto heading_out = turned(heading_in, lane.movement);
    downstream_road_[lane.id] = intersections_[lane.intersection].outgoing_roads[static_cast<int>(heading_out)];
  }
}

int RoadNetwork::add_road(int from, int to, Direction heading) {
  Road road;
  road.id = static_cast<int>(roads_.size());
  road.from = from;
  road.to = to;
  road.heading = heading;
  for (int t = 0; t < kTurnCount; ++t) {
    Lane lane;
    lane.id = static_cast<LaneId>(lanes_.size());
    lane.road = road.id;
    lane.movement = static_cast<Turn>(t);
    lane.length = lane_length_;
    lane.v_free = v_free_;
    lane.sat_rate = sat_rate_;
    lane.capacity = static_cast<int>(std::floor(lane_length_ / kVehicleGap));
    if (to >= 0) {
      lane.intersection = to;
      lane.slot = incoming_slot(opposite(heading), lane.movement);
      intersections_[to].incoming[lane.slot] = lane.id;
    }
    road.lanes[t] = lane.id;
    lanes_.push_back(lane);
  }
  roads_.push_back(road);
  return road.id;
}

const Intersection& RoadNetwork::intersection(int id) const {
  if (id < 0 || id >= static_cast<int>(intersections_.size()))
    throw LookupError("unknown intersection id " + std::to_string(id));
  return intersections_[id];
}

const Lane& RoadNetwork::lane(LaneId id) const {
  if (id < 0 || id >= static_cast<LaneId>(lanes_.size()))
    throw LookupError("unknown lane id " + std::to_string(id));
  return lanes_[id];
}

const Road& RoadNetwork::road(int id) const {
  if (id < 0 || id >= static_cast<int>(roads_.size()))
    throw LookupError("unknown road id " + std::to_string(id));
  return roads_[id];
}

int RoadNetwork::intersection_at(int row, int col) const {
  if (row < 0 || col < 0 || row >= rows_ || col >= cols_) return -1;
  return row * cols_ + col;
}

int RoadNetwork::downstream_road(LaneId id) const {
  lane(id);
  return downstream_road_[id];
}

int RoadNetwork::upstream_intersection(LaneId id) const { return roads_[lane(id).road].from; }

bool RoadNetwork::connected(LaneId from, LaneId to) const {
  const int r = downstream_road(from);
  return r >= 0 && lane(to).road == r;
}

std::vector<LaneId> RoadNetwork::resolve_route(const RouteSpec& route) const {
  const int start = intersection_at(route.row, route.col);
  if (start < 0) throw ConfigError("route origin outside the grid");
  const auto [nr, nc] = step_towards(route.row, route.col, route.approach);
  if (intersection_at(nr, nc) >= 0)
    throw ConfigError(std::string("route origin side ") + to_char(route.approach) + " is not a grid boundary");
  if (route.turns.empty()) throw ConfigError("route has no turns");

  std::vector<LaneId> lanes;
  lanes.push_back(intersections_[start].incoming[incoming_slot(route.approach, route.turns[0])]);
  for (std::size_t k = 0; k < route.turns.size(); ++k) {
    const Road& next = roads_[downstream_road_[lanes.back()]];
    if (next.to < 0) {
      if (k + 1 != route.turns.size())
        throw ConfigError("route '" + route.turns_string() + "' leaves the grid before its last turn");
      lanes.push_back(next.lanes[static_cast<int>(route.turns[k])]);
      return lanes;
    }
    if (k + 1 == route.turns.size())
      throw ConfigError("route '" + route.turns_string() + "' ends inside the grid");
    lanes.push_back(next.lanes[static_cast<int>(route.turns[k + 1])]);
  }
  return lanes;
}

std::vector<LaneId> RoadNetwork::entry_lanes() const {
  std::vector<LaneId> out;
  for (const auto& lane : lanes_)
    if (is_entry_lane(lane.id)) out.push_back(lane.id);
  return out;
}

bool RoadNetwork::is_entry_lane(LaneId id) const {
  const auto& l = lane(id);
  return l.intersection >= 0 && roads_[l.road].from < 0;
}

bool RoadNetwork::is_exit_lane(LaneId id) const { return lane(id).intersection < 0; }

RoadNetwork build_grid(int rows, int cols, double lane_length, double v_free, double sat_rate) {
  return RoadNetwork(rows, cols, lane_length, v_free, sat_rate);
}

}  // namespace tsc::sim
