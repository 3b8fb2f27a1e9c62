#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tsc::sim {

enum class Direction : std::uint8_t { North = 0, East = 1, South = 2, West = 3 };
enum class Turn : std::uint8_t { Left = 0, Through = 1, Right = 2 };
enum class PhaseId : std::uint8_t { A = 0, B = 1, C = 2, D = 3 };

inline constexpr int kApproachCount = 4;
inline constexpr int kTurnCount = 3;
inline constexpr int kIncomingLanes = kApproachCount * kTurnCount;
inline constexpr int kPhaseCount = 4;

/// Stopped-vehicle spacing; lane capacity is floor(length / kVehicleGap).
inline constexpr double kVehicleGap = 7.5;
/// All-red time inserted on every phase change.
inline constexpr double kRedClearance = 5.0;

constexpr Direction opposite(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 2) % 4);
}

/// Heading after performing `turn` while travelling in `heading`.
constexpr Direction turned(Direction heading, Turn turn) {
  const int h = static_cast<int>(heading);
  switch (turn) {
    case Turn::Left: return static_cast<Direction>((h + 3) % 4);
    case Turn::Right: return static_cast<Direction>((h + 1) % 4);
    case Turn::Through: break;
  }
  return heading;
}

/// Incoming-lane slot of an intersection: approaches N,E,S,W by turns L,T,R.
constexpr int incoming_slot(Direction approach, Turn turn) {
  return static_cast<int>(approach) * kTurnCount + static_cast<int>(turn);
}

constexpr Direction slot_approach(int slot) { return static_cast<Direction>(slot / kTurnCount); }
constexpr Turn slot_turn(int slot) { return static_cast<Turn>(slot % kTurnCount); }

constexpr PhaseId next_in_cycle(PhaseId p) {
  return static_cast<PhaseId>((static_cast<int>(p) + 1) % kPhaseCount);
}

char to_char(Direction d);
char to_char(Turn t);
char to_char(PhaseId p);
Direction direction_from_char(char c);
Turn turn_from_char(char c);
PhaseId phase_from_char(char c);

/// A phase permits one non-right movement on two opposing approaches.
///   A = N/S through, B = E/W through, C = N/S left, D = E/W left.
struct Phase {
  PhaseId id;
  std::array<int, 2> slots;
};

const std::array<Phase, kPhaseCount>& phases();

/// Right turns are always permitted; other slots only under their phase.
bool phase_permits(PhaseId phase, int slot);

using LaneId = std::int32_t;

struct Lane {
  LaneId id = -1;
  int road = -1;
  Turn movement = Turn::Through;
  double length = 0.0;
  double v_free = 0.0;
  double sat_rate = 0.0;
  int capacity = 0;
  /// Downstream intersection, or -1 for lanes that leave the grid.
  int intersection = -1;
  /// Incoming slot at `intersection`, or -1.
  int slot = -1;
};

struct Road {
  int id = -1;
  /// -1 means outside the grid.
  int from = -1;
  int to = -1;
  Direction heading = Direction::North;
  std::array<LaneId, kTurnCount> lanes{};
};

struct Intersection {
  int id = -1;
  int row = 0;
  int col = 0;
  std::array<LaneId, kIncomingLanes> incoming{};
  /// Outgoing road per heading (N,E,S,W).
  std::array<int, kApproachCount> outgoing_roads{};
};

/// Entry into the grid at a boundary side of intersection (row, col), then
/// one turn per intersection visited until the vehicle leaves the grid.
struct RouteSpec {
  int row = 0;
  int col = 0;
  Direction approach = Direction::North;
  std::vector<Turn> turns;

  std::string turns_string() const;
};

class RoadNetwork {
 public:
  RoadNetwork(int rows, int cols, double lane_length, double v_free, double sat_rate);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double lane_length() const { return lane_length_; }
  double v_free() const { return v_free_; }
  double sat_rate() const { return sat_rate_; }

  const std::vector<Intersection>& intersections() const { return intersections_; }
  const std::vector<Road>& roads() const { return roads_; }
  const std::vector<Lane>& lanes() const { return lanes_; }

  const Intersection& intersection(int id) const;
  const Lane& lane(LaneId id) const;
  const Road& road(int id) const;

  /// Intersection id at grid position, or -1 when outside the grid.
  int intersection_at(int row, int col) const;

  /// Road a vehicle enters after performing the movement of incoming lane `id`.
  int downstream_road(LaneId id) const;

  /// Upstream intersection feeding lane `id`'s road, -1 for entry roads.
  int upstream_intersection(LaneId id) const;

  bool connected(LaneId from, LaneId to) const;

  /// Expands a route into its lane sequence; throws ConfigError when the
  /// route does not start on a boundary or does not end by leaving the grid.
  std::vector<LaneId> resolve_route(const RouteSpec& route) const;

  /// Incoming lanes whose road starts outside the grid.
  std::vector<LaneId> entry_lanes() const;

  bool is_entry_lane(LaneId id) const;
  bool is_exit_lane(LaneId id) const;

 private:
  int add_road(int from, int to, Direction heading);

  int rows_;
  int cols_;
  double lane_length_;
  double v_free_;
  double sat_rate_;
  std::vector<Intersection> intersections_;
  std::vector<Road> roads_;
  std::vector<Lane> lanes_;
  std::vector<int> downstream_road_;
};

/// Builds a rows x cols grid. Every intersection has 4 approaches with
/// left/through/right lanes; boundary sides get entry and exit roads.
RoadNetwork build_grid(int rows, int cols, double lane_length, double v_free, double sat_rate);

}  // namespace tsc::sim
