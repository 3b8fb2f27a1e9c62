#pragma once

#include <ostream>

#include "tsc/simcore/world.hpp"

namespace tsc::sim {

/// Debug trajectory log: CSV `t,vehicle_id,lane_id,position`, one row per
/// vehicle per tick. A row with lane_id -1 marks the tick a vehicle exits.
class TrajectoryLog {
 public:
  explicit TrajectoryLog(std::ostream& out);

  /// Installs the log as the world's trace hook. The stream must outlive it.
  void attach(World& world);

 private:
  std::ostream* out_;
};

}  // namespace tsc::sim
