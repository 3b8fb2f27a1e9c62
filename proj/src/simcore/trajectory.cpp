#include "tsc/simcore/trajectory.hpp"

namespace tsc::sim {

TrajectoryLog::TrajectoryLog(std::ostream& out) : out_(&out) { *out_ << "t,vehicle_id,lane_id,position\n"; }

void TrajectoryLog::attach(World& world) {
  std::ostream* out = out_;
  world.set_trace([out](double t, const Vehicle& v, LaneId lane, double position) {
    *out << t << ',' << v.id << ',' << lane << ',' << position << '\n';
  });
}

}  // namespace tsc::sim
