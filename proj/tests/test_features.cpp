#include <gtest/gtest.h>

#include <random>

#include "support/sim_properties.hpp"
#include "tsc/common/errors.hpp"
#include "tsc/features/features.hpp"

using namespace tsc;
using namespace tsc::sim;
using features::observe;

namespace {

std::shared_ptr<const RoadNetwork> single(double length = 300.0) {
  return std::make_shared<const RoadNetwork>(1, 1, length, 10.0, 0.5);
}

std::vector<LaneId> route(const RoadNetwork& net, Direction from, Turn t) {
  return net.resolve_route(RouteSpec{0, 0, from, {t}});
}

void run(World& w, int ticks) {
  for (int k = 0; k < ticks; ++k) w.step();
}

}  // namespace

TEST(QueueLength, EmptyLaneIsZero) {
  World w(single());
  EXPECT_EQ(features::queue_length(w, w.network().intersection(0).incoming[1]), 0);
}

TEST(QueueLength, StoppedVehiclesAtRedAreCounted) {
  auto net = single();
  World w(net);
  w.set_phase(0, PhaseId::B);
  const auto r = route(*net, Direction::North, Turn::Through);
  w.spawn({{0, r}, {1, r}, {2, r}});
  run(w, 60);
  EXPECT_EQ(features::queue_length(w, r[0]), 3);
}

TEST(QueueLength, MovingVehiclesAreNotQueued) {
  auto net = single();
  World w(net);
  w.set_phase(0, PhaseId::B);
  const auto r = route(*net, Direction::North, Turn::Through);
  w.spawn({{0, r}, {1, r}, {2, r}, {40, r}, {41, r}});
  run(w, 45);
  int moving = 0;
  for (const auto& v : w.vehicles()) moving += v.in_network && !v.queued;
  ASSERT_EQ(moving, 2);
  EXPECT_EQ(w.lane_state(r[0]).vehicles.size(), 5u);
  EXPECT_EQ(features::queue_length(w, r[0]), 3);
}

TEST(EffectiveRunning, RangeIsFreeSpeedTimesActionDuration) {
  auto net = single();
  World w(net);
  const auto r = route(*net, Direction::East, Turn::Through);
  w.set_phase(0, PhaseId::A);
  w.spawn({{0, r}, {2, r}});
  run(w, 16);
  // positions 160 and 140 -> distances 140 and 160 against a 150 m range
  ASSERT_DOUBLE_EQ(w.vehicle(0).position, 160.0);
  ASSERT_DOUBLE_EQ(w.vehicle(1).position, 140.0);
  EXPECT_EQ(features::effective_running(w, r[0], 15.0), 1);
  EXPECT_EQ(features::effective_running(w, r[0], 16.0), 2);
  EXPECT_THROW(features::effective_running(w, r[0], 0.0), PreconditionError);
}

TEST(EffectiveRunning, StoppedVehiclesNeverCount) {
  auto net = single();
  World w(net);
  w.set_phase(0, PhaseId::B);
  const auto r = route(*net, Direction::North, Turn::Through);
  w.spawn({{0, r}, {1, r}});
  run(w, 60);
  EXPECT_EQ(features::effective_running(w, r[0], 15.0), 0);
  EXPECT_EQ(features::effective_running(w, r[0], 1000.0), 0);
}

TEST(SegmentCounts, HalfOpenHundredMetreBands) {
  const std::vector<double> d = {10.0, 110.0, 350.0};
  EXPECT_EQ(features::segment_counts_for(d, 400.0), (std::array<int, 4>{1, 1, 0, 1}));
  EXPECT_EQ(features::segment_counts_for(std::vector<double>{100.0}, 400.0), (std::array<int, 4>{0, 1, 0, 0}));
  EXPECT_EQ(features::segment_counts_for(std::vector<double>{99.999}, 400.0), (std::array<int, 4>{1, 0, 0, 0}));
}

TEST(SegmentCounts, BandsPastLaneEndAreZero) {
  // on a 300 m lane the fourth band is padding
  EXPECT_EQ(features::segment_counts_for(std::vector<double>{0.0, 150.0, 299.0, 300.0}, 300.0),
            (std::array<int, 4>{1, 1, 1, 0}));
  auto net = single(300.0);
  World w(net);
  const auto r = route(*net, Direction::South, Turn::Left);
  w.set_phase(0, PhaseId::A);
  FlowSchedule s;
  for (int k = 0; k < 30; ++k) s.push_back({static_cast<double>(k), r});
  w.spawn(s);
  for (int t = 0; t < 80; ++t) {
    w.step();
    EXPECT_EQ(features::segment_counts(w, r[0])[3], 0);
  }
}

TEST(Reward, EmptyIntersectionIsZero) {
  World w(single());
  EXPECT_EQ(features::reward(w, 0), 0.0);
}

TEST(Reward, NegatedQueueSum) {
  auto net = single();
  World w(net);
  w.set_phase(0, PhaseId::C);  // N through and W left are red
  const auto a = route(*net, Direction::North, Turn::Through);
  const auto b = route(*net, Direction::West, Turn::Left);
  w.spawn({{0, a}, {1, a}, {0, b}, {1, b}, {2, b}});
  run(w, 60);
  const auto& in = net->intersection(0);
  ASSERT_EQ(features::queue_length(w, in.incoming[incoming_slot(Direction::North, Turn::Through)]), 2);
  ASSERT_EQ(features::queue_length(w, in.incoming[incoming_slot(Direction::West, Turn::Left)]), 3);
  EXPECT_EQ(features::reward(w, 0), -5.0);
}

TEST(Observe, ClearanceZeroesEveryPhaseBit) {
  World w(single());
  w.set_phase(0, PhaseId::D);
  const auto obs = observe(w, 0, 15.0);
  EXPECT_TRUE(obs.clearing);
  for (const auto& lane : obs.lanes) EXPECT_EQ(lane.is_active_phase, 0.0);
}

TEST(Observe, EmptyNetworkHasOnlyPhaseBits) {
  World w(single());
  const auto obs = observe(w, 0, 15.0);
  const auto s = obs.flatten();
  for (int slot = 0; slot < kIncomingLanes; ++slot) {
    const bool member = phase_permits(PhaseId::A, slot) && slot_turn(slot) != Turn::Right;
    EXPECT_EQ(s[features::state_offset(slot)], member ? 1.0 : 0.0) << slot;
    for (int k = 1; k < features::kFeatureWidth; ++k) EXPECT_EQ(s[features::state_offset(slot) + k], 0.0);
  }
  EXPECT_EQ(obs.phase_lanes()[0][0].is_active_phase, 1.0);
  EXPECT_EQ(obs.phase_lanes()[0][1].is_active_phase, 1.0);
  EXPECT_EQ(obs.phase_lanes()[1][0].is_active_phase, 0.0);
}

// Field-wise enumeration oracle on randomized worlds.
TEST(Observe, MatchesPerVehicleEnumeration) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto setup = check::random_setup(seed);
    World w(setup.network);
    w.spawn(setup.schedule);
    std::size_t cmd = 0;
    for (int t = 0; t < setup.ticks; ++t) {
      while (cmd < setup.commands.size() && std::get<0>(setup.commands[cmd]) == t) {
        w.set_phase(std::get<1>(setup.commands[cmd]), std::get<2>(setup.commands[cmd]));
        ++cmd;
      }
      w.step();
      if (t % 7 != 0) continue;
      for (const auto& in : setup.network->intersections()) {
        const auto obs = observe(w, in.id, 15.0);
        const auto again = observe(w, in.id, 15.0);
        EXPECT_EQ(obs.flatten(), again.flatten());
        int total_queue = 0;
        for (int slot = 0; slot < kIncomingLanes; ++slot) {
          const Lane& lane = setup.network->lane(in.incoming[slot]);
          int num = 0, queued = 0, running = 0;
          std::array<int, 4> seg{};
          for (const auto& v : w.vehicles()) {
            if (!v.in_network || v.current_lane() != lane.id) continue;
            ++num;
            const double dist = lane.length - v.position;
            if (v.queued) ++queued;
            else if (dist <= lane.v_free * 15.0) ++running;
            for (int k = 0; k < 4; ++k)
              if (dist >= 100.0 * k && dist < 100.0 * (k + 1) && 100.0 * k < lane.length) ++seg[k];
          }
          const auto& f = obs.lanes[slot];
          EXPECT_EQ(f.num_vehicles, num);
          EXPECT_EQ(obs.queue_lengths[slot], queued);
          EXPECT_EQ(f.effective_running, running);
          for (int k = 0; k < 4; ++k) EXPECT_EQ(f.segment_counts[k], seg[k]);
          EXPECT_LE(f.effective_running + queued, f.num_vehicles);
          EXPECT_LE(f.segment_counts[0] + f.segment_counts[1] + f.segment_counts[2] + f.segment_counts[3],
                    f.num_vehicles);
          total_queue += queued;
        }
        const double r = features::reward(w, in.id);
        EXPECT_EQ(r, -static_cast<double>(total_queue));
        EXPECT_LE(r, 0.0);
      }
    }
  }
}
