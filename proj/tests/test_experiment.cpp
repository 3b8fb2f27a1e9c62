#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "tsc/common/errors.hpp"
#include "tsc/common/seed.hpp"
#include "tsc/experiment/ablate.hpp"
#include "tsc/experiment/evaluate.hpp"
#include "tsc/experiment/generate.hpp"
#include "tsc/neural/checkpoint.hpp"
#include "tsc/offline/collect.hpp"
#include "tsc/simcore/trajectory.hpp"

using namespace tsc;
using namespace tsc::experiment;
namespace fs = std::filesystem;

namespace {

sim::Scenario small_grid(int rows, int cols, double episode_s = 600.0, std::uint64_t seed = 2) {
  GridSpec spec;
  spec.rows = rows;
  spec.cols = cols;
  spec.pattern = DemandPattern::Peak;
  spec.seed = seed;
  spec.episode_s = episode_s;
  return generate_scenario(spec);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("tsc_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

}  // namespace

TEST(Generate, SameSpecSameScenario) {
  EXPECT_EQ(dump_scenario(small_grid(2, 3)), dump_scenario(small_grid(2, 3)));
  EXPECT_NE(dump_scenario(small_grid(2, 3, 600, 2)), dump_scenario(small_grid(2, 3, 600, 3)));
}

TEST(Generate, JinanSizedGridHasTwelveIntersections) {
  const auto sc = small_grid(3, 4);
  EXPECT_EQ(sc.intersection_count(), 12);
  EXPECT_EQ(sc.network->intersections().size(), 12u);
  EXPECT_EQ(sc.name, "grid3x4_peak");
}

TEST(Generate, EveryBoundaryEntryCarriesThreeFlows) {
  const auto sc = small_grid(2, 3);
  const int entries = 2 * (2 + 3);
  EXPECT_EQ(sc.flows.size(), static_cast<std::size_t>(3 * entries));
  for (const auto& f : sc.flows) EXPECT_NO_THROW(sc.network->resolve_route(f.route));
}

TEST(Generate, PeakDemandFavorsNorthSouth) {
  const auto sc = small_grid(2, 2, 3600);
  const auto sched = sim::build_schedule(sc, 1);
  int ns = 0, ew = 0;
  for (const auto& trip : sched) {
    const auto d = sc.network->roads()[sc.network->lane(trip.route.front()).road].heading;
    (d == sim::Direction::North || d == sim::Direction::South ? ns : ew) += 1;
  }
  EXPECT_GT(ns, 2 * ew);
}

TEST(Generate, StraightRouteTurnsOnceThenLeaves) {
  using sim::Direction;
  using sim::Turn;
  // enter (0,0) from the north heading south, turn left (east) at the 2nd intersection
  const auto t = straight_route_with_turn(3, 3, 0, 0, Direction::North, 1, Turn::Left);
  EXPECT_EQ(t, (std::vector<Turn>{Turn::Through, Turn::Left, Turn::Through, Turn::Through}));
  EXPECT_THROW(generate_scenario(GridSpec{0, 2}), ConfigError);
  EXPECT_THROW(pattern_from_string("rush"), ConfigError);
}

TEST(PolicySpec, ParsesBaseAndWrapper) {
  EXPECT_EQ(parse_policy_spec("datalight+atc").str(), "datalight+atc");
  EXPECT_TRUE(parse_policy_spec("datalight+atc").atc);
  EXPECT_EQ(parse_policy_spec("max_queue").base, "max_queue");
  EXPECT_THROW(parse_policy_spec("sotl"), ConfigError);
  EXPECT_THROW(parse_policy_spec("fixed_time+atc+atc"), ConfigError);
  EXPECT_THROW(make_policy(parse_policy_spec("datalight"), nullptr), ConfigError);
}

TEST(Evaluate, EmptyDemandGivesZeroTravelTime) {
  auto sc = small_grid(1, 1);
  sc.flows.clear();
  auto p = make_policy(parse_policy_spec("fixed_time"), nullptr);
  EvalOptions o;
  o.episodes = 2;
  const auto rep = evaluate(sc, *p, o);
  ASSERT_EQ(rep.episodes.size(), 2u);
  EXPECT_EQ(rep.mean_tail, 0.0);
  EXPECT_EQ(rep.episodes[0].vehicles, 0);
}

TEST(Evaluate, ReplayWithTheSameSeedIsIdentical) {
  const auto sc = small_grid(2, 2);
  EvalOptions o;
  o.episodes = 2;
  o.seed = 8;
  o.keep_phases = true;
  auto p1 = make_policy(parse_policy_spec("random+atc"), nullptr, 4);
  auto p2 = make_policy(parse_policy_spec("random+atc"), nullptr, 4);
  const auto a = evaluate(sc, *p1, o), b = evaluate(sc, *p2, o);
  for (int e = 0; e < 2; ++e) {
    EXPECT_EQ(a.episodes[e].average_travel_time, b.episodes[e].average_travel_time);
    EXPECT_EQ(a.episodes[e].throughput, b.episodes[e].throughput);
    EXPECT_EQ(a.episodes[e].phases, b.episodes[e].phases);
    for (const auto& ph : a.episodes[e].phases) EXPECT_TRUE(policy::is_cyclical(ph));
  }
  EXPECT_NE(a.episodes[0].average_travel_time, a.episodes[1].average_travel_time);
}

TEST(Evaluate, TailMeanAveragesTheLastEpisodes) {
  const auto sc = small_grid(1, 1);
  EvalOptions o;
  o.episodes = 4;
  o.tail = 2;
  auto p = make_policy(parse_policy_spec("max_queue"), nullptr);
  const auto rep = evaluate(sc, *p, o);
  EXPECT_DOUBLE_EQ(rep.mean_tail, (rep.episodes[2].average_travel_time + rep.episodes[3].average_travel_time) / 2);
}

// Travel time recomputed from the raw trajectory log and the trip schedule.
TEST(Evaluate, TravelTimeMatchesTrajectoryScan) {
  const auto sc = small_grid(2, 2, 900);
  const std::uint64_t seed = 5;
  sim::World world = sim::make_world(sc, seed);
  std::ostringstream log;
  sim::TrajectoryLog traj(log);
  traj.attach(world);
  auto p = make_policy(parse_policy_spec("max_queue"), nullptr);
  policy::EpisodeOptions eo;
  eo.duration = sc.episode_s;
  policy::run_episode(world, *p, eo);
  const double metric = sim::average_travel_time(world, sc.episode_s);

  const auto trips = sim::build_schedule(sc, seed);
  std::map<int, double> exit_at;
  std::istringstream in(log.str());
  std::string line;
  std::getline(in, line);
  ASSERT_EQ(line, "t,vehicle_id,lane_id,position");
  while (std::getline(in, line)) {
    double t, pos;
    int id, lane;
    char c;
    std::istringstream row(line);
    row >> t >> c >> id >> c >> lane >> c >> pos;
    if (lane == -1) exit_at[id] = t;
  }
  double total = 0.0;
  int counted = 0;
  for (std::size_t i = 0; i < trips.size(); ++i) {
    if (trips[i].time > sc.episode_s) continue;
    const auto it = exit_at.find(static_cast<int>(i));
    total += (it == exit_at.end() ? sc.episode_s : it->second) - trips[i].time;
    ++counted;
  }
  ASSERT_GT(counted, 0);
  ASSERT_FALSE(exit_at.empty());
  EXPECT_NEAR(metric, total / counted, 1e-9);
}

TEST(Evaluate, ReportCsvHasEpisodeAndSummaryRows) {
  const auto sc = small_grid(1, 2);
  EvalOptions o;
  o.episodes = 3;
  o.seed = 2;
  auto p = make_policy(parse_policy_spec("fixed_time"), nullptr);
  const auto rep = evaluate(sc, *p, o);
  std::ostringstream out;
  write_report_csv(out, {rep});
  std::istringstream in(out.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "scenario,policy,seed,episode,average_travel_time,vehicles,exited,throughput");
  EXPECT_EQ(lines[1].rfind("grid1x2_peak,fixed_time,2,0,", 0), 0u);
  EXPECT_NE(lines[4].find(",mean_last_3,"), std::string::npos);
  EXPECT_NE(lines[1].find(';'), std::string::npos);
}

// Each ablation cell must equal a standalone collect -> train -> evaluate.
TEST(Ablation, CellsMatchStandaloneRuns) {
  AblationConfig cfg;
  cfg.mode = AblationMode::Fractions;
  cfg.scenarios = {small_grid(1, 1, 300), small_grid(1, 2, 300)};
  cfg.collect.episodes = 1;
  cfg.trainer.gradient_steps = 4;
  cfg.trainer.batch_size = 8;
  cfg.eval.episodes = 1;
  cfg.eval.tail = 1;
  cfg.fractions = {1.0, 0.5};
  cfg.repeats = 2;
  cfg.seed = 10;
  const auto table = run_ablation(cfg);
  ASSERT_EQ(table.rows.size(), 2u);
  EXPECT_EQ(table.rows[0].variant, "fraction_1");
  EXPECT_EQ(table.rows[1].variant, "fraction_0.5");
  EXPECT_EQ(table.scenarios, (std::vector<std::string>{"grid1x1_peak", "grid1x2_peak"}));

  const int k = 1;
  const std::uint64_t seed = repeat_seed(cfg.seed, k);
  EXPECT_EQ(seed, 11u);
  auto co = cfg.collect;
  co.seed = seed;
  auto data = offline::collect_cod(cfg.scenarios, co);
  EXPECT_EQ(data.size(), 20u * 3);
  data = offline::dataset_subsample(data, 0.5, subsample_seed(seed));
  auto tc = cfg.trainer;
  tc.seed = seed;
  auto params = std::make_shared<const nn::QNetworkParams>(offline::train(data, tc).params);
  auto eo = cfg.eval;
  eo.seed = seed;
  for (std::size_t s = 0; s < 2; ++s) {
    auto p = make_policy(parse_policy_spec("datalight"), params);
    EXPECT_EQ(table.rows[1].travel[s][k], evaluate(cfg.scenarios[s], *p, eo).mean_tail);
    EXPECT_DOUBLE_EQ(table.rows[1].mean[s], (table.rows[1].travel[s][0] + table.rows[1].travel[s][1]) / 2);
  }

  std::ostringstream csv;
  write_ablation_csv(csv, table);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "variant,grid1x1_peak,grid1x2_peak,mean");
}

TEST(Ablation, DatasetModeHasOneRowPerProvenance) {
  AblationConfig cfg;
  cfg.mode = ablation_mode_from_string("datasets");
  cfg.scenarios = {small_grid(1, 1, 150)};
  cfg.collect.episodes = 1;
  cfg.trainer.gradient_steps = 1;
  cfg.trainer.batch_size = 4;
  cfg.eval.episodes = 1;
  cfg.repeats = 1;
  const auto table = run_ablation(cfg);
  ASSERT_EQ(table.rows.size(), 3u);
  EXPECT_EQ(table.rows[0].variant, "cycle");
  EXPECT_EQ(table.rows[1].variant, "random");
  EXPECT_EQ(table.rows[2].variant, "expert_proxy");
  EXPECT_THROW(ablation_mode_from_string("seeds"), ConfigError);
}

#ifdef TSC_CLI_PATH

namespace {

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(TSC_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, GenIsByteDeterministic) {
  TempDir dir;
  const auto a = dir / "a.json", b = dir / "b.json";
  ASSERT_EQ(run_cli("gen --rows 3 --cols 4 --pattern pulsed --seed 4 --out " + a.string(), dir / "log"), 0);
  ASSERT_EQ(run_cli("gen --rows 3 --cols 4 --pattern pulsed --seed 4 --out " + b.string(), dir / "log"), 0);
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(sim::load_scenario(a).intersection_count(), 12);
}

TEST(Cli, CollectTrainEvalPipeline) {
  TempDir dir;
  const auto sc = dir / "sc.json", ds = dir / "d.ndjson", ck = dir / "m.bin", ck2 = dir / "m2.bin",
             loss = dir / "loss.csv", report = dir / "r.csv";
  ASSERT_EQ(run_cli("gen --rows 2 --cols 2 --pattern peak --episode-s 300 --out " + sc.string(), dir / "log"), 0);
  ASSERT_EQ(run_cli("collect --scenario " + sc.string() + " --episodes 2 --seed 1 --out " + ds.string(), dir / "log"),
            0);
  EXPECT_NE(slurp(dir / "log").find("total: 160 transitions"), std::string::npos) << slurp(dir / "log");
  EXPECT_EQ(offline::load_dataset(ds).size(), 160u);

  ASSERT_EQ(run_cli("train --dataset " + ds.string() + " --steps 0 --seed 6 --out " + ck.string(), dir / "log"), 0);
  const auto init = nn::QNetworkParams::init(derive_seed(6, "init"));
  const auto loaded = nn::load_checkpoint(ck);
  const auto a = loaded.named(), b = init.named();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].second->value.values, b[i].second->value.values);

  const std::string train = "train --dataset " + ds.string() + " --steps 5 --batch 16 --seed 3 --loss " +
                            loss.string() + " --out ";
  ASSERT_EQ(run_cli(train + ck.string(), dir / "log"), 0);
  ASSERT_EQ(run_cli(train + ck2.string(), dir / "log"), 0);
  EXPECT_EQ(slurp(ck), slurp(ck2));
  EXPECT_EQ(slurp(loss).substr(0, 27), "step,loss,td_term,cql_term\n");

  ASSERT_EQ(run_cli("eval --scenario " + sc.string() + " --policy datalight+atc --checkpoint " + ck.string() +
                        " --episodes 2 --seed 1 --out " + report.string() + " --trajectory " +
                        (dir / "traj.csv").string(),
                    dir / "log"),
            0);
  const std::string csv = slurp(report);
  EXPECT_NE(csv.find("datalight+atc"), std::string::npos);
  EXPECT_NE(csv.find("mean_last_2"), std::string::npos);
  const std::string traj = slurp(dir / "traj.csv");
  EXPECT_EQ(traj.substr(0, 30), "t,vehicle_id,lane_id,position\n");
  EXPECT_GT(std::count(traj.begin(), traj.end(), '\n'), 100);
}

TEST(Cli, ConfigurationErrorsExitWithTwo) {
  TempDir dir;
  EXPECT_EQ(run_cli("gen --rows 0 --out " + (dir / "x.json").string(), dir / "log"), 2);
  EXPECT_EQ(run_cli("gen --pattern rush --out " + (dir / "x.json").string(), dir / "log"), 2);
  EXPECT_EQ(run_cli("collect --scenario /nonexistent.json --out " + (dir / "d").string(), dir / "log"), 2);
  EXPECT_EQ(run_cli("frobnicate", dir / "log"), 2);
  EXPECT_EQ(run_cli("train --dataset /nonexistent --out " + (dir / "m").string(), dir / "log"), 2);
  ASSERT_EQ(run_cli("gen --out " + (dir / "s.json").string(), dir / "log"), 0);
  EXPECT_EQ(run_cli("eval --scenario " + (dir / "s.json").string() + " --policy datalight", dir / "log"), 2);
  EXPECT_NE(slurp(dir / "log").find("checkpoint"), std::string::npos);
  EXPECT_EQ(run_cli("eval --scenario " + (dir / "s.json").string() + " --policy sotl", dir / "log"), 2);
  EXPECT_EQ(run_cli("train --dataset x --alpha -1 --out y", dir / "log"), 2);
}

TEST(Cli, DivergentTrainingExitsWithThree) {
  TempDir dir;
  const auto sc = dir / "sc.json", ds = dir / "d.ndjson";
  ASSERT_EQ(run_cli("gen --pattern peak --episode-s 150 --out " + sc.string(), dir / "log"), 0);
  ASSERT_EQ(run_cli("collect --scenario " + sc.string() + " --episodes 1 --out " + ds.string(), dir / "log"), 0);
  EXPECT_EQ(run_cli("train --dataset " + ds.string() + " --steps 50 --batch 4 --lr 1e200 --out " +
                        (dir / "m.bin").string(),
                    dir / "log"),
            3);
  EXPECT_NE(slurp(dir / "log").find("learning rate"), std::string::npos) << slurp(dir / "log");
}

#endif
