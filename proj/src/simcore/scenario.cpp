#include "tsc/simcore/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "tsc/common/errors.hpp"

namespace tsc::sim {

namespace {

using json = nlohmann::ordered_json;

double positive(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw ConfigError(std::string("missing numeric field '") + key + "'");
  const double v = j[key].get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("field '") + key + "' must be positive");
  return v;
}

RouteSpec parse_route(const json& j) {
  if (!j.is_object() || !j.contains("origin") || !j.contains("turns"))
    throw ConfigError("route_spec needs 'origin' and 'turns'");
  const json& origin = j["origin"];
  if (!origin.is_array() || origin.size() != 3 || !origin[0].is_number_integer() || !origin[1].is_number_integer() ||
      !origin[2].is_string() || origin[2].get<std::string>().size() != 1)
    throw ConfigError("route origin must be [row, col, \"N|E|S|W\"]");
  RouteSpec r;
  r.row = origin[0].get<int>();
  r.col = origin[1].get<int>();
  r.approach = direction_from_char(origin[2].get<std::string>()[0]);
  if (!j["turns"].is_string()) throw ConfigError("route turns must be a string of L/T/R");
  for (char c : j["turns"].get<std::string>()) r.turns.push_back(turn_from_char(c));
  return r;
}

}  // namespace

void finalize(Scenario& s) {
  s.network = std::make_shared<const RoadNetwork>(s.rows, s.cols, s.lanes.length, s.lanes.v_free, s.lanes.sat_rate);
  if (!(s.episode_s > 0.0)) throw ConfigError("episode_s must be positive");
  for (const FlowSpec& f : s.flows) {
    if (!(f.interval_s > 0.0)) throw ConfigError("flow interval_s must be positive");
    if (f.start_s < 0.0 || f.end_s < f.start_s) throw ConfigError("flow window must satisfy 0 <= start_s <= end_s");
    s.network->resolve_route(f.route);
  }
}

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("scenario must be a JSON object");
  if (!doc.contains("schema") || doc["schema"] != kScenarioSchema)
    throw ConfigError("unsupported scenario schema (expected 1)");

  Scenario s;
  s.name = doc.value("name", std::string{});
  if (!doc.contains("grid")) throw ConfigError("scenario missing 'grid'");
  const json& grid = doc["grid"];
  if (!grid.contains("rows") || !grid.contains("cols") || !grid["rows"].is_number_integer() ||
      !grid["cols"].is_number_integer())
    throw ConfigError("grid needs integer 'rows' and 'cols'");
  s.rows = grid["rows"].get<int>();
  s.cols = grid["cols"].get<int>();
  if (s.rows < 1 || s.cols < 1) throw ConfigError("grid dimensions must be >= 1");

  if (doc.contains("lanes")) {
    const auto& lanes = doc["lanes"];
    if (!lanes.is_object()) throw ConfigError("'lanes' must be an object");
    if (lanes.contains("length")) s.lanes.length = positive(lanes, "length");
    if (lanes.contains("v_free")) s.lanes.v_free = positive(lanes, "v_free");
    if (lanes.contains("sat_rate")) s.lanes.sat_rate = positive(lanes, "sat_rate");
  }

  if (doc.contains("episode_s")) s.episode_s = positive(doc, "episode_s");
  const std::string arrivals = doc.value("arrivals", std::string("uniform"));
  if (arrivals == "uniform") {
    s.arrivals = ArrivalProcess::Uniform;
  } else if (arrivals == "poisson") {
    s.arrivals = ArrivalProcess::Poisson;
  } else {
    throw ConfigError("arrivals must be 'uniform' or 'poisson'");
  }

  if (!doc.contains("flows") || !doc["flows"].is_array()) throw ConfigError("scenario missing 'flows' array");
  for (const json& f : doc["flows"]) {
    FlowSpec flow;
    if (!f.contains("start_s") || !f.contains("end_s") || !f["start_s"].is_number() || !f["end_s"].is_number())
      throw ConfigError("flow needs numeric start_s and end_s");
    flow.start_s = f["start_s"].get<double>();
    flow.end_s = f["end_s"].get<double>();
    flow.interval_s = positive(f, "interval_s");
    if (!f.contains("route_spec")) throw ConfigError("flow missing 'route_spec'");
    flow.route = parse_route(f["route_spec"]);
    s.flows.push_back(std::move(flow));
  }
  finalize(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario s = parse_scenario(buf.str());
  if (s.name.empty()) s.name = path.stem().string();
  return s;
}

std::string dump_scenario(const Scenario& s) {
  json doc;
  doc["schema"] = kScenarioSchema;
  doc["name"] = s.name;
  doc["grid"] = {{"rows", s.rows}, {"cols", s.cols}};
  doc["lanes"] = {{"length", s.lanes.length}, {"v_free", s.lanes.v_free}, {"sat_rate", s.lanes.sat_rate}};
  doc["episode_s"] = s.episode_s;
  doc["arrivals"] = s.arrivals == ArrivalProcess::Poisson ? "poisson" : "uniform";
  json flows = json::array();
  for (const FlowSpec& f : s.flows) {
    json route;
    route["origin"] = json::array({f.route.row, f.route.col, std::string(1, to_char(f.route.approach))});
    route["turns"] = f.route.turns_string();
    flows.push_back({{"start_s", f.start_s}, {"end_s", f.end_s}, {"interval_s", f.interval_s}, {"route_spec", route}});
  }
  doc["flows"] = std::move(flows);
  return doc.dump(2) + "\n";
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write scenario file " + path.string());
  out << dump_scenario(s);
}

FlowSchedule build_schedule(const Scenario& s, std::uint64_t seed) {
  if (!s.network) throw ConfigError("scenario network not built");
  std::mt19937_64 rng(seed);
  FlowSchedule trips;
  for (const FlowSpec& f : s.flows) {
    const auto route = s.network->resolve_route(f.route);
    const double end = std::min(f.end_s, s.episode_s);
    if (s.arrivals == ArrivalProcess::Uniform) {
      for (long k = 0;; ++k) {
        const double t = f.start_s + static_cast<double>(k) * f.interval_s;
        if (t >= end) break;
        trips.push_back({t, route});
      }
    } else {
      std::exponential_distribution<double> gap(1.0 / f.interval_s);
      for (double t = f.start_s + gap(rng); t < end; t += gap(rng)) trips.push_back({t, route});
    }
  }
  std::stable_sort(trips.begin(), trips.end(), [](const Trip& a, const Trip& b) { return a.time < b.time; });
  return trips;
}

World make_world(const Scenario& s, std::uint64_t seed) {
  World world(s.network);
  world.spawn(build_schedule(s, seed));
  return world;
}

}  // namespace tsc::sim
