#include "tsc/offline/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

#include "tsc/common/errors.hpp"

namespace tsc::offline {

namespace {

using json = nlohmann::ordered_json;

json state_json(const features::StateVector& s) { return json(std::vector<double>(s.begin(), s.end())); }

features::StateVector state_from(const json& j, const char* field) {
  if (!j.is_array() || j.size() != features::StateVector{}.size())
    throw LoadError(std::string("dataset record field '") + field + "' must hold " +
                    std::to_string(features::kStateSize) + " numbers");
  features::StateVector s{};
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = j[i].get<double>();
  return s;
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Cycle: return "cycle";
    case Provenance::Random: return "random";
    case Provenance::ExpertProxy: return "expert_proxy";
  }
  return "unknown";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "cycle") return Provenance::Cycle;
  if (s == "random") return Provenance::Random;
  if (s == "expert_proxy" || s == "expert") return Provenance::ExpertProxy;
  throw ConfigError("unknown provenance '" + s + "' (expected cycle, random or expert_proxy)");
}

void write_dataset(std::ostream& out, const OfflineDataset& data) {
  json header;
  header["schema"] = data.schema_version;
  header["provenance"] = to_string(data.provenance);
  out << header.dump() << '\n';
  for (const Transition& tr : data.transitions) {
    json rec;
    rec["s"] = state_json(tr.s);
    rec["a"] = tr.a;
    rec["r"] = tr.r;
    rec["s_next"] = state_json(tr.s_next);
    rec["intersection"] = tr.intersection_id;
    rec["scenario"] = tr.scenario_id;
    rec["episode"] = tr.episode;
    rec["t"] = tr.t;
    out << rec.dump() << '\n';
  }
  if (!out) throw ConfigError("failed writing dataset");
}

void save_dataset(const std::filesystem::path& path, const OfflineDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write dataset " + path.string());
  write_dataset(out, data);
}

OfflineDataset read_dataset(std::istream& in) {
  OfflineDataset data;
  std::string line;
  if (!std::getline(in, line)) throw LoadError("dataset is empty (missing header)");
  try {
    const json header = json::parse(line);
    if (!header.contains("schema") || header["schema"] != kDatasetSchema)
      throw LoadError("unsupported dataset schema (expected 1)");
    data.schema_version = header["schema"].get<int>();
    data.provenance = provenance_from_string(header.value("provenance", std::string("cycle")));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json rec = json::parse(line);
      Transition tr;
      tr.s = state_from(rec.at("s"), "s");
      tr.a = rec.at("a").get<int>();
      tr.r = rec.at("r").get<double>();
      tr.s_next = state_from(rec.at("s_next"), "s_next");
      tr.intersection_id = rec.at("intersection").get<int>();
      tr.scenario_id = rec.at("scenario").get<int>();
      tr.episode = rec.at("episode").get<int>();
      tr.t = rec.at("t").get<int>();
      if (tr.a < 0 || tr.a >= sim::kPhaseCount)
        throw LoadError("dataset line " + std::to_string(line_no) + ": action out of range");
      data.transitions.push_back(tr);
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("malformed dataset: ") + e.what());
  }
  return data;
}

OfflineDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open dataset " + path.string());
  return read_dataset(in);
}

OfflineDataset dataset_subsample(const OfflineDataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) throw ConfigError("fraction must be in (0, 1]");
  const std::size_t n = data.size();
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first k slots become a uniform sample.
  for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(std::min(k, n));
  std::sort(idx.begin(), idx.end());

  OfflineDataset out;
  out.provenance = data.provenance;
  out.schema_version = data.schema_version;
  out.transitions.reserve(idx.size());
  for (std::size_t i : idx) out.transitions.push_back(data.transitions[i]);
  return out;
}

}  // namespace tsc::offline
