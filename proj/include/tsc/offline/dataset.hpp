#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tsc/features/features.hpp"

namespace tsc::offline {

inline constexpr int kDatasetSchema = 1;

enum class Provenance { Cycle, Random, ExpertProxy };

std::string to_string(Provenance p);
/// Accepts "cycle", "random", "expert_proxy"; throws ConfigError otherwise.
Provenance provenance_from_string(const std::string& s);

/// One logged decision (s_t, a_t, r_t, s_{t+1}) at a single intersection.
struct Transition {
  features::StateVector s{};
  int a = 0;
  double r = 0.0;
  features::StateVector s_next{};
  int intersection_id = 0;
  int scenario_id = 0;
  int episode = 0;
  /// Decision index within the episode.
  int t = 0;

  bool operator==(const Transition&) const = default;
};

struct OfflineDataset {
  Provenance provenance = Provenance::Cycle;
  int schema_version = kDatasetSchema;
  std::vector<Transition> transitions;

  std::size_t size() const { return transitions.size(); }
  bool empty() const { return transitions.empty(); }
};

/// Newline-delimited JSON: a header line {"schema":1,"provenance":...}
/// followed by one record per transition with fields in the order
/// s, a, r, s_next, intersection, scenario, episode, t. Doubles are written in
/// shortest round-trip decimal form, so write -> read is bit-exact.
void write_dataset(std::ostream& out, const OfflineDataset& data);
void save_dataset(const std::filesystem::path& path, const OfflineDataset& data);
OfflineDataset read_dataset(std::istream& in);
OfflineDataset load_dataset(const std::filesystem::path& path);

/// Uniform subset without replacement of size ceil(fraction * N), returned
/// in original order. Throws ConfigError unless 0 < fraction <= 1.
OfflineDataset dataset_subsample(const OfflineDataset& data, double fraction, std::uint64_t seed);

}  // namespace tsc::offline
