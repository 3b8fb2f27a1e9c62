#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tsc/experiment/evaluate.hpp"
#include "tsc/offline/collect.hpp"
#include "tsc/offline/trainer.hpp"

namespace tsc::experiment {

enum class AblationMode { Datasets, Fractions };

AblationMode ablation_mode_from_string(const std::string& s);

/// Seed used for the k-th repeat of an ablation rooted at `root`.
inline std::uint64_t repeat_seed(std::uint64_t root, int k) { return root + static_cast<std::uint64_t>(k); }

/// Seed for dataset_subsample when training with a data fraction.
std::uint64_t subsample_seed(std::uint64_t seed);

struct AblationConfig {
  AblationMode mode = AblationMode::Fractions;
  /// Scenarios used both for collection and for evaluation.
  std::vector<sim::Scenario> scenarios;
  offline::CollectOptions collect;
  offline::TrainerConfig trainer;
  EvalOptions eval;
  std::vector<double> fractions = {1.0, 0.5, 0.1, 0.01};
  std::vector<offline::Provenance> provenances = {offline::Provenance::Cycle, offline::Provenance::Random,
                                                  offline::Provenance::ExpertProxy};
  /// Provenance used in fractions mode.
  offline::Provenance fraction_provenance = offline::Provenance::Cycle;
  int repeats = 3;
  std::uint64_t seed = 0;
  bool atc = false;
};

struct AblationRow {
  std::string variant;
  /// travel[scenario][repeat]: mean-of-tail travel time.
  std::vector<std::vector<double>> travel;
  /// Per-scenario average over repeats.
  std::vector<double> mean;
};

struct AblationTable {
  std::vector<std::string> scenarios;
  std::vector<AblationRow> rows;
};

/// Collect -> (subsample) -> train -> evaluate for every variant and repeat.
/// Repeat k uses seed root + k for collection, training and evaluation, so a
/// cell can be reproduced by standalone collect/train/eval runs.
AblationTable run_ablation(const AblationConfig& cfg);

/// CSV `variant,<scenario>...,mean` with one row per variant; cells are
/// averaged over repeats.
void write_ablation_csv(std::ostream& out, const AblationTable& table);

}  // namespace tsc::experiment
