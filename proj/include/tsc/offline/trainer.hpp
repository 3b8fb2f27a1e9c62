#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "tsc/neural/qnet.hpp"
#include "tsc/offline/dataset.hpp"

namespace tsc::offline {

struct TrainerConfig {
  double alpha = 0.0005;
  double gamma = 0.8;
  int batch_size = 256;
  int gradient_steps = 20000;
  int target_sync_interval = 500;
  double learning_rate = 1e-3;
  /// Multiplies every logged reward before the Bellman backup. Raw queue
  /// sums put Q near -200 where the fixed-size conservative term and Adam
  /// steps barely separate the phases; 0.1 keeps Q in single digits.
  double reward_scale = 0.1;
  std::uint64_t seed = 0;
};

/// Throws ConfigError on alpha < 0, gamma outside (0,1) or non-positive sizes.
void validate(const TrainerConfig& cfg);

struct LossRecord {
  int step = 0;
  double loss = 0.0;
  double td = 0.0;
  double cql = 0.0;
};

struct TrainResult {
  nn::QNetworkParams params;
  std::vector<LossRecord> log;
};

using TrainProgress = std::function<void(const LossRecord&)>;

/// Minibatch CQL on the pooled dataset with a single shared parameter set.
/// Batches are drawn uniformly with replacement; the target network is
/// hard-copied every target_sync_interval steps. Throws PreconditionError on
/// an empty dataset and NumericError as soon as a loss or parameter turns
/// non-finite.
TrainResult train(const OfflineDataset& data, const TrainerConfig& cfg, const TrainProgress& progress = {});

/// CSV with header `step,loss,td_term,cql_term`.
void write_loss_csv(std::ostream& out, const std::vector<LossRecord>& log);
void save_loss_csv(const std::filesystem::path& path, const std::vector<LossRecord>& log);

}  // namespace tsc::offline
