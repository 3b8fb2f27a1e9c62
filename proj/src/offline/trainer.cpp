#include "tsc/offline/trainer.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "tsc/common/errors.hpp"
#include "tsc/common/seed.hpp"
#include "tsc/neural/adam.hpp"
#include "tsc/offline/cql.hpp"

namespace tsc::offline {

void validate(const TrainerConfig& cfg) {
  if (!(cfg.alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (cfg.batch_size <= 0) throw ConfigError("batch size must be positive");
  if (cfg.gradient_steps < 0) throw ConfigError("gradient steps must be >= 0");
  if (cfg.target_sync_interval <= 0) throw ConfigError("target sync interval must be positive");
  if (!(cfg.learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(cfg.reward_scale > 0.0) || !std::isfinite(cfg.reward_scale)) throw ConfigError("reward scale must be positive");
}

TrainResult train(const OfflineDataset& data, const TrainerConfig& cfg, const TrainProgress& progress) {
  validate(cfg);
  if (data.empty()) throw PreconditionError("train: dataset is empty");

  TrainResult result{nn::QNetworkParams::init(derive_seed(cfg.seed, "init")), {}};
  nn::QNetworkParams& online = result.params;
  nn::QNetworkParams target = online.clone(false);
  nn::Adam optimizer(online.all(), cfg.learning_rate);

  std::mt19937_64 rng(derive_seed(cfg.seed, "sampling"));
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<Transition> batch(static_cast<std::size_t>(cfg.batch_size));
  result.log.reserve(static_cast<std::size_t>(cfg.gradient_steps));

  for (int step = 1; step <= cfg.gradient_steps; ++step) {
    for (Transition& slot : batch) slot = data.transitions[pick(rng)];

    online.zero_grad();
    CqlLoss l = cql_loss(batch, online, target, cfg.alpha, cfg.gamma, cfg.reward_scale);
    if (!std::isfinite(l.terms.total)) {
      std::ostringstream msg;
      msg << "non-finite loss at step " << step << " (td " << l.terms.td << ", cql " << l.terms.cql
          << "); lower the learning rate (currently " << cfg.learning_rate << ") or the reward scale";
      throw NumericError(msg.str());
    }
    nn::backward(l.loss);
    optimizer.step();
    if (!online.all_finite())
      throw NumericError("parameters diverged at step " + std::to_string(step) + "; lower the learning rate");

    LossRecord rec{step, l.terms.total, l.terms.td, l.terms.cql};
    result.log.push_back(rec);
    if (progress) progress(rec);
    if (step % cfg.target_sync_interval == 0) target.copy_values_from(online);
  }
  return result;
}

void write_loss_csv(std::ostream& out, const std::vector<LossRecord>& log) {
  out << "step,loss,td_term,cql_term\n";
  out.precision(17);
  for (const LossRecord& r : log) out << r.step << ',' << r.loss << ',' << r.td << ',' << r.cql << '\n';
}

void save_loss_csv(const std::filesystem::path& path, const std::vector<LossRecord>& log) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write loss log " + path.string());
  write_loss_csv(out, log);
}

}  // namespace tsc::offline
