#include "tsc/experiment/ablate.hpp"

#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include "tsc/common/errors.hpp"
#include "tsc/common/seed.hpp"

namespace tsc::experiment {

AblationMode ablation_mode_from_string(const std::string& s) {
  if (s == "datasets") return AblationMode::Datasets;
  if (s == "fractions") return AblationMode::Fractions;
  throw ConfigError("unknown ablation mode '" + s + "' (expected datasets or fractions)");
}

std::uint64_t subsample_seed(std::uint64_t seed) { return derive_seed(seed, "subsample"); }

namespace {

struct Variant {
  std::string label;
  offline::Provenance provenance;
  double fraction;
};

std::string fraction_label(double f) {
  std::ostringstream s;
  s << f;
  return "fraction_" + s.str();
}

}  // namespace

AblationTable run_ablation(const AblationConfig& cfg) {
  if (cfg.scenarios.empty()) throw ConfigError("ablation needs at least one scenario");
  if (cfg.repeats < 1) throw ConfigError("ablation needs at least one repeat");

  std::vector<Variant> variants;
  if (cfg.mode == AblationMode::Datasets) {
    for (offline::Provenance p : cfg.provenances) variants.push_back({offline::to_string(p), p, 1.0});
  } else {
    for (double f : cfg.fractions) variants.push_back({fraction_label(f), cfg.fraction_provenance, f});
  }

  AblationTable table;
  for (const auto& sc : cfg.scenarios) table.scenarios.push_back(sc.name);
  for (const Variant& v : variants) {
    AblationRow row;
    row.variant = v.label;
    row.travel.assign(cfg.scenarios.size(), {});
    for (int k = 0; k < cfg.repeats; ++k) {
      const std::uint64_t seed = repeat_seed(cfg.seed, k);

      offline::CollectOptions co = cfg.collect;
      co.seed = seed;
      offline::OfflineDataset data = offline::collect(cfg.scenarios, v.provenance, co);
      if (v.fraction < 1.0) data = offline::dataset_subsample(data, v.fraction, subsample_seed(seed));

      offline::TrainerConfig tc = cfg.trainer;
      tc.seed = seed;
      auto params = std::make_shared<const nn::QNetworkParams>(offline::train(data, tc).params);

      EvalOptions eo = cfg.eval;
      eo.seed = seed;
      for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
        auto policy = make_policy(PolicySpec{"datalight", cfg.atc}, params, seed);
        row.travel[s].push_back(evaluate(cfg.scenarios[s], *policy, eo).mean_tail);
      }
    }
    for (const auto& cell : row.travel)
      row.mean.push_back(std::accumulate(cell.begin(), cell.end(), 0.0) / static_cast<double>(cell.size()));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_ablation_csv(std::ostream& out, const AblationTable& table) {
  out << "variant";
  for (const auto& s : table.scenarios) out << ',' << s;
  out << ",mean\n";
  out.precision(10);
  for (const AblationRow& row : table.rows) {
    out << row.variant;
    for (double m : row.mean) out << ',' << m;
    out << ',' << std::accumulate(row.mean.begin(), row.mean.end(), 0.0) / static_cast<double>(row.mean.size())
        << '\n';
  }
}

}  // namespace tsc::experiment
