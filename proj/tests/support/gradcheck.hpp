#pragma once

// Central-difference check of the full CQL loss against reverse-mode
// gradients, coordinate by coordinate.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "support/qnet_oracle.hpp"
#include "tsc/neural/autograd.hpp"
#include "tsc/offline/cql.hpp"

namespace tsc::check {

struct GradCheckResult {
  double worst_relative_error = 0.0;
  std::string worst_tensor;
  int coordinates = 0;
  int tensors = 0;
};

inline std::vector<offline::Transition> random_batch(std::mt19937_64& rng, int size) {
  std::vector<offline::Transition> batch(size);
  for (auto& tr : batch) {
    tr.s = random_state(rng, 6);
    tr.s_next = random_state(rng, 6);
    tr.a = std::uniform_int_distribution<int>(0, 3)(rng);
    tr.r = -std::uniform_int_distribution<int>(0, 20)(rng);
  }
  return batch;
}

inline double relative_error(double analytic, double numeric) {
  const double diff = std::abs(analytic - numeric);
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  // Both effectively zero: compare absolutely.
  if (scale < 1e-7) return diff < 1e-9 ? 0.0 : diff / 1e-7;
  return diff / scale;
}

inline GradCheckResult check_cql_gradients(std::uint64_t seed, int per_tensor = 20, double h = 1e-4,
                                           double alpha = 0.5, int batch_size = 6) {
  std::mt19937_64 rng(seed);
  nn::QNetworkParams params = random_params(seed);
  nn::QNetworkParams target = random_params(seed + 1).clone(false);
  const auto batch = random_batch(rng, batch_size);
  const double gamma = 0.8;

  params.zero_grad();
  auto loss = offline::cql_loss(batch, params, target, alpha, gamma);
  nn::backward(loss.loss);

  auto value = [&] {
    nn::NoGradGuard guard;
    return offline::cql_loss(batch, params, target, alpha, gamma).terms.total;
  };

  GradCheckResult result;
  for (auto& [name, var] : params.named()) {
    ++result.tensors;
    const std::size_t n = var->value.size();
    std::vector<std::size_t> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(std::min<std::size_t>(n, per_tensor));
    for (std::size_t c : coords) {
      const double original = var->value.values[c];
      var->value.values[c] = original + h;
      const double up = value();
      var->value.values[c] = original - h;
      const double down = value();
      var->value.values[c] = original;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = var->has_grad() ? var->grad.values[c] : 0.0;
      const double err = relative_error(analytic, numeric);
      ++result.coordinates;
      if (err > result.worst_relative_error) {
        result.worst_relative_error = err;
        result.worst_tensor = name + "[" + std::to_string(c) + "]";
      }
    }
  }
  return result;
}

}  // namespace tsc::check
