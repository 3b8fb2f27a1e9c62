#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tsc/neural/autograd.hpp"
#include "tsc/neural/tensor.hpp"

namespace tsc::nn {

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::int64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moments shaped like `params`, zero-filled.
AdamState make_adam_state(std::span<const Tensor> params, double learning_rate);

/// One bias-corrected Adam update in place. Throws DimensionError when
/// params, grads and moments disagree in count or shape.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state);

/// Adam over a fixed set of graph parameters; missing gradients count as zero.
class Adam {
 public:
  Adam(std::vector<Var> params, double learning_rate);

  void step();
  const AdamState& state() const { return state_; }

 private:
  std::vector<Var> params_;
  AdamState state_;
};

}  // namespace tsc::nn
