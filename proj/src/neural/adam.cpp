#include "tsc/neural/adam.hpp"

#include <cmath>

#include "tsc/common/errors.hpp"

namespace tsc::nn {

AdamState make_adam_state(std::span<const Tensor> params, double learning_rate) {
  AdamState s;
  s.learning_rate = learning_rate;
  for (const Tensor& p : params) {
    s.first_moment.emplace_back(p.shape, 0.0);
    s.second_moment.emplace_back(p.shape, 0.0);
  }
  return s;
}

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
      params.size() != state.second_moment.size())
    throw DimensionError("adam_step: parameter, gradient and moment counts differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].same_shape(grads[i]) || !params[i].same_shape(state.first_moment[i]) ||
        !params[i].same_shape(state.second_moment[i]))
      throw DimensionError("adam_step: shape mismatch for parameter " + std::to_string(i));
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& x = params[i].values;
    const auto& g = grads[i].values;
    auto& m = state.first_moment[i].values;
    auto& v = state.second_moment[i].values;
    for (std::size_t j = 0; j < x.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      x[j] -= state.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + state.epsilon);
    }
  }
}

Adam::Adam(std::vector<Var> params, double learning_rate) : params_(std::move(params)) {
  std::vector<Tensor> values;
  for (const Var& p : params_) values.push_back(p->value);
  state_ = make_adam_state(values, learning_rate);
}

void Adam::step() {
  std::vector<Tensor> values;
  std::vector<Tensor> grads;
  values.reserve(params_.size());
  grads.reserve(params_.size());
  for (const Var& p : params_) {
    values.push_back(std::move(p->value));
    grads.push_back(p->has_grad() ? p->grad : Tensor(values.back().shape, 0.0));
  }
  adam_step(values, grads, state_);
  for (std::size_t i = 0; i < params_.size(); ++i) params_[i]->value = std::move(values[i]);
}

}  // namespace tsc::nn
