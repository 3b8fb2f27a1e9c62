#include "tsc/offline/cql.hpp"

#include <algorithm>

#include "tsc/common/errors.hpp"

namespace tsc::offline {

using nn::Tensor;
using nn::Var;

CqlLoss cql_objective(const Var& q, const Tensor& q_next_target, const std::vector<int>& actions,
                      std::span<const double> rewards, double alpha, double gamma) {
  if (!q || q->value.shape.size() != 2) throw DimensionError("cql_objective: scores must be [B, A]");
  const std::size_t b = q->value.shape[0];
  const std::size_t a = q->value.shape[1];
  if (b == 0) throw PreconditionError("cql_objective: empty batch");
  if (q_next_target.shape != q->value.shape || actions.size() != b || rewards.size() != b)
    throw DimensionError("cql_objective: batch components disagree in size");

  std::vector<double> targets(b);
  for (std::size_t i = 0; i < b; ++i) {
    const double* row = q_next_target.values.data() + i * a;
    targets[i] = rewards[i] + gamma * *std::max_element(row, row + a);
  }

  Var chosen = nn::gather_rows(q, actions);
  Var gap = nn::sub(nn::logsumexp_rows(q), chosen);
  Var cql = nn::scale(nn::mean(gap), alpha);
  Var err = nn::sub(chosen, nn::constant(Tensor({b}, std::move(targets))));
  Var td = nn::scale(nn::mean(nn::square(err)), 0.5);
  Var total = nn::add(cql, td);

  CqlLoss out;
  out.terms.td = td->value.values[0];
  out.terms.cql = cql->value.values[0];
  out.terms.total = total->value.values[0];
  out.loss = std::move(total);
  return out;
}

CqlLoss cql_loss(std::span<const Transition> batch, const nn::QNetworkParams& params,
                 const nn::QNetworkParams& target_params, double alpha, double gamma, double reward_scale) {
  if (batch.empty()) throw PreconditionError("cql_loss: empty batch");
  std::vector<features::StateVector> states, next_states;
  std::vector<int> actions;
  std::vector<double> rewards;
  states.reserve(batch.size());
  next_states.reserve(batch.size());
  actions.reserve(batch.size());
  rewards.reserve(batch.size());
  for (const Transition& tr : batch) {
    states.push_back(tr.s);
    next_states.push_back(tr.s_next);
    actions.push_back(tr.a);
    rewards.push_back(tr.r * reward_scale);
  }

  Tensor q_next;
  {
    nn::NoGradGuard no_grad;
    q_next = nn::q_values(next_states, target_params)->value;
  }
  Var q = nn::q_values(states, params);
  return cql_objective(q, q_next, actions, rewards, alpha, gamma);
}

}  // namespace tsc::offline
