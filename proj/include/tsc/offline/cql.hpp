#pragma once

#include <span>
#include <vector>

#include "tsc/neural/autograd.hpp"
#include "tsc/neural/qnet.hpp"
#include "tsc/offline/dataset.hpp"

namespace tsc::offline {

/// Scalar parts of one loss evaluation. `cql` is the alpha-weighted
/// regularizer, so total == td + cql.
struct LossTerms {
  double total = 0.0;
  double td = 0.0;
  double cql = 0.0;
};

struct CqlLoss {
  nn::Var loss;
  LossTerms terms;
};

/// Discrete conservative Q-learning objective on precomputed scores.
///   q            [B, 4]  online scores (graph-carrying)
///   q_next_target[B, 4]  target-network scores of s' (treated as constant)
/// loss = alpha * mean(logsumexp_a q - q[a_data])
///      + 0.5 * mean((q[a_data] - (r + gamma * max_a' q_next_target))^2)
CqlLoss cql_objective(const nn::Var& q, const nn::Tensor& q_next_target, const std::vector<int>& actions,
                      std::span<const double> rewards, double alpha, double gamma);

/// Runs both networks on the batch and evaluates cql_objective. Rewards are
/// multiplied by `reward_scale` before the backup. Throws PreconditionError on
/// an empty batch.
CqlLoss cql_loss(std::span<const Transition> batch, const nn::QNetworkParams& params,
                 const nn::QNetworkParams& target_params, double alpha, double gamma, double reward_scale = 1.0);

}  // namespace tsc::offline
