#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsc/features/features.hpp"
#include "tsc/neural/autograd.hpp"

namespace tsc::nn {

inline constexpr std::size_t kLaneFeatures = features::kFeatureWidth;  // m
inline constexpr std::size_t kHidden = 32;                            // d1
inline constexpr std::size_t kHeads = 4;
inline constexpr std::size_t kLanesPerPhase = 2;
inline constexpr std::size_t kPhases = sim::kPhaseCount;

static_assert(kHidden % kHeads == 0);

/// Projections of one multi-head self-attention block (d1 -> d1 each).
struct AttentionParams {
  Var wq, bq, wk, bk, wv, bv, wo, bo;
};

/// Learnable tensors of the lane-embedding / phase-fusion / phase-correlation
/// / score network.
struct QNetworkParams {
  Var embed_w;  // [m, d1]
  Var embed_b;  // [d1]
  AttentionParams fusion;
  AttentionParams correlation;
  Var score_w;  // [d1, 1]
  Var score_b;  // [1]

  /// uniform(-sqrt(1/fan_in), sqrt(1/fan_in)) weights, zero biases.
  static QNetworkParams init(std::uint64_t seed);

  /// Stable (name, tensor) list; the order defines checkpoint layout.
  std::vector<std::pair<std::string, Var>> named() const;
  std::vector<Var> all() const;

  /// Deep copy. Target networks use requires_grad = false.
  QNetworkParams clone(bool requires_grad = true) const;
  void copy_values_from(const QNetworkParams& other);
  void zero_grad();
  bool all_finite() const;
};

/// Multi-head self-attention over consecutive sequences of `seq_len` rows.
Var multi_head_attention(const Var& x, std::size_t seq_len, const AttentionParams& p);

/// sigmoid(x W_e + b_e) for rows of lane features.
Var embed_lanes(const Var& x, const QNetworkParams& p);

/// Self-attention fusion over each phase's lanes, then mean over lanes.
/// `h1` is [n * lanes_per_phase, d1]; returns [n, d1].
Var fuse_phase_lanes(const Var& h1, std::size_t lanes_per_phase, const QNetworkParams& p);

/// Lane rows [B * 4 * 2, m] for a batch of states, ordered (state, phase, lane).
Tensor phase_lane_inputs(std::span<const features::StateVector> states);

/// Phase scores [B, 4] for a batch of flattened states.
Var q_values(std::span<const features::StateVector> states, const QNetworkParams& p);

// Single-sample value helpers (no graph is kept by callers).
std::array<double, kHidden> embed_lane(std::span<const double> x, const QNetworkParams& p);
std::array<double, kHidden> phase_feature(std::span<const std::array<double, kHidden>> lane_embeddings,
                                          const QNetworkParams& p);
/// `state` must hold 12 x 7 lane features.
std::array<double, kPhases> phase_scores(std::span<const double> state, const QNetworkParams& p);
std::array<double, kPhases> phase_scores(const features::IntersectionObservation& obs, const QNetworkParams& p);

/// Index of the maximum; ties go to the lowest index.
int argmax_lowest(std::span<const double> values);

}  // namespace tsc::nn
