#include "tsc/neural/qnet.hpp"

#include <cmath>
#include <random>

#include "tsc/common/errors.hpp"

namespace tsc::nn {

namespace {

Var uniform_matrix(std::mt19937_64& rng, std::size_t fan_in, std::size_t fan_out) {
  const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t({fan_in, fan_out});
  for (double& v : t.values) v = dist(rng);
  return parameter(std::move(t));
}

Var zeros(std::size_t n) { return parameter(Tensor({n}, 0.0)); }

AttentionParams init_attention(std::mt19937_64& rng) {
  AttentionParams a;
  a.wq = uniform_matrix(rng, kHidden, kHidden);
  a.bq = zeros(kHidden);
  a.wk = uniform_matrix(rng, kHidden, kHidden);
  a.bk = zeros(kHidden);
  a.wv = uniform_matrix(rng, kHidden, kHidden);
  a.bv = zeros(kHidden);
  a.wo = uniform_matrix(rng, kHidden, kHidden);
  a.bo = zeros(kHidden);
  return a;
}

void append_attention(std::vector<std::pair<std::string, Var>>& out, const std::string& prefix,
                      const AttentionParams& a) {
  out.emplace_back(prefix + ".wq", a.wq);
  out.emplace_back(prefix + ".bq", a.bq);
  out.emplace_back(prefix + ".wk", a.wk);
  out.emplace_back(prefix + ".bk", a.bk);
  out.emplace_back(prefix + ".wv", a.wv);
  out.emplace_back(prefix + ".bv", a.bv);
  out.emplace_back(prefix + ".wo", a.wo);
  out.emplace_back(prefix + ".bo", a.bo);
}

Var copy_var(const Var& v, bool requires_grad) {
  return requires_grad ? parameter(v->value) : constant(v->value);
}

AttentionParams clone_attention(const AttentionParams& a, bool rg) {
  return {copy_var(a.wq, rg), copy_var(a.bq, rg), copy_var(a.wk, rg), copy_var(a.bk, rg),
          copy_var(a.wv, rg), copy_var(a.bv, rg), copy_var(a.wo, rg), copy_var(a.bo, rg)};
}

}  // namespace

QNetworkParams QNetworkParams::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  QNetworkParams p;
  p.embed_w = uniform_matrix(rng, kLaneFeatures, kHidden);
  p.embed_b = zeros(kHidden);
  p.fusion = init_attention(rng);
  p.correlation = init_attention(rng);
  p.score_w = uniform_matrix(rng, kHidden, 1);
  p.score_b = zeros(1);
  return p;
}

std::vector<std::pair<std::string, Var>> QNetworkParams::named() const {
  std::vector<std::pair<std::string, Var>> out;
  out.emplace_back("embed.w", embed_w);
  out.emplace_back("embed.b", embed_b);
  append_attention(out, "fusion", fusion);
  append_attention(out, "correlation", correlation);
  out.emplace_back("score.w", score_w);
  out.emplace_back("score.b", score_b);
  return out;
}

std::vector<Var> QNetworkParams::all() const {
  std::vector<Var> out;
  for (auto& [name, v] : named()) out.push_back(v);
  return out;
}

QNetworkParams QNetworkParams::clone(bool requires_grad) const {
  QNetworkParams p;
  p.embed_w = copy_var(embed_w, requires_grad);
  p.embed_b = copy_var(embed_b, requires_grad);
  p.fusion = clone_attention(fusion, requires_grad);
  p.correlation = clone_attention(correlation, requires_grad);
  p.score_w = copy_var(score_w, requires_grad);
  p.score_b = copy_var(score_b, requires_grad);
  return p;
}

void QNetworkParams::copy_values_from(const QNetworkParams& other) {
  auto mine = all();
  auto theirs = other.all();
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (!mine[i]->value.same_shape(theirs[i]->value)) throw DimensionError("parameter shape mismatch in copy");
    mine[i]->value.values = theirs[i]->value.values;
  }
}

void QNetworkParams::zero_grad() {
  for (auto& v : all()) v->zero_grad();
}

bool QNetworkParams::all_finite() const {
  for (auto& v : all())
    if (!v->value.all_finite()) return false;
  return true;
}

Var multi_head_attention(const Var& x, std::size_t seq_len, const AttentionParams& p) {
  Var q = add_bias(matmul(x, p.wq), p.bq);
  Var k = add_bias(matmul(x, p.wk), p.bk);
  Var v = add_bias(matmul(x, p.wv), p.bv);
  Var heads = attention(q, k, v, seq_len, kHeads);
  return add_bias(matmul(heads, p.wo), p.bo);
}

Var embed_lanes(const Var& x, const QNetworkParams& p) { return sigmoid(add_bias(matmul(x, p.embed_w), p.embed_b)); }

Var fuse_phase_lanes(const Var& h1, std::size_t lanes_per_phase, const QNetworkParams& p) {
  return group_mean(multi_head_attention(h1, lanes_per_phase, p.fusion), lanes_per_phase);
}

Tensor phase_lane_inputs(std::span<const features::StateVector> states) {
  const std::size_t rows = states.size() * kPhases * kLanesPerPhase;
  Tensor x({rows, kLaneFeatures});
  std::size_t r = 0;
  for (const auto& s : states) {
    for (const auto& phase : sim::phases()) {
      for (int slot : phase.slots) {
        const std::size_t off = features::state_offset(slot);
        for (std::size_t c = 0; c < kLaneFeatures; ++c) x.values[r * kLaneFeatures + c] = s[off + c];
        ++r;
      }
    }
  }
  return x;
}

Var q_values(std::span<const features::StateVector> states, const QNetworkParams& p) {
  if (states.empty()) throw PreconditionError("q_values: empty batch");
  Var x = constant(phase_lane_inputs(states));
  Var h1 = embed_lanes(x, p);                                  // [B*8, d1]
  Var h2 = fuse_phase_lanes(h1, kLanesPerPhase, p);            // [B*4, d1]
  Var h3 = multi_head_attention(h2, kPhases, p.correlation);   // [B*4, d1]
  Var scores = add_bias(matmul(h3, p.score_w), p.score_b);     // [B*4, 1]
  return reshape(scores, {states.size(), kPhases});
}

std::array<double, kHidden> embed_lane(std::span<const double> x, const QNetworkParams& p) {
  if (x.size() != kLaneFeatures)
    throw DimensionError("embed_lane: expected " + std::to_string(kLaneFeatures) + " features, got " +
                         std::to_string(x.size()));
  NoGradGuard guard;
  Var in = constant(Tensor({1, kLaneFeatures}, std::vector<double>(x.begin(), x.end())));
  Var h = embed_lanes(in, p);
  std::array<double, kHidden> out{};
  std::copy(h->value.values.begin(), h->value.values.end(), out.begin());
  return out;
}

std::array<double, kHidden> phase_feature(std::span<const std::array<double, kHidden>> lane_embeddings,
                                          const QNetworkParams& p) {
  if (lane_embeddings.empty()) throw PreconditionError("phase_feature: empty lane set");
  NoGradGuard guard;
  Tensor t({lane_embeddings.size(), kHidden});
  for (std::size_t i = 0; i < lane_embeddings.size(); ++i)
    std::copy(lane_embeddings[i].begin(), lane_embeddings[i].end(), t.values.begin() + i * kHidden);
  Var h2 = fuse_phase_lanes(constant(std::move(t)), lane_embeddings.size(), p);
  std::array<double, kHidden> out{};
  std::copy(h2->value.values.begin(), h2->value.values.end(), out.begin());
  return out;
}

std::array<double, kPhases> phase_scores(std::span<const double> state, const QNetworkParams& p) {
  if (state.size() != static_cast<std::size_t>(features::kStateSize))
    throw DimensionError("phase_scores: expected " + std::to_string(features::kStateSize) + " state values, got " +
                         std::to_string(state.size()));
  features::StateVector s{};
  std::copy(state.begin(), state.end(), s.begin());
  NoGradGuard guard;
  Var q = q_values(std::span<const features::StateVector>(&s, 1), p);
  std::array<double, kPhases> out{};
  std::copy(q->value.values.begin(), q->value.values.end(), out.begin());
  return out;
}

std::array<double, kPhases> phase_scores(const features::IntersectionObservation& obs, const QNetworkParams& p) {
  const auto s = obs.flatten();
  return phase_scores(std::span<const double>(s), p);
}

int argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw PreconditionError("argmax of an empty range");
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = static_cast<int>(i);
  return best;
}

}  // namespace tsc::nn
