#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "tsc/neural/tensor.hpp"

namespace tsc::nn {

class Node;
using Var = std::shared_ptr<Node>;

/// A value in the recorded computation. Operations on Vars that depend on at
/// least one grad-requiring input record their parents and a backward rule;
/// everything else is evaluated eagerly without a graph.
class Node {
 public:
  Tensor value;
  /// Empty until the first gradient is accumulated, then shaped like value.
  Tensor grad;
  bool requires_grad = false;

  bool is_leaf() const { return parents_.empty() && !backward_; }
  bool has_grad() const { return !grad.values.empty(); }
  void zero_grad();
  /// Gradient buffer, allocated on first use.
  Tensor& grad_buffer();

 private:
  friend Var make_node(Tensor, std::vector<Var>, std::function<void(Node&)>);
  friend void backward(const Var&);

  std::vector<Var> parents_;
  std::function<void(Node&)> backward_;
  bool released_ = false;
};

Var parameter(Tensor value);
Var constant(Tensor value);

/// Records `value` as the result of an op over `parents`; `rule` receives the
/// result node and must add its contribution to each parent's grad_buffer().
Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> rule);

/// a [n,k] x b [k,m]
Var matmul(const Var& a, const Var& b);
/// x [n,m] + bias [m] broadcast over rows
Var add_bias(const Var& x, const Var& bias);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var scale(const Var& x, double factor);
Var sigmoid(const Var& x);
Var square(const Var& x);
/// Scalar sum / mean over all entries.
Var sum(const Var& x);
Var mean(const Var& x);
Var reshape(const Var& x, std::vector<std::size_t> shape);
/// [n*g, d] -> [n, d], averaging each consecutive block of g rows.
Var group_mean(const Var& x, std::size_t group);
/// Scaled dot-product self-attention over consecutive sequences of
/// `seq_len` rows; q, k, v are [n*seq_len, d] with d split into `heads`.
Var attention(const Var& q, const Var& k, const Var& v, std::size_t seq_len, std::size_t heads);
/// [n,m] -> [n], numerically stable (max-subtracted).
Var logsumexp_rows(const Var& x);
/// [n,m] -> [n], picking column index[r] from row r.
Var gather_rows(const Var& x, const std::vector<int>& index);

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Reverse pass from a scalar. Accumulates into every reachable
/// grad-requiring node and then releases the recorded graph.
void backward(const Var& loss);

}  // namespace tsc::nn
