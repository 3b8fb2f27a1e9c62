#include "tsc/neural/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "tsc/common/errors.hpp"

namespace tsc::nn {

namespace {

void require(const Var& v, const char* op) {
  if (!v) throw UsageError(std::string(op) + ": null input");
}

void require_matrix(const Var& v, const char* op) {
  require(v, op);
  if (v->value.rank() != 2)
    throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_string(v->value.shape));
}

thread_local bool g_recording = true;

}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_recording) { g_recording = false; }
NoGradGuard::~NoGradGuard() { g_recording = previous_; }

void Node::zero_grad() {
  if (!grad.values.empty()) std::fill(grad.values.begin(), grad.values.end(), 0.0);
}

Tensor& Node::grad_buffer() {
  if (grad.values.empty()) grad = Tensor(value.shape, 0.0);
  return grad;
}

Var parameter(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = true;
  return n;
}

Var constant(Tensor value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return n;
}

Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> rule) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = g_recording && std::any_of(parents.begin(), parents.end(), [](const Var& p) { return p->requires_grad; });
  if (n->requires_grad) {
    n->parents_ = std::move(parents);
    n->backward_ = std::move(rule);
  }
  return n;
}

Var matmul(const Var& a, const Var& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  const std::size_t n = a->value.shape[0], k = a->value.shape[1], m = b->value.shape[1];
  if (b->value.shape[0] != k)
    throw DimensionError("matmul: " + shape_string(a->value.shape) + " x " + shape_string(b->value.shape));
  Tensor out({n, m});
  const double* A = a->value.values.data();
  const double* B = b->value.values.data();
  double* C = out.values.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      const double* brow = B + p * m;
      double* crow = C + i * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
    }
  }
  return make_node(std::move(out), {a, b}, [a, b, n, k, m](Node& self) {
    const double* G = self.grad.values.data();
    if (a->requires_grad) {
      double* dA = a->grad_buffer().values.data();
      const double* B = b->value.values.data();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += G[i * m + j] * B[p * m + j];
          dA[i * k + p] += acc;
        }
    }
    if (b->requires_grad) {
      double* dB = b->grad_buffer().values.data();
      const double* A = a->value.values.data();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A[i * k + p];
          for (std::size_t j = 0; j < m; ++j) dB[p * m + j] += aip * G[i * m + j];
        }
    }
  });
}

Var add_bias(const Var& x, const Var& bias) {
  require_matrix(x, "add_bias");
  require(bias, "add_bias");
  const std::size_t n = x->value.shape[0], m = x->value.shape[1];
  if (bias->value.size() != m)
    throw DimensionError("add_bias: bias " + shape_string(bias->value.shape) + " vs " + shape_string(x->value.shape));
  Tensor out = x->value;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out.values[i * m + j] += bias->value.values[j];
  return make_node(std::move(out), {x, bias}, [x, bias, n, m](Node& self) {
    const auto& G = self.grad.values;
    if (x->requires_grad) {
      auto& dx = x->grad_buffer().values;
      for (std::size_t i = 0; i < n * m; ++i) dx[i] += G[i];
    }
    if (bias->requires_grad) {
      auto& db = bias->grad_buffer().values;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) db[j] += G[i * m + j];
    }
  });
}

namespace {

Var elementwise_binary(const Var& a, const Var& b, double sign, const char* op) {
  require(a, op);
  require(b, op);
  if (!a->value.same_shape(b->value))
    throw DimensionError(std::string(op) + ": " + shape_string(a->value.shape) + " vs " + shape_string(b->value.shape));
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += sign * b->value.values[i];
  return make_node(std::move(out), {a, b}, [a, b, sign](Node& self) {
    const auto& G = self.grad.values;
    if (a->requires_grad) {
      auto& da = a->grad_buffer().values;
      for (std::size_t i = 0; i < G.size(); ++i) da[i] += G[i];
    }
    if (b->requires_grad) {
      auto& db = b->grad_buffer().values;
      for (std::size_t i = 0; i < G.size(); ++i) db[i] += sign * G[i];
    }
  });
}

}  // namespace

Var add(const Var& a, const Var& b) { return elementwise_binary(a, b, 1.0, "add"); }
Var sub(const Var& a, const Var& b) { return elementwise_binary(a, b, -1.0, "sub"); }

Var scale(const Var& x, double factor) {
  require(x, "scale");
  Tensor out = x->value;
  for (double& v : out.values) v *= factor;
  return make_node(std::move(out), {x}, [x, factor](Node& self) {
    auto& dx = x->grad_buffer().values;
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += factor * self.grad.values[i];
  });
}

Var sigmoid(const Var& x) {
  require(x, "sigmoid");
  Tensor out = x->value;
  for (double& v : out.values) v = 1.0 / (1.0 + std::exp(-v));
  auto node = make_node(std::move(out), {x}, [x](Node& self) {
    auto& dx = x->grad_buffer().values;
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const double s = self.value.values[i];
      dx[i] += self.grad.values[i] * s * (1.0 - s);
    }
  });
  return node;
}

Var square(const Var& x) {
  require(x, "square");
  Tensor out = x->value;
  for (double& v : out.values) v *= v;
  return make_node(std::move(out), {x}, [x](Node& self) {
    auto& dx = x->grad_buffer().values;
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += 2.0 * x->value.values[i] * self.grad.values[i];
  });
}

Var sum(const Var& x) {
  require(x, "sum");
  double s = 0.0;
  for (double v : x->value.values) s += v;
  return make_node(Tensor::scalar(s), {x}, [x](Node& self) {
    const double g = self.grad.values[0];
    for (double& d : x->grad_buffer().values) d += g;
  });
}

Var mean(const Var& x) {
  require(x, "mean");
  if (x->value.size() == 0) throw PreconditionError("mean of an empty tensor");
  const double inv = 1.0 / static_cast<double>(x->value.size());
  double s = 0.0;
  for (double v : x->value.values) s += v;
  return make_node(Tensor::scalar(s * inv), {x}, [x, inv](Node& self) {
    const double g = self.grad.values[0] * inv;
    for (double& d : x->grad_buffer().values) d += g;
  });
}

Var reshape(const Var& x, std::vector<std::size_t> shape) {
  require(x, "reshape");
  if (shape_size(shape) != x->value.size())
    throw DimensionError("reshape: " + shape_string(x->value.shape) + " -> " + shape_string(shape));
  Tensor out(std::move(shape), x->value.values);
  return make_node(std::move(out), {x}, [x](Node& self) {
    auto& dx = x->grad_buffer().values;
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += self.grad.values[i];
  });
}

Var group_mean(const Var& x, std::size_t group) {
  require_matrix(x, "group_mean");
  const std::size_t rows = x->value.shape[0], d = x->value.shape[1];
  if (group == 0 || rows % group != 0)
    throw DimensionError("group_mean: " + std::to_string(rows) + " rows not divisible by " + std::to_string(group));
  const std::size_t n = rows / group;
  const double inv = 1.0 / static_cast<double>(group);
  Tensor out({n, d});
  for (std::size_t g = 0; g < n; ++g)
    for (std::size_t r = 0; r < group; ++r)
      for (std::size_t c = 0; c < d; ++c) out.values[g * d + c] += inv * x->value.values[(g * group + r) * d + c];
  return make_node(std::move(out), {x}, [x, n, group, d, inv](Node& self) {
    auto& dx = x->grad_buffer().values;
    for (std::size_t g = 0; g < n; ++g)
      for (std::size_t r = 0; r < group; ++r)
        for (std::size_t c = 0; c < d; ++c) dx[(g * group + r) * d + c] += inv * self.grad.values[g * d + c];
  });
}

Var attention(const Var& q, const Var& k, const Var& v, std::size_t seq_len, std::size_t heads) {
  require_matrix(q, "attention");
  require_matrix(k, "attention");
  require_matrix(v, "attention");
  if (!q->value.same_shape(k->value) || !q->value.same_shape(v->value))
    throw DimensionError("attention: q/k/v shapes differ");
  const std::size_t rows = q->value.shape[0], d = q->value.shape[1];
  if (seq_len == 0 || rows % seq_len != 0) throw DimensionError("attention: rows not divisible by sequence length");
  if (heads == 0 || d % heads != 0) throw DimensionError("attention: width not divisible by head count");
  const std::size_t n = rows / seq_len, dh = d / heads, S = seq_len;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

  // probs[((seq * heads + h) * S + i) * S + j]
  auto probs = std::make_shared<std::vector<double>>(n * heads * S * S);
  Tensor out({rows, d});
  const double* Q = q->value.values.data();
  const double* K = k->value.values.data();
  const double* V = v->value.values.data();
  std::vector<double> logits(S);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = h * dh;
      for (std::size_t i = 0; i < S; ++i) {
        const double* qi = Q + (s * S + i) * d + off;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < S; ++j) {
          const double* kj = K + (s * S + j) * d + off;
          double dot = 0.0;
          for (std::size_t c = 0; c < dh; ++c) dot += qi[c] * kj[c];
          logits[j] = dot * inv_sqrt;
          mx = std::max(mx, logits[j]);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < S; ++j) {
          logits[j] = std::exp(logits[j] - mx);
          z += logits[j];
        }
        double* P = probs->data() + ((s * heads + h) * S + i) * S;
        double* oi = out.values.data() + (s * S + i) * d + off;
        for (std::size_t j = 0; j < S; ++j) {
          P[j] = logits[j] / z;
          const double* vj = V + (s * S + j) * d + off;
          for (std::size_t c = 0; c < dh; ++c) oi[c] += P[j] * vj[c];
        }
      }
    }
  }

  return make_node(std::move(out), {q, k, v}, [q, k, v, probs, n, heads, S, d, dh, inv_sqrt](Node& self) {
    const double* G = self.grad.values.data();
    const double* Q = q->value.values.data();
    const double* K = k->value.values.data();
    const double* V = v->value.values.data();
    double* dQ = q->requires_grad ? q->grad_buffer().values.data() : nullptr;
    double* dK = k->requires_grad ? k->grad_buffer().values.data() : nullptr;
    double* dV = v->requires_grad ? v->grad_buffer().values.data() : nullptr;
    std::vector<double> dP(S), dS(S);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t off = h * dh;
        for (std::size_t i = 0; i < S; ++i) {
          const double* P = probs->data() + ((s * heads + h) * S + i) * S;
          const double* gi = G + (s * S + i) * d + off;
          double weighted = 0.0;
          for (std::size_t j = 0; j < S; ++j) {
            const double* vj = V + (s * S + j) * d + off;
            double acc = 0.0;
            for (std::size_t c = 0; c < dh; ++c) acc += gi[c] * vj[c];
            dP[j] = acc;
            weighted += P[j] * acc;
            if (dV) {
              double* dvj = dV + (s * S + j) * d + off;
              for (std::size_t c = 0; c < dh; ++c) dvj[c] += P[j] * gi[c];
            }
          }
          for (std::size_t j = 0; j < S; ++j) dS[j] = P[j] * (dP[j] - weighted) * inv_sqrt;
          const double* qi = Q + (s * S + i) * d + off;
          for (std::size_t j = 0; j < S; ++j) {
            const double* kj = K + (s * S + j) * d + off;
            if (dQ) {
              double* dqi = dQ + (s * S + i) * d + off;
              for (std::size_t c = 0; c < dh; ++c) dqi[c] += dS[j] * kj[c];
            }
            if (dK) {
              double* dkj = dK + (s * S + j) * d + off;
              for (std::size_t c = 0; c < dh; ++c) dkj[c] += dS[j] * qi[c];
            }
          }
        }
      }
    }
  });
}

Var logsumexp_rows(const Var& x) {
  require_matrix(x, "logsumexp_rows");
  const std::size_t n = x->value.shape[0], m = x->value.shape[1];
  if (m == 0) throw DimensionError("logsumexp_rows: zero columns");
  Tensor out({n});
  auto soft = std::make_shared<std::vector<double>>(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x->value.values.data() + i * m;
    const double mx = *std::max_element(row, row + m);
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) z += std::exp(row[j] - mx);
    out.values[i] = mx + std::log(z);
    for (std::size_t j = 0; j < m; ++j) (*soft)[i * m + j] = std::exp(row[j] - out.values[i]);
  }
  return make_node(std::move(out), {x}, [x, soft, n, m](Node& self) {
    auto& dx = x->grad_buffer().values;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) dx[i * m + j] += self.grad.values[i] * (*soft)[i * m + j];
  });
}

Var gather_rows(const Var& x, const std::vector<int>& index) {
  require_matrix(x, "gather_rows");
  const std::size_t n = x->value.shape[0], m = x->value.shape[1];
  if (index.size() != n) throw DimensionError("gather_rows: index length does not match rows");
  Tensor out({n});
  for (std::size_t i = 0; i < n; ++i) {
    if (index[i] < 0 || static_cast<std::size_t>(index[i]) >= m) throw DimensionError("gather_rows: index out of range");
    out.values[i] = x->value.values[i * m + index[i]];
  }
  return make_node(std::move(out), {x}, [x, index, m](Node& self) {
    auto& dx = x->grad_buffer().values;
    for (std::size_t i = 0; i < index.size(); ++i) dx[i * m + index[i]] += self.grad.values[i];
  });
}

void backward(const Var& loss) {
  if (!loss) throw UsageError("backward: null loss");
  if (loss->released_) throw UsageError("backward: graph already consumed by a previous backward pass");
  if (!loss->requires_grad) throw UsageError("backward: no recorded forward graph reaches any parameter");
  if (loss->value.size() != 1) throw DimensionError("backward: loss must be a scalar");

  // Post-order DFS gives a topological order (parents before children).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.get(), 0}};
  seen.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents_.size()) {
      Node* p = node->parents_[next++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss->grad_buffer().values[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward_) node->backward_(*node);
  }
  for (Node* node : order) {
    if (node->is_leaf()) continue;
    node->parents_.clear();
    node->backward_ = nullptr;
    node->released_ = true;
  }
}

}  // namespace tsc::nn
