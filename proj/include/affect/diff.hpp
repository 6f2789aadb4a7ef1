#ifndef AFFECT_DIFF_HPP
#define AFFECT_DIFF_HPP

// Minimal reverse-mode differentiation over dense matrices.
//
// A Graph records nodes in creation order, so the node list is already a
// topological order and backward walks it in reverse, visiting every node
// once. Leaf gradients accumulate across backward calls until zero_grads();
// interior gradients are recomputed on every call. Parameters live outside
// the graph so that one set of weights can be bound into a fresh graph per
// batch; a parameter leaf writes its gradient straight into Parameter::grad.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "affect/error.hpp"
#include "affect/tensor.hpp"

namespace affect::diff {

struct Parameter {
  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}

  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad = Tensor(value.rows(), value.cols()); }
};

class Graph;

class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Tensor& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool requires_grad() const;
  Graph* graph() const { return graph_; }
  std::size_t id() const { return id_; }

 private:
  friend class Graph;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, std::size_t)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value) { return push(std::move(value), false, {}, nullptr); }
  Var leaf(Tensor value, bool requires_grad = true) { return push(std::move(value), requires_grad, {}, nullptr); }
  Var param(Parameter& p) {
    if (!p.grad.same_shape(p.value)) p.zero_grad();
    Var v = push(p.value, true, {}, nullptr);
    nodes_[v.id_].param = &p;
    return v;
  }

  // Records an op node. `backward` reads grad_of(self) and adds into the
  // parents' gradients via accumulate().
  Var op(Tensor value, std::vector<Var> parents, BackwardFn backward) {
    bool needs = false;
    std::vector<std::size_t> ids;
    ids.reserve(parents.size());
    for (const Var& p : parents) {
      if (p.graph_ != this) fail(ErrorKind::Argument, "operand belongs to a different graph");
      needs = needs || nodes_[p.id_].requires_grad;
      ids.push_back(p.id_);
    }
    return push(std::move(value), needs, std::move(ids), needs ? std::move(backward) : BackwardFn{});
  }

  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  const Tensor& grad(std::size_t id) { return grad_ref(id); }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  Tensor& grad_ref(std::size_t id) {
    Node& n = nodes_.at(id);
    if (n.param) return n.param->grad;
    if (!n.grad.same_shape(n.value)) n.grad = Tensor(n.value.rows(), n.value.cols());
    return n.grad;
  }

  void accumulate(std::size_t id, const Tensor& delta) {
    if (!nodes_[id].requires_grad) return;
    Tensor& g = grad_ref(id);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += delta[i];
  }

  std::span<const std::size_t> parents(std::size_t id) const { return nodes_.at(id).parents; }

  /// Adds d(root)/d(leaf) into every requires_grad leaf. Calling it twice
  /// without zero_grads() accumulates twice.
  void backward(Var root) {
    if (root.graph_ != this) fail(ErrorKind::Argument, "root belongs to a different graph");
    if (!nodes_[root.id_].value.is_scalar()) {
      fail(ErrorKind::Rank, "backward needs a scalar root, got " + nodes_[root.id_].value.shape());
    }
    if (!nodes_[root.id_].requires_grad) return;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].backward) nodes_[i].grad = Tensor(nodes_[i].value.rows(), nodes_[i].value.cols());
    }
    grad_ref(root.id_)[0] += 1.0;
    for (std::size_t i = root.id_ + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.backward) n.backward(*this, i);
    }
  }

  void zero_grads() {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      Node& n = nodes_[i];
      if (n.param) n.param->zero_grad();
      else n.grad = Tensor(n.value.rows(), n.value.cols());
    }
  }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    Parameter* param = nullptr;
  };

  Var push(Tensor value, bool requires_grad, std::vector<std::size_t> parents, BackwardFn backward) {
    nodes_.push_back(Node{std::move(value), Tensor(), requires_grad, std::move(parents), std::move(backward), nullptr});
    return Var(this, nodes_.size() - 1);
  }

  std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return graph_->value(id_); }
inline const Tensor& Var::grad() const { return graph_->grad(id_); }
inline bool Var::requires_grad() const { return graph_->requires_grad(id_); }

// ---------------------------------------------------------------------------
// Ops

namespace detail {

inline Graph& graph_of(const Var& a, const Var& b) {
  if (a.graph() != b.graph() || a.graph() == nullptr) fail(ErrorKind::Argument, "operands from different graphs");
  return *a.graph();
}

template <class F>
Tensor map(const Tensor& x, F f) {
  Tensor out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return out;
}

enum class Broadcast { None, Left, Right };

inline Broadcast broadcast_mode(const Tensor& a, const Tensor& b, const char* op) {
  if (a.same_shape(b)) return Broadcast::None;
  if (a.is_scalar()) return Broadcast::Left;
  if (b.is_scalar()) return Broadcast::Right;
  fail(ErrorKind::Shape, std::string(op) + ": shape mismatch " + a.shape() + " vs " + b.shape());
}

// Elementwise binary op where either operand may be 1x1. `df` returns the
// pair (d/da, d/db) of f at (a, b).
template <class F, class DF>
Var binary(const Var& a, const Var& b, const char* name, F f, DF df) {
  Graph& g = graph_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const Broadcast mode = broadcast_mode(av, bv, name);
  const std::size_t rows = mode == Broadcast::Left ? bv.rows() : av.rows();
  const std::size_t cols = mode == Broadcast::Left ? bv.cols() : av.cols();
  auto at = [mode](const Tensor& t, std::size_t i, bool left) {
    if ((mode == Broadcast::Left && left) || (mode == Broadcast::Right && !left)) return t[0];
    return t[i];
  };
  Tensor out(rows, cols);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(at(av, i, true), at(bv, i, false));
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return g.op(std::move(out), {a, b}, [ia, ib, mode, at, df](Graph& gr, std::size_t self) {
    const Tensor& go = gr.grad_ref(self);
    const Tensor& x = gr.value(ia);
    const Tensor& y = gr.value(ib);
    Tensor ga(x.rows(), x.cols());
    Tensor gb(y.rows(), y.cols());
    for (std::size_t i = 0; i < go.size(); ++i) {
      const auto [da, db] = df(at(x, i, true), at(y, i, false));
      ga[mode == Broadcast::Left ? 0 : i] += go[i] * da;
      gb[mode == Broadcast::Right ? 0 : i] += go[i] * db;
    }
    gr.accumulate(ia, ga);
    gr.accumulate(ib, gb);
  });
}

template <class F, class DF>
Var unary(const Var& x, F f, DF df) {
  Graph& g = *x.graph();
  const std::size_t ix = x.id();
  Tensor out = map(x.value(), f);
  return g.op(std::move(out), {x}, [ix, df](Graph& gr, std::size_t self) {
    const Tensor& go = gr.grad_ref(self);
    const Tensor& xv = gr.value(ix);
    const Tensor& yv = gr.value(self);
    Tensor gx(xv.rows(), xv.cols());
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = go[i] * df(xv[i], yv[i]);
    gr.accumulate(ix, gx);
  });
}

}  // namespace detail

inline Var add(const Var& a, const Var& b) {
  return detail::binary(a, b, "add", [](double x, double y) { return x + y; },
                        [](double, double) { return std::pair{1.0, 1.0}; });
}

inline Var sub(const Var& a, const Var& b) {
  return detail::binary(a, b, "sub", [](double x, double y) { return x - y; },
                        [](double, double) { return std::pair{1.0, -1.0}; });
}

inline Var mul(const Var& a, const Var& b) {
  return detail::binary(a, b, "mul", [](double x, double y) { return x * y; },
                        [](double x, double y) { return std::pair{y, x}; });
}

inline Var div(const Var& a, const Var& b) {
  return detail::binary(a, b, "div", [](double x, double y) { return x / y; },
                        [](double x, double y) { return std::pair{1.0 / y, -x / (y * y)}; });
}

inline Var scale(const Var& x, double c) {
  return detail::unary(x, [c](double v) { return c * v; }, [c](double, double) { return c; });
}

inline Var shift(const Var& x, double c) {
  return detail::unary(x, [c](double v) { return v + c; }, [](double, double) { return 1.0; });
}

inline Var relu(const Var& x) {
  return detail::unary(x, [](double v) { return v > 0.0 ? v : 0.0; },
                       [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

/// tanh kept strictly inside (-1, 1): saturated values are pulled back to
/// the nearest representable interior point.
inline Var tanh(const Var& x) {
  static constexpr double kEdge = 1.0 - 0x1p-53;
  return detail::unary(
      x, [](double v) { return std::clamp(std::tanh(v), -kEdge, kEdge); },
      [](double, double y) { return 1.0 - y * y; });
}

inline Var sigmoid(const Var& x) {
  return detail::unary(
      x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

inline Var sum(const Var& x) {
  Graph& g = *x.graph();
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  const std::size_t ix = x.id();
  return g.op(Tensor::scalar(s), {x}, [ix](Graph& gr, std::size_t self) {
    const double go = gr.grad_ref(self)[0];
    const Tensor& xv = gr.value(ix);
    gr.accumulate(ix, Tensor(xv.rows(), xv.cols(), go));
  });
}

inline Var mean(const Var& x) {
  if (x.value().empty()) fail(ErrorKind::Shape, "mean of empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.value().size()));
}

/// Column j of x as an N×1 node.
inline Var column(const Var& x, std::size_t j) {
  const Tensor& xv = x.value();
  if (j >= xv.cols()) fail(ErrorKind::Shape, "column " + std::to_string(j) + " out of " + xv.shape());
  Tensor out(xv.rows(), 1);
  for (std::size_t r = 0; r < xv.rows(); ++r) out(r, 0) = xv(r, j);
  const std::size_t ix = x.id();
  return x.graph()->op(std::move(out), {x}, [ix, j](Graph& gr, std::size_t self) {
    const Tensor& go = gr.grad_ref(self);
    const Tensor& xv2 = gr.value(ix);
    Tensor gx(xv2.rows(), xv2.cols());
    for (std::size_t r = 0; r < xv2.rows(); ++r) gx(r, j) = go(r, 0);
    gr.accumulate(ix, gx);
  });
}

/// x (N×in) · W (in×out) + b (1×out).
inline Var affine(const Var& x, const Var& w, const Var& b) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  const Tensor& bv = b.value();
  if (xv.cols() != wv.rows()) fail(ErrorKind::Shape, "affine: input " + xv.shape() + " vs weight " + wv.shape());
  if (bv.rows() != 1 || bv.cols() != wv.cols()) {
    fail(ErrorKind::Shape, "affine: bias " + bv.shape() + " vs weight " + wv.shape());
  }
  Graph& g = detail::graph_of(x, w);
  detail::graph_of(x, b);
  const std::size_t n = xv.rows();
  const std::size_t in = wv.rows();
  const std::size_t out_dim = wv.cols();
  Tensor out(n, out_dim);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t o = 0; o < out_dim; ++o) out(r, o) = bv(0, o);
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = xv(r, i);
      if (xi == 0.0) continue;
      for (std::size_t o = 0; o < out_dim; ++o) out(r, o) += xi * wv(i, o);
    }
  }
  const std::size_t ix = x.id(), iw = w.id(), ib = b.id();
  return g.op(std::move(out), {x, w, b}, [ix, iw, ib](Graph& gr, std::size_t self) {
    const Tensor& go = gr.grad_ref(self);
    const Tensor& xv2 = gr.value(ix);
    const Tensor& wv2 = gr.value(iw);
    const std::size_t n2 = xv2.rows(), in2 = wv2.rows(), out2 = wv2.cols();
    if (gr.requires_grad(ix)) {
      Tensor gx(n2, in2);
      for (std::size_t r = 0; r < n2; ++r)
        for (std::size_t i = 0; i < in2; ++i) {
          double s = 0.0;
          for (std::size_t o = 0; o < out2; ++o) s += go(r, o) * wv2(i, o);
          gx(r, i) = s;
        }
      gr.accumulate(ix, gx);
    }
    if (gr.requires_grad(iw)) {
      Tensor gw(in2, out2);
      for (std::size_t r = 0; r < n2; ++r)
        for (std::size_t i = 0; i < in2; ++i) {
          const double xi = xv2(r, i);
          if (xi == 0.0) continue;
          for (std::size_t o = 0; o < out2; ++o) gw(i, o) += xi * go(r, o);
        }
      gr.accumulate(iw, gw);
    }
    if (gr.requires_grad(ib)) {
      Tensor gb(1, out2);
      for (std::size_t r = 0; r < n2; ++r)
        for (std::size_t o = 0; o < out2; ++o) gb(0, o) += go(r, o);
      gr.accumulate(ib, gb);
    }
  });
}

/// Weighted softmax cross-entropy, reduced by the weighted mean
/// sum_i w_{y_i} CE_i / sum_i w_{y_i}. Stable for large logit magnitudes.
inline Var softmax_ce(const Var& logits, std::span<const std::size_t> targets, std::span<const double> weights) {
  const Tensor& z = logits.value();
  const std::size_t n = z.rows(), k = z.cols();
  if (targets.size() != n) fail(ErrorKind::Shape, "softmax_ce: targets length vs logits " + z.shape());
  if (weights.size() != k) fail(ErrorKind::Shape, "softmax_ce: weights length vs logits " + z.shape());
  if (n == 0) fail(ErrorKind::Shape, "softmax_ce: empty batch");
  double wsum = 0.0;
  for (std::size_t t : targets) {
    if (t >= k) fail(ErrorKind::Label, "softmax_ce: target " + std::to_string(t) + " >= " + std::to_string(k));
    wsum += weights[t];
  }
  if (!(wsum > 0.0)) fail(ErrorKind::Numeric, "softmax_ce: participating weights sum to zero");
  for (double v : z.values()) {
    if (!std::isfinite(v)) fail(ErrorKind::Numeric, "softmax_ce: non-finite logit");
  }
  // Per-sample gradient of the reduced loss, computed once in the forward.
  Tensor dz(n, k);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = z.row_span(i);
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    const double lse = mx + std::log(s);
    const double w = weights[targets[i]] / wsum;
    loss += w * (lse - row[targets[i]]);
    for (std::size_t j = 0; j < k; ++j) dz(i, j) = w * (std::exp(row[j] - lse) - (j == targets[i] ? 1.0 : 0.0));
  }
  const std::size_t iz = logits.id();
  return logits.graph()->op(Tensor::scalar(loss), {logits}, [iz, dz = std::move(dz)](Graph& gr, std::size_t self) {
    const double go = gr.grad_ref(self)[0];
    Tensor g = dz;
    for (double& v : g.values()) v *= go;
    gr.accumulate(iz, g);
  });
}

/// Positive-weighted binary cross-entropy on logits, mean over all entries.
inline Var bce_with_logits(const Var& logits, const Tensor& targets, std::span<const double> pos_weights) {
  const Tensor& z = logits.value();
  require_same_shape(z, targets, "bce_with_logits");
  if (pos_weights.size() != z.cols()) fail(ErrorKind::Shape, "bce_with_logits: pos_weights length");
  if (z.empty()) fail(ErrorKind::Shape, "bce_with_logits: empty input");
  const double count = static_cast<double>(z.size());
  Tensor dz(z.rows(), z.cols());
  double loss = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    for (std::size_t k = 0; k < z.cols(); ++k) {
      const double t = targets(i, k);
      if (t != 0.0 && t != 1.0) fail(ErrorKind::Label, "bce_with_logits: targets must be 0 or 1");
      const double v = z(i, k);
      if (!std::isfinite(v)) fail(ErrorKind::Numeric, "bce_with_logits: non-finite logit");
      const double coef = pos_weights[k] * t + 1.0 - t;
      const double sp = std::max(-v, 0.0) + std::log1p(std::exp(-std::abs(v)));
      const double sig_neg = v >= 0 ? std::exp(-v) / (1.0 + std::exp(-v)) : 1.0 / (1.0 + std::exp(v));
      loss += (1.0 - t) * v + coef * sp;
      dz(i, k) = ((1.0 - t) - coef * sig_neg) / count;
    }
  }
  const std::size_t iz = logits.id();
  return logits.graph()->op(Tensor::scalar(loss / count), {logits},
                            [iz, dz = std::move(dz)](Graph& gr, std::size_t self) {
                              const double go = gr.grad_ref(self)[0];
                              Tensor g = dz;
                              for (double& v : g.values()) v *= go;
                              gr.accumulate(iz, g);
                            });
}

// ---------------------------------------------------------------------------
// Optimizer and schedule

struct AdamWConfig {
  double lr = 5e-5;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  AdamWConfig config;
  std::int64_t step = 0;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
};

/// One AdamW update over `params` using their accumulated gradients:
///   w <- (1 - lr*wd) w, then the bias-corrected Adam step.
inline void adamw_step(std::span<Parameter* const> params, OptimizerState& state) {
  for (const Parameter* p : params) {
    for (double g : p->grad.values()) {
      if (!std::isfinite(g)) fail(ErrorKind::Numeric, "non-finite gradient in parameter '" + p->name + "'");
    }
    if (!p->grad.same_shape(p->value)) fail(ErrorKind::Shape, "gradient shape mismatch in '" + p->name + "'");
  }
  if (state.first_moment.empty()) {
    for (const Parameter* p : params) {
      state.first_moment.emplace_back(p->value.rows(), p->value.cols());
      state.second_moment.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  if (state.first_moment.size() != params.size()) fail(ErrorKind::Shape, "optimizer state does not match parameters");

  const AdamWConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  const double decay = 1.0 - c.lr * c.weight_decay;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    Tensor& m = state.first_moment[pi];
    Tensor& v = state.second_moment[pi];
    if (!m.same_shape(p.value)) fail(ErrorKind::Shape, "moment shape mismatch in '" + p.name + "'");
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      p.value[i] *= decay;
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p.value[i] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

/// Cosine annealing from lr_max at step 0 to lr_min at total_steps.
inline double cosine_lr(std::int64_t step, std::int64_t total_steps, double lr_max, double lr_min) {
  if (step < 0 || step > total_steps) {
    fail(ErrorKind::Schedule, "step " + std::to_string(step) + " outside [0, " + std::to_string(total_steps) + "]");
  }
  if (total_steps == 0) return lr_max;
  const double phase = std::numbers::pi * static_cast<double>(step) / static_cast<double>(total_steps);
  return lr_min + (lr_max - lr_min) * (1.0 + std::cos(phase)) / 2.0;
}

}  // namespace affect::diff

#endif  // AFFECT_DIFF_HPP
