#ifndef AFFECT_LOSSES_HPP
#define AFFECT_LOSSES_HPP

// Closed-form losses with hand-derived gradients. The graph-built versions
// used for training live in graph_losses.hpp; the two are checked against
// each other and against finite differences.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "affect/error.hpp"
#include "affect/label_space.hpp"
#include "affect/tensor.hpp"

namespace affect {

struct LossConfig {
  double alpha = 5.0;
  double beta = 3.0;
  std::optional<ClassWeights> class_weights;
  std::optional<std::vector<double>> pos_weights;
};

struct LossResult {
  double value = 0.0;
  Tensor grad;
};

// Loss over a classification head and a regression head.
struct HeadsLossResult {
  double value = 0.0;
  double classification = 0.0;
  double regression = 0.0;
  Tensor grad_logits;
  Tensor grad_continuous;
};

namespace detail {

inline void require_finite(const Tensor& t, const char* what) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) fail(ErrorKind::Numeric, std::string(what) + " contains a non-finite value");
  }
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double mean(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace detail

/// Weighted cross-entropy with weighted-mean batch reduction:
///   L = sum_i w_{y_i} * (-log softmax(z_i)_{y_i}) / sum_i w_{y_i}
inline LossResult weighted_cross_entropy(const Tensor& logits, std::span<const std::size_t> targets,
                                         std::span<const double> weights) {
  const std::size_t n = logits.rows();
  const std::size_t k = logits.cols();
  if (targets.size() != n) fail(ErrorKind::Shape, "targets length does not match logits rows");
  if (weights.size() != k) fail(ErrorKind::Shape, "class weight count does not match logits columns");
  if (n == 0) fail(ErrorKind::Shape, "empty batch");
  detail::require_finite(logits, "logits");

  LossResult r{0.0, Tensor(n, k)};
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] >= k) fail(ErrorKind::Label, "target " + std::to_string(targets[i]) + " >= " + std::to_string(k));
    weight_sum += weights[targets[i]];
  }
  if (!(weight_sum > 0.0)) fail(ErrorKind::Numeric, "participating class weights sum to zero");

  for (std::size_t i = 0; i < n; ++i) {
    auto row = logits.row_span(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double v : row) z += std::exp(v - mx);
    const double log_z = mx + std::log(z);
    const double w = weights[targets[i]] / weight_sum;
    r.value += w * (log_z - row[targets[i]]);
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(row[j] - log_z);
      r.grad(i, j) = w * (p - (j == targets[i] ? 1.0 : 0.0));
    }
  }
  return r;
}

inline LossResult weighted_cross_entropy(const Tensor& logits, std::span<const std::size_t> targets,
                                         const ClassWeights& weights) {
  return weighted_cross_entropy(logits, targets, weights.weights);
}

/// Mean squared error over all N*D entries.
inline LossResult mse_va(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "mse_va");
  if (pred.empty()) fail(ErrorKind::Shape, "mse_va: empty input");
  const double count = static_cast<double>(pred.size());
  LossResult r{0.0, Tensor(pred.rows(), pred.cols())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    r.value += d * d;
    r.grad[i] = 2.0 * d / count;
  }
  r.value /= count;
  return r;
}

inline std::vector<double> uniform_weights(std::size_t k) {
  return std::vector<double>(k, 1.0 / static_cast<double>(k));
}

/// L = weighted CE + alpha * MSE.
inline HeadsLossResult combined_loss(const Tensor& logits, std::span<const std::size_t> targets,
                                     const Tensor& pred_va, const Tensor& target_va,
                                     const LossConfig& config) {
  if (logits.empty() || pred_va.empty()) {
    fail(ErrorKind::Config, "combined loss needs both classification and regression outputs");
  }
  const std::vector<double> weights =
      config.class_weights ? config.class_weights->weights : uniform_weights(logits.cols());
  LossResult ce = weighted_cross_entropy(logits, targets, weights);
  LossResult mse = mse_va(pred_va, target_va);
  HeadsLossResult r;
  r.classification = ce.value;
  r.regression = mse.value;
  r.value = ce.value + config.alpha * mse.value;
  r.grad_logits = std::move(ce.grad);
  r.grad_continuous = std::move(mse.grad);
  for (double& g : r.grad_continuous.values()) g *= config.alpha;
  return r;
}

struct CccMoments {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  double cov = 0.0;
  double denominator() const {
    const double d = mean_x - mean_y;
    return var_x + var_y + d * d;
  }
};

inline CccMoments ccc_moments(std::span<const double> x, std::span<const double> y) {
  CccMoments m;
  const double n = static_cast<double>(x.size());
  // A constant series gets its exact value as mean, so its deviations (and
  // the covariance) are exactly zero rather than rounding noise.
  auto exact_mean = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); }) ? v.front() : detail::mean(v);
  };
  m.mean_x = exact_mean(x);
  m.mean_y = exact_mean(y);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - m.mean_x;
    const double dy = y[i] - m.mean_y;
    m.var_x += dx * dx;
    m.var_y += dy * dy;
    m.cov += dx * dy;
  }
  m.var_x /= n;
  m.var_y /= n;
  m.cov /= n;
  return m;
}

inline constexpr double kCccDegenerateTol = 1e-12;

namespace detail {

// Returns true when the CCC denominator is degenerate and the inputs agree,
// throws when degenerate and they disagree, false otherwise.
inline bool ccc_degenerate_equal(std::span<const double> x, std::span<const double> y, const CccMoments& m) {
  if (m.denominator() >= kCccDegenerateTol) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i] - y[i]) > kCccDegenerateTol) {
      fail(ErrorKind::Numeric, "degenerate CCC input: constant series that disagree");
    }
  }
  return true;
}

inline void check_ccc_input(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::Shape, "ccc: length mismatch");
  if (x.size() < 2) fail(ErrorKind::Shape, "ccc: needs at least 2 values");
}

}  // namespace detail

/// Lin's concordance correlation coefficient with population moments.
inline double ccc(std::span<const double> x, std::span<const double> y) {
  detail::check_ccc_input(x, y);
  const CccMoments m = ccc_moments(x, y);
  if (detail::ccc_degenerate_equal(x, y, m)) return 1.0;
  return 2.0 * m.cov / m.denominator();
}

/// d ccc(x, y) / d x.
inline std::vector<double> ccc_grad_x(std::span<const double> x, std::span<const double> y) {
  detail::check_ccc_input(x, y);
  const CccMoments m = ccc_moments(x, y);
  const double n = static_cast<double>(x.size());
  std::vector<double> g(x.size(), 0.0);
  if (detail::ccc_degenerate_equal(x, y, m)) return g;
  const double den = m.denominator();
  const double shift = m.mean_x - m.mean_y;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d_cov = (y[i] - m.mean_y) / n;
    const double d_den = 2.0 * (x[i] - m.mean_x) / n + 2.0 * shift / n;
    g[i] = (2.0 * d_cov * den - 2.0 * m.cov * d_den) / (den * den);
  }
  return g;
}

/// Valence-arousal loss: (1 - mean per-dimension CCC) + beta * MSE. With
/// beta = 0 this is the bare CCC term. The gradient is w.r.t. `pred`.
inline LossResult ccc_loss(const Tensor& pred, const Tensor& target, double beta) {
  require_same_shape(pred, target, "ccc_loss");
  if (pred.rows() < 2) fail(ErrorKind::Shape, "ccc_loss: needs at least 2 rows");
  const std::size_t n = pred.rows();
  const std::size_t d = pred.cols();
  LossResult r{1.0, Tensor(n, d)};
  for (std::size_t c = 0; c < d; ++c) {
    const auto x = pred.column_values(c);
    const auto y = target.column_values(c);
    r.value -= ccc(x, y) / static_cast<double>(d);
    const auto g = ccc_grad_x(x, y);
    for (std::size_t i = 0; i < n; ++i) r.grad(i, c) = -g[i] / static_cast<double>(d);
  }
  if (beta != 0.0) {
    LossResult mse = mse_va(pred, target);
    r.value += beta * mse.value;
    for (std::size_t i = 0; i < r.grad.size(); ++i) r.grad[i] += beta * mse.grad[i];
  }
  return r;
}

/// Positive-weighted binary cross-entropy on logits, mean over N*K:
///   -[p_k t log s(z) + (1 - t) log(1 - s(z))]
/// evaluated as (1 - t) z + (p_k t + 1 - t) softplus(-z).
inline LossResult weighted_bce(const Tensor& logits, const Tensor& targets, std::span<const double> pos_weights) {
  require_same_shape(logits, targets, "weighted_bce");
  if (pos_weights.size() != logits.cols()) fail(ErrorKind::Shape, "pos_weights length does not match classes");
  if (logits.empty()) fail(ErrorKind::Shape, "weighted_bce: empty input");
  detail::require_finite(logits, "logits");
  const double count = static_cast<double>(logits.size());
  LossResult r{0.0, Tensor(logits.rows(), logits.cols())};
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    for (std::size_t k = 0; k < logits.cols(); ++k) {
      const double t = targets(i, k);
      if (t != 0.0 && t != 1.0) fail(ErrorKind::Label, "multi-label targets must be 0 or 1");
      const double z = logits(i, k);
      const double coef = pos_weights[k] * t + 1.0 - t;
      r.value += (1.0 - t) * z + coef * detail::softplus(-z);
      r.grad(i, k) = ((1.0 - t) - coef * detail::sigmoid(-z)) / count;
    }
  }
  r.value /= count;
  return r;
}

/// Multi-label variant of the combined loss: weighted BCE + alpha * MSE.
inline HeadsLossResult weighted_bce_combined(const Tensor& logits, const Tensor& multi_targets,
                                             const Tensor& pred_vad, const Tensor& target_vad,
                                             const LossConfig& config) {
  if (!config.pos_weights) fail(ErrorKind::Config, "weighted BCE needs positive weights");
  if (logits.empty() || pred_vad.empty()) {
    fail(ErrorKind::Config, "combined loss needs both classification and regression outputs");
  }
  LossResult bce = weighted_bce(logits, multi_targets, *config.pos_weights);
  LossResult mse = mse_va(pred_vad, target_vad);
  HeadsLossResult r;
  r.classification = bce.value;
  r.regression = mse.value;
  r.value = bce.value + config.alpha * mse.value;
  r.grad_logits = std::move(bce.grad);
  r.grad_continuous = std::move(mse.grad);
  for (double& g : r.grad_continuous.values()) g *= config.alpha;
  return r;
}

}  // namespace affect

#endif  // AFFECT_LOSSES_HPP
