#ifndef AFFECT_GRAPH_LOSSES_HPP
#define AFFECT_GRAPH_LOSSES_HPP

// The training losses expressed with diff ops. Values and gradients must agree
// with the closed forms in losses.hpp.

#include <cstddef>
#include <span>

#include "affect/diff.hpp"
#include "affect/losses.hpp"

namespace affect::graph_loss {

using diff::Var;

inline Var mse(const Var& pred, const Var& target) {
  Var d = diff::sub(pred, target);
  return diff::mean(diff::mul(d, d));
}

/// Concordance of two N×1 columns with population moments.
inline Var ccc(const Var& x, const Var& y) {
  Var mx = diff::mean(x);
  Var my = diff::mean(y);
  Var dx = diff::sub(x, mx);
  Var dy = diff::sub(y, my);
  Var var_x = diff::mean(diff::mul(dx, dx));
  Var var_y = diff::mean(diff::mul(dy, dy));
  Var cov = diff::mean(diff::mul(dx, dy));
  Var shift = diff::sub(mx, my);
  Var den = diff::add(diff::add(var_x, var_y), diff::mul(shift, shift));
  if (den.value().item() < kCccDegenerateTol) {
    // Reuse the closed form's degenerate-input rule (equal inputs -> 1).
    const auto xs = x.value().values();
    const auto ys = y.value().values();
    affect::ccc(xs, ys);
    return x.graph()->constant(Tensor::scalar(1.0));
  }
  return diff::scale(diff::div(cov, den), 2.0);
}

/// 1 - mean per-column CCC.
inline Var ccc_term(const Var& pred, const Var& target) {
  if (!pred.value().same_shape(target.value())) fail(ErrorKind::Shape, "ccc_term: shape mismatch");
  if (pred.rows() < 2) fail(ErrorKind::Shape, "ccc_term: needs at least 2 rows");
  const std::size_t d = pred.cols();
  Var total = ccc(diff::column(pred, 0), diff::column(target, 0));
  for (std::size_t c = 1; c < d; ++c) total = diff::add(total, ccc(diff::column(pred, c), diff::column(target, c)));
  return diff::shift(diff::scale(total, -1.0 / static_cast<double>(d)), 1.0);
}

inline Var valence_arousal(const Var& pred, const Var& target, double beta) {
  return diff::add(ccc_term(pred, target), diff::scale(mse(pred, target), beta));
}

struct HeadsLoss {
  Var total;
  Var classification;
  Var regression;
};

inline HeadsLoss combined(const Var& logits, std::span<const std::size_t> targets, std::span<const double> weights,
                          const Var& pred, const Var& target, double alpha) {
  Var ce = diff::softmax_ce(logits, targets, weights);
  Var m = mse(pred, target);
  return {diff::add(ce, diff::scale(m, alpha)), ce, m};
}

inline HeadsLoss bce_combined(const Var& logits, const Tensor& multi_targets, std::span<const double> pos_weights,
                              const Var& pred, const Var& target, double alpha) {
  Var bce = diff::bce_with_logits(logits, multi_targets, pos_weights);
  Var m = mse(pred, target);
  return {diff::add(bce, diff::scale(m, alpha)), bce, m};
}

}  // namespace affect::graph_loss

#endif  // AFFECT_GRAPH_LOSSES_HPP
