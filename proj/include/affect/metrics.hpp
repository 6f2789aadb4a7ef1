#ifndef AFFECT_METRICS_HPP
#define AFFECT_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "affect/error.hpp"
#include "affect/losses.hpp"
#include "affect/tensor.hpp"

namespace affect {

class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t k) : k_(k), counts_(k * k, 0) {}

  std::size_t num_classes() const noexcept { return k_; }
  std::int64_t& at(std::size_t truth, std::size_t pred) { return counts_[truth * k_ + pred]; }
  std::int64_t at(std::size_t truth, std::size_t pred) const { return counts_[truth * k_ + pred]; }

  std::int64_t row_sum(std::size_t truth) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < k_; ++j) s += at(truth, j);
    return s;
  }
  std::int64_t col_sum(std::size_t pred) const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < k_; ++i) s += at(i, pred);
    return s;
  }
  std::int64_t trace() const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < k_; ++i) s += at(i, i);
    return s;
  }
  std::int64_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0}); }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<std::int64_t> counts_;
};

/// Entry (i, j) counts samples of true class i predicted as j.
inline ConfusionMatrix confusion_matrix(std::span<const std::size_t> pred, std::span<const std::size_t> truth,
                                        std::size_t k) {
  if (pred.size() != truth.size()) fail(ErrorKind::Shape, "confusion_matrix: length mismatch");
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] >= k || truth[i] >= k) {
      fail(ErrorKind::Label, "confusion_matrix: index out of range at sample " + std::to_string(i));
    }
    ++cm.at(truth[i], pred[i]);
  }
  return cm;
}

struct ClassPrf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct PrfSummary {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct PrfReport {
  PrfSummary macro;
  PrfSummary micro;
  std::vector<ClassPrf> per_class;
};

namespace detail {

inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

inline ClassPrf prf_from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  ClassPrf c;
  c.precision = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
  c.recall = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
  c.f1 = safe_ratio(2.0 * c.precision * c.recall, c.precision + c.recall);
  c.support = tp + fn;
  return c;
}

inline PrfReport summarize(std::vector<ClassPrf> per_class, std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  PrfReport r;
  for (const auto& c : per_class) {
    r.macro.precision += c.precision;
    r.macro.recall += c.recall;
    r.macro.f1 += c.f1;
  }
  const double k = per_class.empty() ? 1.0 : static_cast<double>(per_class.size());
  r.macro.precision /= k;
  r.macro.recall /= k;
  r.macro.f1 /= k;
  const ClassPrf micro = prf_from_counts(tp, fp, fn);
  r.micro = {micro.precision, micro.recall, micro.f1};
  r.per_class = std::move(per_class);
  return r;
}

}  // namespace detail

/// Per-class and macro precision/recall/F1 from a confusion matrix; 0/0 := 0.
inline PrfReport prf1_macro(const ConfusionMatrix& cm) {
  std::vector<ClassPrf> per_class;
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < cm.num_classes(); ++i) {
    const std::int64_t d = cm.at(i, i);
    const std::int64_t cfp = cm.col_sum(i) - d;
    const std::int64_t cfn = cm.row_sum(i) - d;
    per_class.push_back(detail::prf_from_counts(d, cfp, cfn));
    tp += d;
    fp += cfp;
    fn += cfn;
  }
  return detail::summarize(std::move(per_class), tp, fp, fn);
}

/// Per-class binary P/R/F1 for multi-label predictions (one row per sample,
/// entries 0/1).
inline PrfReport prf1_multilabel(const Tensor& predicted, const Tensor& truth) {
  require_same_shape(predicted, truth, "prf1_multilabel");
  std::vector<ClassPrf> per_class;
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t k = 0; k < truth.cols(); ++k) {
    std::int64_t ctp = 0, cfp = 0, cfn = 0;
    for (std::size_t i = 0; i < truth.rows(); ++i) {
      const bool p = predicted(i, k) != 0.0;
      const bool t = truth(i, k) != 0.0;
      ctp += p && t;
      cfp += p && !t;
      cfn += !p && t;
    }
    per_class.push_back(detail::prf_from_counts(ctp, cfp, cfn));
    tp += ctp;
    fp += cfp;
    fn += cfn;
  }
  return detail::summarize(std::move(per_class), tp, fp, fn);
}

struct ErrorStats {
  double mse = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
};

struct RegressionErrors {
  std::vector<ErrorStats> per_dim;
  ErrorStats pooled;
};

inline RegressionErrors regression_errors(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "regression_errors");
  if (pred.empty()) fail(ErrorKind::Shape, "regression_errors: empty input");
  RegressionErrors r;
  r.per_dim.resize(pred.cols());
  for (std::size_t i = 0; i < pred.rows(); ++i) {
    for (std::size_t d = 0; d < pred.cols(); ++d) {
      const double e = pred(i, d) - target(i, d);
      r.per_dim[d].mse += e * e;
      r.per_dim[d].mae += std::abs(e);
      r.pooled.mse += e * e;
      r.pooled.mae += std::abs(e);
    }
  }
  const double n = static_cast<double>(pred.rows());
  for (auto& s : r.per_dim) {
    s.mse /= n;
    s.mae /= n;
    s.rmse = std::sqrt(s.mse);
  }
  r.pooled.mse /= static_cast<double>(pred.size());
  r.pooled.mae /= static_cast<double>(pred.size());
  r.pooled.rmse = std::sqrt(r.pooled.mse);
  return r;
}

/// Indices of the k highest scores; equal scores rank the lower index first.
inline std::vector<std::size_t> top_k_indices(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });
  idx.resize(k);
  return idx;
}

/// Fraction of samples whose top-k classes hit at least one true label.
inline double topk_accuracy(const Tensor& scores, std::span<const std::vector<std::size_t>> true_sets, std::size_t k) {
  if (true_sets.size() != scores.rows()) fail(ErrorKind::Shape, "topk_accuracy: label sets vs score rows");
  if (k < 1 || k > scores.cols()) fail(ErrorKind::Argument, "topk_accuracy: k must be in [1, K]");
  if (scores.rows() == 0) fail(ErrorKind::Argument, "topk_accuracy: empty batch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    if (true_sets[i].empty()) fail(ErrorKind::Label, "topk_accuracy: empty true set at sample " + std::to_string(i));
    const auto top = top_k_indices(scores.row_span(i), k);
    const bool hit = std::any_of(top.begin(), top.end(), [&](std::size_t c) {
      return std::find(true_sets[i].begin(), true_sets[i].end(), c) != true_sets[i].end();
    });
    hits += hit;
  }
  return static_cast<double>(hits) / static_cast<double>(scores.rows());
}

struct CdfPoint {
  double threshold = 0.0;
  double fraction = 0.0;
};

/// For each threshold t, the fraction of samples with |pred - target| <= t.
inline std::vector<CdfPoint> abs_error_cdf(std::span<const double> pred, std::span<const double> target,
                                           std::span<const double> grid) {
  if (grid.empty()) fail(ErrorKind::Argument, "abs_error_cdf: empty grid");
  if (pred.size() != target.size()) fail(ErrorKind::Shape, "abs_error_cdf: length mismatch");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) fail(ErrorKind::Argument, "abs_error_cdf: grid must be strictly increasing");
  }
  std::vector<double> errors(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) errors[i] = std::abs(pred[i] - target[i]);
  std::sort(errors.begin(), errors.end());
  std::vector<CdfPoint> out;
  out.reserve(grid.size());
  const double n = static_cast<double>(errors.size());
  for (double t : grid) {
    const auto count = std::upper_bound(errors.begin(), errors.end(), t) - errors.begin();
    out.push_back({t, errors.empty() ? 1.0 : static_cast<double>(count) / n});
  }
  return out;
}

/// Thresholds lo, lo+step, ..., hi computed by index to avoid drift.
inline std::vector<double> cdf_grid(double lo = 0.0, double hi = 2.0, double step = 0.05) {
  if (!(step > 0.0) || hi < lo) fail(ErrorKind::Argument, "cdf_grid: bad range");
  const auto n = static_cast<std::size_t>(std::llround((hi - lo) / step));
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) g[i] = lo + step * static_cast<double>(i);
  return g;
}

/// Same computation as the CCC used by the losses.
inline double ccc_metric(std::span<const double> pred, std::span<const double> target) { return ccc(pred, target); }

}  // namespace affect

#endif  // AFFECT_METRICS_HPP
