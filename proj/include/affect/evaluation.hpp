#ifndef AFFECT_EVALUATION_HPP
#define AFFECT_EVALUATION_HPP

// Evaluation reports for trained models (or any prediction function) and the
// cross-dataset protocol that rescales a foreign manifest into [-1, 1] before
// scoring the shared valence/arousal dimensions.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "affect/csv.hpp"
#include "affect/data.hpp"
#include "affect/error.hpp"
#include "affect/label_space.hpp"
#include "affect/metrics.hpp"
#include "affect/model.hpp"

namespace affect {

using PredictFn = std::function<Prediction(const Tensor& features)>;

struct ClassificationReport {
  bool multi_label = false;
  PrfReport prf;
  double accuracy = 0.0;                    // single-label: trace / N
  std::optional<ConfusionMatrix> confusion;  // single-label only
  std::optional<std::size_t> topk_k;         // multi-label only
  std::optional<double> topk_accuracy;
};

struct RegressionReport {
  std::vector<Dim> dims;
  RegressionErrors errors;                       // on the [-1, 1] scale
  std::optional<RegressionErrors> native_errors;  // on the dataset's own scale, if it differs
  std::vector<std::optional<double>> ccc;        // per dim; nullopt when degenerate
  std::vector<double> cdf_grid;
  std::vector<std::vector<double>> cdf;  // per dim, fraction |e| <= grid[i]
  std::vector<double> cdf_pooled;
};

struct EvalReport {
  std::string space;
  std::size_t samples = 0;
  std::optional<ClassificationReport> classification;
  std::optional<RegressionReport> regression;
};

struct EvalOptions {
  std::vector<double> cdf_grid = affect::cdf_grid(0.0, 2.0, 0.05);
  std::size_t topk = 3;
  std::size_t chunk = 1024;
  // Continuous dims to score; empty = all of the manifest's dims. Indices
  // into the prediction columns are given by `prediction_dims`.
  std::vector<Dim> score_dims;
  std::vector<Dim> prediction_dims;
  bool score_classification = true;
};

namespace detail {

inline std::vector<std::optional<double>> safe_ccc(const Tensor& pred, const Tensor& target) {
  std::vector<std::optional<double>> out;
  for (std::size_t c = 0; c < pred.cols(); ++c) {
    try {
      out.push_back(ccc(pred.column_values(c), target.column_values(c)));
    } catch (const AffectError&) {
      out.push_back(std::nullopt);
    }
  }
  return out;
}

}  // namespace detail

/// Scores `predict` on every record of `manifest`. Continuous predictions
/// are expected on [-1, 1]; targets are rescaled there first.
inline EvalReport evaluate_predictions(const PredictFn& predict, const Manifest& manifest, const EvalOptions& opt = {}) {
  const LabelSpace& space = manifest.space;
  const std::size_t n = manifest.records.size();
  if (n == 0) fail(ErrorKind::EmptyDataset, "evaluation manifest is empty");
  EvalReport rep;
  rep.space = space.name;
  rep.samples = n;

  std::optional<Tensor> logits;
  std::optional<Tensor> continuous;
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  for (std::size_t start = 0; start < n; start += opt.chunk) {
    const std::size_t end = std::min(n, start + opt.chunk);
    const std::span<const std::size_t> rows(all.data() + start, end - start);
    Prediction p = predict(feature_matrix(manifest.records, rows));
    auto append = [&](std::optional<Tensor>& acc, const std::optional<Tensor>& part) {
      if (!part) return;
      if (part->rows() != rows.size()) fail(ErrorKind::Shape, "prediction rows do not match batch");
      if (!acc) acc = Tensor(n, part->cols());
      if (acc->cols() != part->cols()) fail(ErrorKind::Shape, "prediction width changed between batches");
      std::copy(part->values().begin(), part->values().end(),
                acc->values().begin() + static_cast<std::ptrdiff_t>(start * part->cols()));
    };
    append(logits, p.logits);
    append(continuous, p.continuous);
  }

  if (logits && opt.score_classification) {
    if (logits->cols() != space.num_classes()) fail(ErrorKind::Space, "classifier width does not match the manifest's categories");
    ClassificationReport cr;
    cr.multi_label = space.multi_label;
    if (space.multi_label) {
      const Tensor scores = sigmoid_scores(*logits);
      Tensor predicted(n, scores.cols());
      Tensor truth(n, scores.cols());
      std::vector<std::vector<std::size_t>> sets;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < scores.cols(); ++k) predicted(i, k) = scores(i, k) > kMultiLabelThreshold ? 1.0 : 0.0;
        for (std::size_t l : manifest.records[i].labels) truth(i, l) = 1.0;
        sets.push_back(manifest.records[i].labels);
      }
      cr.prf = prf1_multilabel(predicted, truth);
      cr.topk_k = std::min(opt.topk, scores.cols());
      cr.topk_accuracy = topk_accuracy(scores, sets, *cr.topk_k);
    } else {
      std::vector<std::size_t> truth;
      for (const auto& r : manifest.records) truth.push_back(r.labels.front());
      const auto pred = argmax_rows(*logits);
      cr.confusion = confusion_matrix(pred, truth, space.num_classes());
      cr.prf = prf1_macro(*cr.confusion);
      cr.accuracy = static_cast<double>(cr.confusion->trace()) / static_cast<double>(n);
    }
    rep.classification = std::move(cr);
  }

  if (continuous) {
    const std::vector<Dim> score = opt.score_dims.empty() ? space.continuous_dims : opt.score_dims;
    const std::vector<Dim> pdims = opt.prediction_dims.empty() ? space.continuous_dims : opt.prediction_dims;
    if (continuous->cols() != pdims.size()) fail(ErrorKind::Space, "regressor width does not match its declared dims");
    Tensor pred(n, score.size());
    for (std::size_t d = 0; d < score.size(); ++d) {
      auto it = std::find(pdims.begin(), pdims.end(), score[d]);
      if (it == pdims.end()) fail(ErrorKind::Space, "model does not predict " + std::string(dim_name(score[d])));
      if (!space.has_dim(score[d])) fail(ErrorKind::Space, "manifest lacks " + std::string(dim_name(score[d])));
      const auto col = static_cast<std::size_t>(it - pdims.begin());
      for (std::size_t i = 0; i < n; ++i) pred(i, d) = (*continuous)(i, col);
    }
    const Tensor target = unit_targets(manifest.records, all, score, space.value_range);
    RegressionReport rr;
    rr.dims = score;
    rr.errors = regression_errors(pred, target);
    if (space.value_range != ValueRange::UnitReal) {
      Tensor pn = pred, tn = target;
      for (double& v : pn.values()) v = scale_from_unit(std::clamp(v, -1.0, 1.0), space.value_range);
      for (double& v : tn.values()) v = scale_from_unit(v, space.value_range);
      rr.native_errors = regression_errors(pn, tn);
    }
    rr.ccc = detail::safe_ccc(pred, target);
    rr.cdf_grid = opt.cdf_grid;
    std::vector<double> all_p, all_t;
    for (std::size_t d = 0; d < score.size(); ++d) {
      const auto pc = pred.column_values(d);
      const auto tc = target.column_values(d);
      std::vector<double> fr;
      for (const auto& pt : abs_error_cdf(pc, tc, opt.cdf_grid)) fr.push_back(pt.fraction);
      rr.cdf.push_back(std::move(fr));
      all_p.insert(all_p.end(), pc.begin(), pc.end());
      all_t.insert(all_t.end(), tc.begin(), tc.end());
    }
    for (const auto& pt : abs_error_cdf(all_p, all_t, opt.cdf_grid)) rr.cdf_pooled.push_back(pt.fraction);
    rep.regression = std::move(rr);
  }
  return rep;
}

inline PredictFn model_predictor(const Model& model) {
  return [&model](const Tensor& x) { return model.forward_values(x); };
}

inline EvalReport evaluate(const Model& model, const Manifest& manifest) {
  return evaluate_predictions(model_predictor(model), manifest);
}

/// Evaluates a checkpoint on a manifest of the same label space.
inline EvalReport evaluate(const ModelCheckpoint& ck, const Manifest& manifest) {
  if (!ck.metadata.space.empty() && ck.metadata.space != manifest.space.name) {
    fail(ErrorKind::Space, "checkpoint space '" + ck.metadata.space + "' differs from manifest space '" +
                               manifest.space.name + "'; use cross-validation");
  }
  return evaluate(ck.model, manifest);
}

/// Scores checkpoint A on manifest B over the shared valence/arousal dims,
/// with B's targets rescaled to [-1, 1]. Classification is scored only when
/// both share the same label space.
inline EvalReport cross_validate(const ModelCheckpoint& ck, const Manifest& manifest) {
  const LabelSpace source = space_by_name(ck.metadata.space.empty() ? manifest.space.name : ck.metadata.space);
  const std::vector<Dim> shared{Dim::Valence, Dim::Arousal};
  for (Dim d : shared) {
    if (!source.has_dim(d) || !manifest.space.has_dim(d)) {
      fail(ErrorKind::Space, "cross-validation needs valence and arousal in both spaces");
    }
  }
  if (!has_regressor(ck.model.config().regime)) fail(ErrorKind::Space, "checkpoint has no valence/arousal head");
  EvalOptions opt;
  opt.score_dims = shared;
  opt.prediction_dims = source.continuous_dims;
  opt.score_classification = source.name == manifest.space.name;
  return evaluate_predictions(model_predictor(ck.model), manifest, opt);
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline nlohmann::json opt_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline nlohmann::json errors_json(const RegressionErrors& e, const std::vector<Dim>& dims) {
  nlohmann::json j;
  for (std::size_t d = 0; d < dims.size(); ++d) {
    j[std::string(dim_name(dims[d]))] = {{"mse", e.per_dim[d].mse}, {"mae", e.per_dim[d].mae}, {"rmse", e.per_dim[d].rmse}};
  }
  j["pooled"] = {{"mse", e.pooled.mse}, {"mae", e.pooled.mae}, {"rmse", e.pooled.rmse}};
  return j;
}

}  // namespace detail

inline nlohmann::json to_json(const EvalReport& r, const LabelSpace& space) {
  nlohmann::json j;
  j["space"] = r.space;
  j["samples"] = r.samples;
  if (r.classification) {
    const auto& c = *r.classification;
    nlohmann::json cj;
    cj["multi_label"] = c.multi_label;
    cj["macro"] = {{"precision", c.prf.macro.precision}, {"recall", c.prf.macro.recall}, {"f1", c.prf.macro.f1}};
    cj["micro"] = {{"precision", c.prf.micro.precision}, {"recall", c.prf.micro.recall}, {"f1", c.prf.micro.f1}};
    nlohmann::json per = nlohmann::json::object();
    for (std::size_t k = 0; k < c.prf.per_class.size(); ++k) {
      const auto& pc = c.prf.per_class[k];
      per[space.categories.at(k)] = {{"precision", pc.precision}, {"recall", pc.recall}, {"f1", pc.f1}, {"support", pc.support}};
    }
    cj["per_class"] = per;
    if (c.confusion) {
      cj["accuracy"] = c.accuracy;
      nlohmann::json m = nlohmann::json::array();
      for (std::size_t i = 0; i < c.confusion->num_classes(); ++i) {
        std::vector<std::int64_t> row;
        for (std::size_t jx = 0; jx < c.confusion->num_classes(); ++jx) row.push_back(c.confusion->at(i, jx));
        m.push_back(row);
      }
      cj["confusion"] = m;
    }
    if (c.topk_accuracy) cj["topk"] = {{"k", *c.topk_k}, {"accuracy", *c.topk_accuracy}};
    j["classification"] = cj;
  }
  if (r.regression) {
    const auto& g = *r.regression;
    nlohmann::json rj;
    std::vector<std::string> names;
    for (Dim d : g.dims) names.emplace_back(dim_name(d));
    rj["dims"] = names;
    rj["scale"] = "unit";
    rj["errors"] = detail::errors_json(g.errors, g.dims);
    if (g.native_errors) rj["native_errors"] = detail::errors_json(*g.native_errors, g.dims);
    nlohmann::json cc = nlohmann::json::object();
    for (std::size_t d = 0; d < g.dims.size(); ++d) cc[names[d]] = detail::opt_number(g.ccc[d]);
    rj["ccc"] = cc;
    nlohmann::json cdf = nlohmann::json::array();
    for (std::size_t i = 0; i < g.cdf_grid.size(); ++i) {
      nlohmann::json pt = {{"threshold", g.cdf_grid[i]}, {"pooled", g.cdf_pooled[i]}};
      for (std::size_t d = 0; d < g.dims.size(); ++d) pt[names[d]] = g.cdf[d][i];
      cdf.push_back(pt);
    }
    rj["cdf"] = cdf;
    j["regression"] = rj;
  }
  return j;
}

inline std::string confusion_csv(const ConfusionMatrix& cm, const LabelSpace& space) {
  std::vector<std::string> header{"true\\pred"};
  header.insert(header.end(), space.categories.begin(), space.categories.end());
  std::string out = csv::join_row(header) + "\n";
  for (std::size_t i = 0; i < cm.num_classes(); ++i) {
    std::vector<std::string> row{space.categories[i]};
    for (std::size_t j = 0; j < cm.num_classes(); ++j) row.push_back(std::to_string(cm.at(i, j)));
    out += csv::join_row(row) + "\n";
  }
  return out;
}

inline std::string cdf_csv(const RegressionReport& r) {
  std::vector<std::string> header{"threshold"};
  for (Dim d : r.dims) header.emplace_back(dim_name(d));
  header.emplace_back("pooled");
  std::string out = csv::join_row(header) + "\n";
  for (std::size_t i = 0; i < r.cdf_grid.size(); ++i) {
    std::vector<std::string> row{csv::format_number(r.cdf_grid[i])};
    for (const auto& col : r.cdf) row.push_back(csv::format_number(col[i]));
    row.push_back(csv::format_number(r.cdf_pooled[i]));
    out += csv::join_row(row) + "\n";
  }
  return out;
}

}  // namespace affect

#endif  // AFFECT_EVALUATION_HPP
