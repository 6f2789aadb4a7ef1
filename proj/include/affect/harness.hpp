#ifndef AFFECT_HARNESS_HPP
#define AFFECT_HARNESS_HPP

// Training loop, run logs and training configs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "affect/csv.hpp"
#include "affect/data.hpp"
#include "affect/diff.hpp"
#include "affect/error.hpp"
#include "affect/evaluation.hpp"
#include "affect/graph_losses.hpp"
#include "affect/label_space.hpp"
#include "affect/losses.hpp"
#include "affect/metrics.hpp"
#include "affect/model.hpp"

namespace affect {

struct TrainConfig {
  Regime regime = Regime::Combined;
  double alpha = 5.0;
  double beta = 3.0;
  std::size_t batch_size = 128;
  double lr = 5e-5;
  double lr_min = 0.0;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t epochs = 10;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden_dims{512};
  bool balance_by_class = false;
  std::optional<std::filesystem::path> warm_start;
  std::optional<std::vector<double>> class_weights;
  // Per-epoch checkpoints and the final checkpoint are written here when set.
  std::optional<std::filesystem::path> out_dir;
};

struct EpochLog {
  std::int64_t epoch = 0;  // 1-based
  double loss = 0.0;
  double classification_loss = 0.0;
  double regression_loss = 0.0;
  std::size_t samples = 0;
  std::vector<std::int64_t> class_counts;
  std::optional<double> val_f1;
  std::optional<double> val_rmse;
  double wall_seconds = 0.0;
};

struct RunLog {
  std::vector<EpochLog> epochs;
  std::vector<double> lr_trace;
  std::int64_t total_steps = 0;
  std::int64_t best_epoch = 0;
  std::string checkpoint_path;
  double wall_seconds = 0.0;
};

struct TrainResult {
  ModelCheckpoint checkpoint;  // selected (best) epoch
  RunLog log;
};

struct StepInfo {
  std::int64_t step = 0;
  std::int64_t epoch = 0;
  std::size_t batch = 0;
  double lr = 0.0;
  double loss = 0.0;
};

// Called after backward and before the optimizer update.
using StepHook = std::function<void(const StepInfo&, const Model&)>;

namespace detail {

inline bool better_epoch(Regime regime, const EpochLog& cand, const EpochLog& best) {
  switch (regime) {
    case Regime::Discrete:
      return cand.val_f1.value_or(0.0) > best.val_f1.value_or(0.0);
    case Regime::ValenceArousal:
      return cand.val_rmse.value_or(INFINITY) < best.val_rmse.value_or(INFINITY);
    case Regime::Combined:
      if (cand.val_f1.value_or(0.0) != best.val_f1.value_or(0.0)) return cand.val_f1.value_or(0.0) > best.val_f1.value_or(0.0);
      return cand.val_rmse.value_or(INFINITY) < best.val_rmse.value_or(INFINITY);
  }
  return false;
}

inline Tensor multi_hot(std::span<const AffectSample> samples, std::span<const std::size_t> rows, std::size_t k) {
  Tensor t(rows.size(), k);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t l : samples[rows[r]].labels) t(r, l) = 1.0;
  return t;
}

// Epoch sample order: optional per-class undersampling to the minority
// count, then a seeded shuffle.
inline std::vector<std::size_t> epoch_order(const Manifest& m, bool balance, std::mt19937_64& rng) {
  std::vector<std::size_t> order;
  if (balance) {
    std::vector<std::vector<std::size_t>> by_class(m.space.num_classes());
    for (std::size_t i = 0; i < m.records.size(); ++i) by_class[m.records[i].labels.front()].push_back(i);
    std::size_t minority = SIZE_MAX;
    for (const auto& c : by_class) minority = std::min(minority, c.size());
    if (minority == 0) fail(ErrorKind::DegenerateClass, "balance_by_class: a class has no training samples");
    for (auto& c : by_class) {
      std::shuffle(c.begin(), c.end(), rng);
      order.insert(order.end(), c.begin(), c.begin() + static_cast<std::ptrdiff_t>(minority));
    }
  } else {
    order.resize(m.records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

inline std::vector<std::pair<std::size_t, std::size_t>> batch_bounds(std::size_t n, std::size_t batch, bool min_two) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t b = 0; b < n; b += batch) out.emplace_back(b, std::min(n, b + batch));
  // CCC needs two rows; fold a trailing singleton into the previous batch.
  if (min_two && out.size() > 1 && out.back().second - out.back().first == 1) {
    out[out.size() - 2].second = out.back().second;
    out.pop_back();
  }
  return out;
}

inline std::size_t epoch_sample_count(const Manifest& m, bool balance) {
  if (!balance) return m.records.size();
  const auto counts = count_labels(m.records, m.space.num_classes());
  return static_cast<std::size_t>(*std::min_element(counts.begin(), counts.end())) * m.space.num_classes();
}

}  // namespace detail

inline void check_regime_space(Regime regime, const LabelSpace& space) {
  if (space.multi_label && regime == Regime::Discrete) {
    fail(ErrorKind::Config, "multi-label space '" + space.name + "' needs the combined (BCE) regime");
  }
  if (has_regressor(regime) && space.num_dims() < 2) {
    fail(ErrorKind::Config, "regime needs continuous dimensions");
  }
}

/// Trains a model on `train_set`; when `validation` is given, each epoch is
/// scored and the best epoch's weights are returned. Deterministic in
/// config.seed.
inline TrainResult train(const TrainConfig& config, const Manifest& train_set, const Manifest* validation = nullptr,
                         const StepHook& hook = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  const LabelSpace& space = train_set.space;
  check_regime_space(config.regime, space);
  if (train_set.records.empty()) fail(ErrorKind::EmptyDataset, "training manifest is empty");
  if (config.batch_size == 0) fail(ErrorKind::Config, "batch_size must be positive");
  if (config.epochs < 0) fail(ErrorKind::Config, "epochs must be >= 0");
  if (config.balance_by_class && space.multi_label) {
    fail(ErrorKind::Config, "balance_by_class applies to single-label spaces");
  }
  if (validation && validation->space.name != space.name) fail(ErrorKind::Space, "validation manifest space differs");

  ModelConfig mc;
  mc.input_dim = train_set.feature_dim();
  mc.hidden_dims = config.hidden_dims;
  mc.num_classes = space.num_classes();
  mc.regime = config.regime;
  mc.continuous_dims = space.num_dims();
  mc.seed = config.seed;
  Model model = Model::init(mc);
  if (config.warm_start) {
    ModelCheckpoint donor = load_checkpoint(*config.warm_start);
    model.load_matching(donor.model);
  }

  std::vector<double> class_weights;
  std::vector<double> pos_weights;
  const auto counts = count_labels(train_set.records, space.num_classes());
  if (has_classifier(config.regime)) {
    if (space.multi_label) {
      pos_weights = compute_pos_weights(counts, static_cast<std::int64_t>(train_set.records.size()));
    } else if (config.class_weights) {
      if (config.class_weights->size() != space.num_classes()) fail(ErrorKind::Config, "class_weights length != K");
      class_weights = *config.class_weights;
    } else {
      class_weights = compute_class_weights(counts).weights;
    }
  }

  const bool min_two = config.regime == Regime::ValenceArousal;
  const std::size_t per_epoch = detail::epoch_sample_count(train_set, config.balance_by_class);
  const std::size_t batches_per_epoch = detail::batch_bounds(per_epoch, config.batch_size, min_two).size();
  TrainResult result;
  RunLog& log = result.log;
  log.total_steps = config.epochs * static_cast<std::int64_t>(batches_per_epoch);

  diff::OptimizerState opt;
  opt.config = {config.lr, config.weight_decay, config.beta1, config.beta2, config.eps};
  std::mt19937_64 rng(detail::mix_seed(config.seed, "shuffle"));

  auto make_checkpoint = [&](std::int64_t epoch) {
    ModelCheckpoint ck{model, {epoch, {}, space.name}};
    for (const auto& e : log.epochs) ck.metadata.loss_history.push_back(e.loss);
    return ck;
  };

  result.checkpoint = make_checkpoint(0);
  std::optional<EpochLog> best;
  std::int64_t step = 0;
  const auto params = model.parameter_ptrs();
  const std::vector<Dim>& dims = space.continuous_dims;

  for (std::int64_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t_epoch = std::chrono::steady_clock::now();
    EpochLog el;
    el.epoch = epoch;
    const auto order = detail::epoch_order(train_set, config.balance_by_class, rng);
    el.class_counts.assign(space.num_classes(), 0);
    for (std::size_t i : order)
      for (std::size_t l : train_set.records[i].labels) ++el.class_counts[l];
    const auto bounds = detail::batch_bounds(order.size(), config.batch_size, min_two);
    for (std::size_t bi = 0; bi < bounds.size(); ++bi) {
      const std::span<const std::size_t> rows(order.data() + bounds[bi].first, bounds[bi].second - bounds[bi].first);
      const double lr = diff::cosine_lr(step, log.total_steps, config.lr, config.lr_min);
      opt.config.lr = lr;
      log.lr_trace.push_back(lr);

      diff::Graph g;
      diff::Var x = g.constant(feature_matrix(train_set.records, rows));
      Model::Output out = model.forward(g, x);
      diff::Var total;
      double cls_value = 0.0, reg_value = 0.0;
      if (config.regime == Regime::Discrete) {
        std::vector<std::size_t> targets;
        for (std::size_t r : rows) targets.push_back(train_set.records[r].labels.front());
        total = diff::softmax_ce(*out.logits, targets, class_weights);
        cls_value = total.value().item();
      } else {
        diff::Var target = g.constant(unit_targets(train_set.records, rows, dims, space.value_range));
        if (config.regime == Regime::ValenceArousal) {
          total = graph_loss::valence_arousal(*out.continuous, target, config.beta);
          reg_value = total.value().item();
        } else {
          graph_loss::HeadsLoss hl;
          if (space.multi_label) {
            hl = graph_loss::bce_combined(*out.logits, detail::multi_hot(train_set.records, rows, space.num_classes()),
                                          pos_weights, *out.continuous, target, config.alpha);
          } else {
            std::vector<std::size_t> targets;
            for (std::size_t r : rows) targets.push_back(train_set.records[r].labels.front());
            hl = graph_loss::combined(*out.logits, targets, class_weights, *out.continuous, target, config.alpha);
          }
          total = hl.total;
          cls_value = hl.classification.value().item();
          reg_value = hl.regression.value().item();
        }
      }
      const double loss = total.value().item();
      if (!std::isfinite(loss)) {
        fail(ErrorKind::Numeric, "non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(bi) +
                                     " (first sample '" + train_set.records[rows.front()].id + "')");
      }
      model.zero_grads();
      g.backward(total);
      if (hook) hook(StepInfo{step, epoch, bi, lr, loss}, model);
      diff::adamw_step(params, opt);
      ++step;

      const double w = static_cast<double>(rows.size());
      el.loss += loss * w;
      el.classification_loss += cls_value * w;
      el.regression_loss += reg_value * w;
      el.samples += rows.size();
    }
    if (el.samples > 0) {
      el.loss /= static_cast<double>(el.samples);
      el.classification_loss /= static_cast<double>(el.samples);
      el.regression_loss /= static_cast<double>(el.samples);
    }
    if (validation) {
      const EvalReport rep = evaluate(model, *validation);
      if (rep.classification) el.val_f1 = rep.classification->prf.macro.f1;
      if (rep.regression) el.val_rmse = rep.regression->errors.pooled.rmse;
    }
    el.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_epoch).count();
    log.epochs.push_back(el);

    const ModelCheckpoint ck = make_checkpoint(epoch);
    if (config.out_dir) save_checkpoint(ck, *config.out_dir / ("checkpoint_epoch" + std::to_string(epoch) + ".json"));
    if (!validation || !best || detail::better_epoch(config.regime, el, *best)) {
      best = el;
      result.checkpoint = ck;
      log.best_epoch = epoch;
    }
  }
  if (config.out_dir) {
    const auto path = *config.out_dir / "checkpoint.json";
    save_checkpoint(result.checkpoint, path);
    log.checkpoint_path = path.string();
  }
  log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

inline nlohmann::json to_json(const RunLog& log) {
  nlohmann::json j;
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : log.epochs) {
    nlohmann::json ej = {{"epoch", e.epoch},
                         {"loss", e.loss},
                         {"classification_loss", e.classification_loss},
                         {"regression_loss", e.regression_loss},
                         {"samples", e.samples},
                         {"class_counts", e.class_counts},
                         {"wall_seconds", e.wall_seconds}};
    ej["val_f1"] = e.val_f1 ? nlohmann::json(*e.val_f1) : nlohmann::json(nullptr);
    ej["val_rmse"] = e.val_rmse ? nlohmann::json(*e.val_rmse) : nlohmann::json(nullptr);
    epochs.push_back(ej);
  }
  j["epochs"] = epochs;
  j["lr_trace"] = log.lr_trace;
  j["total_steps"] = log.total_steps;
  j["best_epoch"] = log.best_epoch;
  j["checkpoint"] = log.checkpoint_path;
  j["wall_seconds"] = log.wall_seconds;
  return j;
}

/// Training config plus the manifests it names. Paths are resolved
/// relative to the config file's directory.
struct TrainJob {
  TrainConfig config;
  std::string space = "affectnet8";
  std::filesystem::path train_manifest;
  std::optional<std::filesystem::path> validation_manifest;
};

inline TrainJob train_job_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  static const std::vector<std::string> known{"regime",       "alpha",        "beta",     "batch_size",  "lr",
                                              "lr_min",       "weight_decay", "beta1",    "beta2",       "eps",
                                              "epochs",       "seed",         "hidden",   "balance_by_class",
                                              "warm_start",   "class_weights", "space",   "train",       "validation",
                                              "out_dir"};
  if (!j.is_object()) fail(ErrorKind::Config, "training config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) fail(ErrorKind::Config, "unknown config key '" + k + "'");
  }
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  TrainJob job;
  TrainConfig& c = job.config;
  try {
    if (j.contains("regime")) c.regime = parse_regime(j.at("regime").get<std::string>());
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.lr = j.value("lr", c.lr);
    c.lr_min = j.value("lr_min", c.lr_min);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.eps = j.value("eps", c.eps);
    c.epochs = j.value("epochs", c.epochs);
    c.seed = j.value("seed", c.seed);
    if (j.contains("hidden")) c.hidden_dims = j.at("hidden").get<std::vector<std::size_t>>();
    c.balance_by_class = j.value("balance_by_class", c.balance_by_class);
    if (j.contains("warm_start")) c.warm_start = resolve(j.at("warm_start").get<std::string>());
    if (j.contains("class_weights")) c.class_weights = j.at("class_weights").get<std::vector<double>>();
    if (j.contains("out_dir")) c.out_dir = resolve(j.at("out_dir").get<std::string>());
    job.space = j.value("space", job.space);
    if (!j.contains("train")) fail(ErrorKind::Config, "config needs a 'train' manifest path");
    job.train_manifest = resolve(j.at("train").get<std::string>());
    if (j.contains("validation")) job.validation_manifest = resolve(j.at("validation").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Config, std::string("bad training config: ") + e.what());
  }
  if (!(c.lr > 0.0) || c.lr_min < 0.0 || c.lr_min > c.lr) fail(ErrorKind::Config, "need 0 <= lr_min <= lr, lr > 0");
  if (c.alpha < 0.0 || c.beta < 0.0) fail(ErrorKind::Config, "alpha and beta must be non-negative");
  if (c.batch_size == 0) fail(ErrorKind::Config, "batch_size must be positive");
  if (c.epochs < 0) fail(ErrorKind::Config, "epochs must be >= 0");
  return job;
}

}  // namespace affect

#endif  // AFFECT_HARNESS_HPP
