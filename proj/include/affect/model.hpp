#ifndef AFFECT_MODEL_HPP
#define AFFECT_MODEL_HPP

// Dense two-head network: shared affine+ReLU trunk, a classification head
// emitting K logits and a tanh-bounded regression head emitting one value in
// (-1, 1) per continuous dimension. Which heads exist depends on the regime.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "affect/data.hpp"
#include "affect/diff.hpp"
#include "affect/error.hpp"
#include "affect/label_space.hpp"
#include "affect/tensor.hpp"

namespace affect {

enum class Regime { Discrete, Combined, ValenceArousal };

constexpr std::string_view regime_name(Regime r) {
  switch (r) {
    case Regime::Discrete: return "discrete";
    case Regime::Combined: return "combined";
    case Regime::ValenceArousal: return "valence_arousal";
  }
  return "?";
}

inline Regime parse_regime(std::string_view s) {
  if (s == "discrete") return Regime::Discrete;
  if (s == "combined") return Regime::Combined;
  if (s == "valence_arousal" || s == "valence-arousal") return Regime::ValenceArousal;
  fail(ErrorKind::Config, "unknown regime '" + std::string(s) + "'");
}

constexpr bool has_classifier(Regime r) { return r != Regime::ValenceArousal; }
constexpr bool has_regressor(Regime r) { return r != Regime::Discrete; }

struct ModelConfig {
  std::size_t input_dim = 32;
  std::vector<std::size_t> hidden_dims{512};
  std::size_t num_classes = 8;
  Regime regime = Regime::Combined;
  std::size_t continuous_dims = 2;
  std::uint64_t seed = 0;

  void check() const {
    if (input_dim == 0) fail(ErrorKind::Config, "input_dim must be positive");
    for (auto h : hidden_dims) {
      if (h == 0) fail(ErrorKind::Config, "hidden layer width must be positive");
    }
    if (has_classifier(regime) && num_classes < 2) fail(ErrorKind::Config, "classification head needs K >= 2");
    if (has_regressor(regime) && continuous_dims != 2 && continuous_dims != 3) {
      fail(ErrorKind::Config, "regression head needs 2 or 3 continuous dims");
    }
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct Prediction {
  std::optional<Tensor> logits;      // N×K
  std::optional<Tensor> continuous;  // N×D, in (-1, 1)
};

class Model {
 public:
  struct Output {
    std::optional<diff::Var> logits;
    std::optional<diff::Var> continuous;
  };

  /// Deterministic in config.seed. Every weight segment draws from its own
  /// generator keyed by the segment name, so segments shared between regimes
  /// initialize identically.
  static Model init(const ModelConfig& config) {
    config.check();
    Model m;
    m.config_ = config;
    std::size_t fan_in = config.input_dim;
    for (std::size_t i = 0; i < config.hidden_dims.size(); ++i) {
      const std::string prefix = "hidden" + std::to_string(i);
      m.add_layer(prefix, fan_in, config.hidden_dims[i], std::sqrt(2.0 / static_cast<double>(fan_in)));
      fan_in = config.hidden_dims[i];
    }
    if (has_classifier(config.regime)) {
      m.add_layer("cls", fan_in, config.num_classes, std::sqrt(1.0 / static_cast<double>(fan_in)));
    }
    if (has_regressor(config.regime)) {
      m.add_layer("reg", fan_in, config.continuous_dims, std::sqrt(1.0 / static_cast<double>(fan_in)));
    }
    return m;
  }

  const ModelConfig& config() const noexcept { return config_; }
  std::vector<diff::Parameter>& parameters() noexcept { return params_; }
  const std::vector<diff::Parameter>& parameters() const noexcept { return params_; }

  std::vector<diff::Parameter*> parameter_ptrs() {
    std::vector<diff::Parameter*> out;
    for (auto& p : params_) out.push_back(&p);
    return out;
  }

  diff::Parameter* find(std::string_view name) {
    for (auto& p : params_)
      if (p.name == name) return &p;
    return nullptr;
  }
  const diff::Parameter* find(std::string_view name) const {
    for (const auto& p : params_)
      if (p.name == name) return &p;
    return nullptr;
  }

  void zero_grads() {
    for (auto& p : params_) p.zero_grad();
  }

  /// Records the forward pass on `g` with the weights bound as trainable
  /// leaves.
  Output forward(diff::Graph& g, const diff::Var& x) {
    return forward_impl(x, [&](std::size_t i) { return g.param(params_[i]); });
  }

  /// Inference-only forward; weights enter as constants.
  Prediction forward_values(const Tensor& features) const {
    diff::Graph g;
    diff::Var x = g.constant(features);
    Output out = forward_impl(x, [&](std::size_t i) { return g.constant(params_[i].value); });
    Prediction pred;
    if (out.logits) pred.logits = out.logits->value();
    if (out.continuous) pred.continuous = out.continuous->value();
    return pred;
  }

  /// Copies every segment of `donor` whose name and shape match a segment of
  /// this model. Returns the copied names; trunk segments must all match.
  std::vector<std::string> load_matching(const Model& donor) {
    std::vector<std::string> loaded;
    for (auto& p : params_) {
      const diff::Parameter* d = donor.find(p.name);
      const bool trunk = p.name.rfind("hidden", 0) == 0;
      if (!d || !d->value.same_shape(p.value)) {
        if (trunk) fail(ErrorKind::Config, "warm start: trunk segment '" + p.name + "' missing or reshaped in donor");
        continue;
      }
      p.value = d->value;
      p.zero_grad();
      loaded.push_back(p.name);
    }
    return loaded;
  }

  friend bool operator==(const Model& a, const Model& b) {
    if (!(a.config_ == b.config_) || a.params_.size() != b.params_.size()) return false;
    for (std::size_t i = 0; i < a.params_.size(); ++i) {
      if (a.params_[i].name != b.params_[i].name || !(a.params_[i].value == b.params_[i].value)) return false;
    }
    return true;
  }

 private:
  template <class Bind>
  Output forward_impl(const diff::Var& x, Bind bind) const {
    if (x.cols() != config_.input_dim) {
      fail(ErrorKind::Shape, "feature dim " + std::to_string(x.cols()) + " != model input_dim " +
                                 std::to_string(config_.input_dim));
    }
    diff::Var h = x;
    std::size_t pi = 0;
    for (std::size_t i = 0; i < config_.hidden_dims.size(); ++i, pi += 2) {
      h = diff::relu(diff::affine(h, bind(pi), bind(pi + 1)));
    }
    Output out;
    if (has_classifier(config_.regime)) {
      out.logits = diff::affine(h, bind(pi), bind(pi + 1));
      pi += 2;
    }
    if (has_regressor(config_.regime)) {
      out.continuous = diff::tanh(diff::affine(h, bind(pi), bind(pi + 1)));
    }
    return out;
  }

  void add_layer(const std::string& prefix, std::size_t in, std::size_t out, double stddev) {
    std::mt19937_64 rng(detail::mix_seed(config_.seed, prefix));
    std::normal_distribution<double> normal(0.0, stddev);
    Tensor w(in, out);
    for (double& v : w.values()) v = normal(rng);
    params_.emplace_back(prefix + ".weight", std::move(w));
    params_.emplace_back(prefix + ".bias", Tensor(1, out));
  }

  ModelConfig config_;
  std::vector<diff::Parameter> params_;
};

// ---------------------------------------------------------------------------
// Prediction helpers

/// Row-wise argmax; ties resolve to the lowest index.
inline std::vector<std::size_t> argmax_rows(const Tensor& scores) {
  std::vector<std::size_t> out(scores.rows(), 0);
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    for (std::size_t j = 1; j < scores.cols(); ++j) {
      if (scores(i, j) > scores(i, out[i])) out[i] = j;
    }
  }
  return out;
}

inline Tensor sigmoid_scores(const Tensor& logits) {
  Tensor s(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double z = logits[i];
    s[i] = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  }
  return s;
}

inline constexpr double kMultiLabelThreshold = 0.5;

struct PredictedLabels {
  std::vector<std::size_t> single;            // single-label spaces
  std::vector<std::vector<std::size_t>> multi;  // multi-label spaces
  std::optional<Tensor> scores;               // softmax-free logits or sigmoid scores
  std::optional<Tensor> continuous;           // in the requested value range
};

inline PredictedLabels predict(const Model& model, const Tensor& features, bool multi_label,
                               ValueRange continuous_range = ValueRange::UnitReal) {
  Prediction raw = model.forward_values(features);
  PredictedLabels out;
  if (raw.logits) {
    if (multi_label) {
      Tensor s = sigmoid_scores(*raw.logits);
      out.multi.resize(s.rows());
      for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t k = 0; k < s.cols(); ++k)
          if (s(i, k) > kMultiLabelThreshold) out.multi[i].push_back(k);
      out.scores = std::move(s);
    } else {
      out.single = argmax_rows(*raw.logits);
      out.scores = *raw.logits;
    }
  }
  if (raw.continuous) {
    Tensor c = *raw.continuous;
    for (double& v : c.values()) v = scale_from_unit(v, continuous_range);
    out.continuous = std::move(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
//
// JSON container:
//   {"format": "affect-checkpoint", "version": 1,
//    "config": {...}, "metadata": {...},
//    "segments": [{"name", "rows", "cols", "values": [...]}, ...]}
// Doubles are written in shortest round-trip form, so save/load is
// bit-identical.

inline constexpr std::string_view kCheckpointFormat = "affect-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct CheckpointMetadata {
  std::int64_t epoch = 0;
  std::vector<double> loss_history;
  std::string space;
};

struct ModelCheckpoint {
  Model model;
  CheckpointMetadata metadata;
};

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"input_dim", c.input_dim},         {"hidden_dims", c.hidden_dims},
          {"num_classes", c.num_classes},     {"regime", std::string(regime_name(c.regime))},
          {"continuous_dims", c.continuous_dims}, {"seed", c.seed}};
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.hidden_dims = j.at("hidden_dims").get<std::vector<std::size_t>>();
  c.num_classes = j.at("num_classes").get<std::size_t>();
  c.regime = parse_regime(j.at("regime").get<std::string>());
  c.continuous_dims = j.at("continuous_dims").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

inline nlohmann::json checkpoint_to_json(const ModelCheckpoint& ck) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = config_to_json(ck.model.config());
  j["metadata"] = {{"epoch", ck.metadata.epoch}, {"loss_history", ck.metadata.loss_history}, {"space", ck.metadata.space}};
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& p : ck.model.parameters()) {
    segs.push_back({{"name", p.name},
                    {"rows", p.value.rows()},
                    {"cols", p.value.cols()},
                    {"values", std::vector<double>(p.value.values().begin(), p.value.values().end())}});
  }
  j["segments"] = segs;
  return j;
}

inline ModelCheckpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kCheckpointFormat) fail(ErrorKind::Parse, "not an affect checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion) fail(ErrorKind::Parse, "unsupported checkpoint version");
    ModelCheckpoint ck;
    ck.model = Model::init(config_from_json(j.at("config")));
    const auto& meta = j.at("metadata");
    ck.metadata.epoch = meta.value("epoch", std::int64_t{0});
    ck.metadata.loss_history = meta.value("loss_history", std::vector<double>{});
    ck.metadata.space = meta.value("space", std::string{});
    const auto& segs = j.at("segments");
    if (segs.size() != ck.model.parameters().size()) fail(ErrorKind::Parse, "checkpoint segment count does not match config");
    for (const auto& s : segs) {
      const auto name = s.at("name").get<std::string>();
      diff::Parameter* p = ck.model.find(name);
      if (!p) fail(ErrorKind::Parse, "unexpected checkpoint segment '" + name + "'");
      const auto rows = s.at("rows").get<std::size_t>();
      const auto cols = s.at("cols").get<std::size_t>();
      if (rows != p->value.rows() || cols != p->value.cols()) {
        fail(ErrorKind::Parse, "segment '" + name + "' shape does not match config");
      }
      p->value = Tensor(rows, cols, s.at("values").get<std::vector<double>>());
      p->zero_grad();
    }
    return ck;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("malformed checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const ModelCheckpoint& ck, const std::filesystem::path& path) {
  write_text_file(path, checkpoint_to_json(ck).dump() + "\n");
}

inline ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace affect

#endif  // AFFECT_MODEL_HPP
