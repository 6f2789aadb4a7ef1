#ifndef AFFECT_LABEL_SPACE_HPP
#define AFFECT_LABEL_SPACE_HPP

// Label spaces, annotation-scale transforms and loss weights derived from
// class frequencies.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "affect/error.hpp"

namespace affect {

enum class Dim { Valence, Arousal, Dominance };

constexpr std::string_view dim_name(Dim d) {
  switch (d) {
    case Dim::Valence: return "valence";
    case Dim::Arousal: return "arousal";
    case Dim::Dominance: return "dominance";
  }
  return "?";
}

inline std::optional<Dim> parse_dim(std::string_view name) {
  if (name == "valence") return Dim::Valence;
  if (name == "arousal") return Dim::Arousal;
  if (name == "dominance") return Dim::Dominance;
  return std::nullopt;
}

// UnitReal: reals in [-1, 1]. TenInt: integers in [1, 10].
enum class ValueRange { UnitReal, TenInt };

constexpr std::string_view range_name(ValueRange r) {
  return r == ValueRange::UnitReal ? "unit_real" : "ten_int";
}

constexpr double range_lo(ValueRange r) { return r == ValueRange::UnitReal ? -1.0 : 1.0; }
constexpr double range_hi(ValueRange r) { return r == ValueRange::UnitReal ? 1.0 : 10.0; }

inline constexpr double kTenIntMid = 5.5;
inline constexpr double kTenIntHalfWidth = 4.5;

inline bool in_range(double v, ValueRange r) {
  return std::isfinite(v) && v >= range_lo(r) && v <= range_hi(r);
}

/// Maps a value on the given annotation scale onto [-1, 1]. [1, 10] maps
/// affinely with 1 -> -1 and 10 -> 1; non-integers are accepted so that
/// continuous predictions can be rescaled as well.
inline double scale_to_unit(double value, ValueRange from, Dim dim = Dim::Valence) {
  if (!in_range(value, from)) {
    fail(ErrorKind::Range, std::string(dim_name(dim)) + " value " + std::to_string(value) +
                               " outside " + std::string(range_name(from)) + " range");
  }
  if (from == ValueRange::UnitReal) return value;
  return (value - kTenIntMid) / kTenIntHalfWidth;
}

/// Inverse of scale_to_unit.
inline double scale_from_unit(double value, ValueRange to, Dim dim = Dim::Valence) {
  if (!in_range(value, ValueRange::UnitReal)) {
    fail(ErrorKind::Range, std::string(dim_name(dim)) + " value " + std::to_string(value) +
                               " outside [-1, 1]");
  }
  if (to == ValueRange::UnitReal) return value;
  return value * kTenIntHalfWidth + kTenIntMid;
}

struct LabelSpace {
  std::string name;
  std::vector<std::string> categories;
  bool multi_label = false;
  std::vector<Dim> continuous_dims;
  ValueRange value_range = ValueRange::UnitReal;

  std::size_t num_classes() const noexcept { return categories.size(); }
  std::size_t num_dims() const noexcept { return continuous_dims.size(); }

  std::optional<std::size_t> category_index(std::string_view category) const {
    auto it = std::find(categories.begin(), categories.end(), category);
    if (it == categories.end()) return std::nullopt;
    return static_cast<std::size_t>(it - categories.begin());
  }
  std::optional<std::size_t> dim_index(Dim d) const {
    auto it = std::find(continuous_dims.begin(), continuous_dims.end(), d);
    if (it == continuous_dims.end()) return std::nullopt;
    return static_cast<std::size_t>(it - continuous_dims.begin());
  }
  bool has_dim(Dim d) const { return dim_index(d).has_value(); }

  // Throws Spec if the declaration itself is malformed.
  void check() const {
    if (categories.size() < 2) fail(ErrorKind::Spec, "label space '" + name + "' needs at least 2 categories");
    std::unordered_set<std::string> seen;
    for (const auto& c : categories) {
      if (!seen.insert(c).second) fail(ErrorKind::Spec, "duplicate category '" + c + "' in '" + name + "'");
    }
    std::vector<Dim> dims = continuous_dims;
    std::sort(dims.begin(), dims.end());
    if (std::adjacent_find(dims.begin(), dims.end()) != dims.end()) {
      fail(ErrorKind::Spec, "duplicate continuous dimension in '" + name + "'");
    }
  }
};

inline LabelSpace affectnet8_space() {
  return {"affectnet8",
          {"neutral", "happiness", "sadness", "surprise", "fear", "disgust", "anger", "contempt"},
          false,
          {Dim::Valence, Dim::Arousal},
          ValueRange::UnitReal};
}

inline LabelSpace affectnet7_space() {
  LabelSpace s = affectnet8_space();
  s.name = "affectnet7";
  s.categories.pop_back();  // contempt
  return s;
}

inline LabelSpace emotic26_space() {
  return {"emotic26",
          {"affection", "anger", "annoyance", "anticipation", "aversion", "confidence",
           "disapproval", "disconnection", "disquietment", "doubt_confusion", "embarrassment",
           "engagement", "esteem", "excitement", "fatigue", "fear", "happiness", "pain", "peace",
           "pleasure", "sadness", "sensitivity", "suffering", "surprise", "sympathy", "yearning"},
          true,
          {Dim::Valence, Dim::Arousal, Dim::Dominance},
          ValueRange::TenInt};
}

inline LabelSpace space_by_name(std::string_view name) {
  if (name == "affectnet8") return affectnet8_space();
  if (name == "affectnet7") return affectnet7_space();
  if (name == "emotic26") return emotic26_space();
  fail(ErrorKind::Space, "unknown label space '" + std::string(name) + "'");
}

inline const std::vector<std::string>& preset_space_names() {
  static const std::vector<std::string> names{"affectnet8", "affectnet7", "emotic26"};
  return names;
}

struct AffectSample {
  std::string id;
  std::vector<double> features;
  std::vector<std::size_t> labels;
  std::map<Dim, double> continuous;

  std::optional<double> value(Dim d) const {
    auto it = continuous.find(d);
    if (it == continuous.end()) return std::nullopt;
    return it->second;
  }
};

struct Violation {
  std::string field;
  std::string message;
};

/// Collects every invariant violation of `sample` against `space`; an empty
/// result means the sample is valid.
inline std::vector<Violation> validate_sample(const AffectSample& sample, const LabelSpace& space) {
  std::vector<Violation> out;
  const std::size_t k = space.num_classes();
  if (sample.labels.empty()) {
    out.push_back({"labels", "sample has no label"});
  } else if (!space.multi_label && sample.labels.size() != 1) {
    out.push_back({"labels", "single-label space requires exactly one label, got " +
                                 std::to_string(sample.labels.size())});
  }
  std::vector<std::size_t> sorted = sample.labels;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    out.push_back({"labels", "duplicate label"});
  }
  for (std::size_t label : sample.labels) {
    if (label >= k) {
      out.push_back({"labels", "label index " + std::to_string(label) + " >= " + std::to_string(k)});
    }
  }
  for (Dim d : space.continuous_dims) {
    auto v = sample.value(d);
    const std::string field(dim_name(d));
    if (!v) {
      out.push_back({field, "missing value"});
      continue;
    }
    if (!in_range(*v, space.value_range)) {
      out.push_back({field, "value " + std::to_string(*v) + " outside " +
                                std::string(range_name(space.value_range)) + " range"});
    } else if (space.value_range == ValueRange::TenInt && std::floor(*v) != *v) {
      out.push_back({field, "value " + std::to_string(*v) + " is not an integer"});
    }
  }
  for (const auto& [d, v] : sample.continuous) {
    if (!space.has_dim(d)) {
      out.push_back({std::string(dim_name(d)), "dimension not declared by space '" + space.name + "'"});
    }
  }
  return out;
}

struct ClassWeights {
  std::vector<double> weights;
  std::vector<std::int64_t> source_counts;
};

/// Normalized reciprocal frequencies: w_i = (1/n_i) / sum_j (1/n_j).
inline ClassWeights compute_class_weights(std::span<const std::int64_t> counts) {
  if (counts.empty()) fail(ErrorKind::DegenerateClass, "no class counts given");
  double total = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] <= 0) {
      fail(ErrorKind::DegenerateClass, "class " + std::to_string(i) + " has count " + std::to_string(counts[i]));
    }
    total += 1.0 / static_cast<double>(counts[i]);
  }
  ClassWeights cw;
  cw.source_counts.assign(counts.begin(), counts.end());
  cw.weights.reserve(counts.size());
  for (std::int64_t c : counts) cw.weights.push_back((1.0 / static_cast<double>(c)) / total);
  return cw;
}

/// Positive weights for multi-label BCE: total / count_i.
inline std::vector<double> compute_pos_weights(std::span<const std::int64_t> counts, std::int64_t total) {
  std::vector<double> out;
  out.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] <= 0) {
      fail(ErrorKind::DegenerateClass, "class " + std::to_string(i) + " has count " + std::to_string(counts[i]));
    }
    if (counts[i] > total) {
      fail(ErrorKind::Argument, "class " + std::to_string(i) + " count exceeds total " + std::to_string(total));
    }
    out.push_back(static_cast<double>(total) / static_cast<double>(counts[i]));
  }
  return out;
}

// Per-class occurrence counts over samples; multi-label samples contribute
// one count per label.
inline std::vector<std::int64_t> count_labels(std::span<const AffectSample> samples, std::size_t num_classes) {
  std::vector<std::int64_t> counts(num_classes, 0);
  for (const auto& s : samples) {
    for (std::size_t l : s.labels) {
      if (l >= num_classes) fail(ErrorKind::Label, "label index " + std::to_string(l) + " out of range");
      ++counts[l];
    }
  }
  return counts;
}

}  // namespace affect

#endif  // AFFECT_LABEL_SPACE_HPP
