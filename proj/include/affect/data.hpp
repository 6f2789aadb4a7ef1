#ifndef AFFECT_DATA_HPP
#define AFFECT_DATA_HPP

// Manifests (CSV sample indices) and the synthetic circumplex generator.
//
// Manifest CSV, UTF-8, LF, one header row:
//   single-label:  id,features,label,<dims...>
//   multi-label:   id,features,labels,<dims...>
// where <dims> are the space's continuous dimensions in declaration order
// (valence,arousal[,dominance]). `label` is a category name or index;
// `labels` is a |-separated list of category names. `features` is either an
// inline ;-separated list of numbers or a path (relative to the manifest) of
// a text file holding whitespace-separated numbers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "affect/csv.hpp"
#include "affect/error.hpp"
#include "affect/label_space.hpp"
#include "affect/tensor.hpp"

namespace affect {

enum class Split { Train, Validation, Test };

constexpr std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Validation: return "validation";
    case Split::Test: return "test";
  }
  return "?";
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "validation" || s == "val") return Split::Validation;
  if (s == "test") return Split::Test;
  fail(ErrorKind::Argument, "unknown split '" + std::string(s) + "'");
}

// Guesses the split from a file name ("train.csv", "emotic_val.csv", ...).
inline Split split_from_path(const std::filesystem::path& path) {
  const std::string stem = path.stem().string();
  if (stem.find("val") != std::string::npos) return Split::Validation;
  if (stem.find("test") != std::string::npos) return Split::Test;
  return Split::Train;
}

struct Manifest {
  LabelSpace space;
  Split split = Split::Train;
  std::vector<AffectSample> records;

  std::size_t size() const noexcept { return records.size(); }
  std::size_t feature_dim() const { return records.empty() ? 0 : records.front().features.size(); }
};

struct RowIssue {
  std::size_t row = 0;  // 1-based data row; 0 for the header
  std::string field;
  std::string message;
};

struct ManifestParse {
  Manifest manifest;
  std::vector<RowIssue> issues;
};

inline std::vector<std::string> manifest_header(const LabelSpace& space) {
  std::vector<std::string> h{"id", "features", space.multi_label ? "labels" : "label"};
  for (Dim d : space.continuous_dims) h.emplace_back(dim_name(d));
  return h;
}

inline std::string issues_to_string(const std::vector<RowIssue>& issues) {
  std::string msg;
  for (const auto& i : issues) {
    if (!msg.empty()) msg += "; ";
    msg += "row " + std::to_string(i.row) + " " + i.field + ": " + i.message;
  }
  return msg;
}

namespace detail {

inline std::optional<std::vector<double>> parse_inline_features(std::string_view s) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (auto part : csv::split(s, ';')) {
    auto v = csv::parse_number(part);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

inline std::optional<std::vector<double>> read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    auto v = csv::parse_number(tok);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

}  // namespace detail

/// Parses manifest text, collecting every parse and validation issue with
/// its row number instead of stopping at the first.
inline ManifestParse parse_manifest(std::string_view text, const LabelSpace& space, Split split,
                                    const std::filesystem::path& base_dir = {}) {
  ManifestParse out;
  out.manifest.space = space;
  out.manifest.split = split;
  std::vector<std::string_view> lines = csv::split(text, '\n');
  while (!lines.empty() && (lines.back().empty() || lines.back() == "\r")) lines.pop_back();
  if (lines.empty()) {
    out.issues.push_back({0, "header", "empty manifest"});
    return out;
  }
  const auto expected = manifest_header(space);
  auto header = csv::split_row(lines[0]);
  if (!header || *header != expected) {
    out.issues.push_back({0, "header", "expected '" + csv::join_row(expected) + "'"});
    return out;
  }
  std::unordered_set<std::string> ids;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::size_t row = li;
    auto fields = csv::split_row(lines[li]);
    if (!fields) {
      out.issues.push_back({row, "row", "unterminated quote"});
      continue;
    }
    if (fields->size() != expected.size()) {
      out.issues.push_back({row, "row", "expected " + std::to_string(expected.size()) + " fields, got " +
                                            std::to_string(fields->size())});
      continue;
    }
    AffectSample s;
    s.id = (*fields)[0];
    bool ok = true;
    if (s.id.empty()) {
      out.issues.push_back({row, "id", "empty id"});
      ok = false;
    } else if (!ids.insert(s.id).second) {
      out.issues.push_back({row, "id", "duplicate id '" + s.id + "'"});
      ok = false;
    }

    const std::string& feat = (*fields)[1];
    if (auto inline_values = detail::parse_inline_features(feat)) {
      s.features = std::move(*inline_values);
    } else if (auto file_values = detail::read_feature_file(base_dir / feat)) {
      s.features = std::move(*file_values);
    } else {
      out.issues.push_back({row, "features", "neither numeric list nor readable feature file: '" + feat + "'"});
      ok = false;
    }

    const std::string& label_field = (*fields)[2];
    if (space.multi_label) {
      if (!label_field.empty()) {
        for (auto name : csv::split(label_field, '|')) {
          if (auto idx = space.category_index(name)) {
            s.labels.push_back(*idx);
          } else {
            out.issues.push_back({row, "labels", "unknown category '" + std::string(name) + "'"});
            ok = false;
          }
        }
      }
    } else if (auto idx = space.category_index(label_field)) {
      s.labels.push_back(*idx);
    } else if (auto num = csv::parse_number(label_field); num && *num >= 0 && std::floor(*num) == *num) {
      s.labels.push_back(static_cast<std::size_t>(*num));
    } else {
      out.issues.push_back({row, "label", "unknown category '" + label_field + "'"});
      ok = false;
    }

    for (std::size_t d = 0; d < space.num_dims(); ++d) {
      const Dim dim = space.continuous_dims[d];
      auto v = csv::parse_number((*fields)[3 + d]);
      if (!v) {
        out.issues.push_back({row, std::string(dim_name(dim)), "not a number: '" + (*fields)[3 + d] + "'"});
        ok = false;
      } else {
        s.continuous[dim] = *v;
      }
    }
    if (ok) {
      for (auto& v : validate_sample(s, space)) out.issues.push_back({row, v.field, v.message});
    }
    out.manifest.records.push_back(std::move(s));
  }
  if (!out.manifest.records.empty()) {
    const std::size_t dim = out.manifest.records.front().features.size();
    for (std::size_t i = 0; i < out.manifest.records.size(); ++i) {
      if (out.manifest.records[i].features.size() != dim) {
        out.issues.push_back({i + 1, "features", "feature length differs from first row"});
      }
    }
  }
  return out;
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << text;
}

/// Loads and validates a manifest. Throws Parse for malformed rows and
/// Validation for out-of-range values; the message lists every issue.
inline Manifest load_manifest(const std::filesystem::path& path, const LabelSpace& space) {
  const std::string text = read_text_file(path);
  ManifestParse p = parse_manifest(text, space, split_from_path(path), path.parent_path());
  if (!p.issues.empty()) {
    const bool parse_error = std::any_of(p.issues.begin(), p.issues.end(), [](const RowIssue& i) {
      return i.field == "row" || i.field == "header" || i.message.rfind("not a number", 0) == 0 ||
             i.message.rfind("neither numeric", 0) == 0;
    });
    fail(parse_error ? ErrorKind::Parse : ErrorKind::Validation,
         path.string() + ": " + issues_to_string(p.issues));
  }
  return std::move(p.manifest);
}

inline std::string manifest_to_csv(const Manifest& m) {
  std::string out = csv::join_row(manifest_header(m.space)) + "\n";
  for (const auto& s : m.records) {
    std::vector<std::string> row;
    row.push_back(s.id);
    std::string feat;
    for (std::size_t i = 0; i < s.features.size(); ++i) {
      if (i) feat += ';';
      feat += csv::format_number(s.features[i]);
    }
    row.push_back(std::move(feat));
    std::string labels;
    for (std::size_t i = 0; i < s.labels.size(); ++i) {
      if (i) labels += '|';
      labels += s.labels[i] < m.space.num_classes() ? m.space.categories[s.labels[i]] : std::to_string(s.labels[i]);
    }
    row.push_back(std::move(labels));
    for (Dim d : m.space.continuous_dims) {
      auto v = s.value(d);
      row.push_back(v ? csv::format_number(*v) : "");
    }
    out += csv::join_row(row) + "\n";
  }
  return out;
}

inline void save_manifest(const Manifest& m, const std::filesystem::path& path) {
  write_text_file(path, manifest_to_csv(m));
}

// Row-stacked feature matrix.
inline Tensor feature_matrix(std::span<const AffectSample> samples, std::span<const std::size_t> rows) {
  if (rows.empty()) return {};
  const std::size_t dim = samples[rows[0]].features.size();
  Tensor x(rows.size(), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = samples[rows[r]].features;
    if (f.size() != dim) fail(ErrorKind::Shape, "inconsistent feature length in sample '" + samples[rows[r]].id + "'");
    std::copy(f.begin(), f.end(), x.values().begin() + static_cast<std::ptrdiff_t>(r * dim));
  }
  return x;
}

/// Continuous targets of `rows` over `dims`, rescaled to [-1, 1].
inline Tensor unit_targets(std::span<const AffectSample> samples, std::span<const std::size_t> rows,
                           const std::vector<Dim>& dims, ValueRange range) {
  Tensor t(rows.size(), dims.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t d = 0; d < dims.size(); ++d) {
      auto v = samples[rows[r]].value(dims[d]);
      if (!v) fail(ErrorKind::Dimension, "sample '" + samples[rows[r]].id + "' lacks " + std::string(dim_name(dims[d])));
      t(r, d) = scale_to_unit(*v, range, dims[d]);
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Synthetic circumplex data

struct ClassProfile {
  double prior = 0.0;
  std::vector<double> mean;                 // per continuous dim, on [-1, 1]
  std::vector<std::vector<double>> cov;     // D×D
};

struct SyntheticSpec {
  std::string space = "affectnet8";
  std::vector<ClassProfile> classes;
  std::size_t feature_dim = 32;
  double class_signal = 1.0;
  double va_signal = 1.0;
  double noise_scale = 0.1;
  std::map<std::size_t, double> label_counts;  // multi-label mode: k -> probability
  std::uint64_t seed = 0;
  std::map<std::string, std::size_t> splits{{"train", 8000}, {"test", 2000}};
};

namespace detail {

// Lower Cholesky factor of a PSD matrix; throws if not PSD.
inline std::vector<std::vector<double>> cholesky_psd(const std::vector<std::vector<double>>& a, const std::string& what) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> l(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != n) fail(ErrorKind::Spec, what + ": covariance is not square");
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(a[i][j] - a[j][i]) > 1e-12) fail(ErrorKind::Spec, what + ": covariance is not symmetric");
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= l[j][k] * l[j][k];
    if (d < -1e-12) fail(ErrorKind::Spec, what + ": covariance is not positive semi-definite");
    l[j][j] = d > 0 ? std::sqrt(d) : 0.0;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (l[j][j] > 0) {
        l[i][j] = s / l[j][j];
      } else if (std::abs(s) > 1e-12) {
        fail(ErrorKind::Spec, what + ": covariance is not positive semi-definite");
      }
    }
  }
  return l;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::string_view salt) {
  // FNV-1a over the salt, folded with the seed through splitmix64.
  std::uint64_t h = 1469598103934665603ull;
  for (char c : salt) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull + h;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::size_t draw_index(std::mt19937_64& rng, std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) total += p;
  std::uniform_real_distribution<double> u(0.0, total);
  const double x = u(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (x < acc && probs[i] > 0.0) return i;
  }
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return 0;
}

}  // namespace detail

// Deterministic structure shared by every split of one spec.
struct SyntheticStructure {
  std::vector<std::vector<double>> prototypes;  // K × feature_dim
  std::vector<std::vector<double>> va_basis;    // D × feature_dim
};

inline void check_synthetic_spec(const SyntheticSpec& spec, const LabelSpace& space) {
  if (spec.classes.size() != space.num_classes()) {
    fail(ErrorKind::Spec, "synthetic spec has " + std::to_string(spec.classes.size()) + " classes, space '" +
                              space.name + "' has " + std::to_string(space.num_classes()));
  }
  if (spec.feature_dim == 0) fail(ErrorKind::Spec, "feature_dim must be positive");
  double total = 0.0;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    const auto& cls = spec.classes[c];
    if (cls.prior < 0.0) fail(ErrorKind::Spec, "negative prior for class " + std::to_string(c));
    total += cls.prior;
    if (cls.mean.size() != space.num_dims()) fail(ErrorKind::Spec, "class " + std::to_string(c) + ": mean has wrong length");
    if (cls.cov.size() != space.num_dims()) fail(ErrorKind::Spec, "class " + std::to_string(c) + ": covariance has wrong size");
    detail::cholesky_psd(cls.cov, "class " + std::to_string(c));
  }
  if (!(total > 0.0)) fail(ErrorKind::Spec, "class priors have zero mass");
  if (std::abs(total - 1.0) > 1e-6) fail(ErrorKind::Spec, "class priors sum to " + std::to_string(total) + ", not 1");
  if (space.multi_label) {
    if (spec.label_counts.empty()) fail(ErrorKind::Spec, "multi-label spec needs a label_counts distribution");
    double mass = 0.0;
    std::size_t positive_classes = 0;
    for (const auto& cls : spec.classes) positive_classes += cls.prior > 0.0;
    for (const auto& [k, p] : spec.label_counts) {
      if (k == 0 || p < 0.0) fail(ErrorKind::Spec, "label_counts needs k >= 1 and p >= 0");
      if (p > 0.0 && k > positive_classes) fail(ErrorKind::Spec, "label count exceeds classes with prior mass");
      mass += p;
    }
    if (!(mass > 0.0)) fail(ErrorKind::Spec, "label_counts has zero mass");
  }
}

inline SyntheticStructure synthetic_structure(const SyntheticSpec& spec, std::size_t num_classes, std::size_t num_dims) {
  std::mt19937_64 rng(detail::mix_seed(spec.seed, "structure"));
  std::normal_distribution<double> normal(0.0, 1.0);
  SyntheticStructure s;
  s.prototypes.assign(num_classes, std::vector<double>(spec.feature_dim));
  s.va_basis.assign(num_dims, std::vector<double>(spec.feature_dim));
  for (auto& p : s.prototypes)
    for (double& v : p) v = normal(rng);
  for (auto& b : s.va_basis)
    for (double& v : b) v = normal(rng);
  // Orthogonalize all directions when there is room, keeping each at norm
  // sqrt(feature_dim), so no class or dimension is accidentally collinear.
  if (num_classes + num_dims <= spec.feature_dim) {
    std::vector<std::vector<double>*> dirs;
    for (auto& p : s.prototypes) dirs.push_back(&p);
    for (auto& b : s.va_basis) dirs.push_back(&b);
    const double target = std::sqrt(static_cast<double>(spec.feature_dim));
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      auto& v = *dirs[i];
      for (std::size_t j = 0; j < i; ++j) {
        const auto& u = *dirs[j];
        double dot = 0.0;
        for (std::size_t f = 0; f < v.size(); ++f) dot += v[f] * u[f];
        for (std::size_t f = 0; f < v.size(); ++f) v[f] -= dot / (target * target) * u[f];
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      for (double& x : v) x *= target / norm;
    }
  }
  return s;
}

/// Draws `count` samples for `split`. Deterministic in (spec, split).
inline Manifest gen_synthetic(const SyntheticSpec& spec, Split split, std::size_t count) {
  const LabelSpace space = space_by_name(spec.space);
  check_synthetic_spec(spec, space);
  const std::size_t k = space.num_classes();
  const std::size_t dims = space.num_dims();
  const SyntheticStructure structure = synthetic_structure(spec, k, dims);

  std::vector<double> priors;
  std::vector<std::vector<std::vector<double>>> chol;
  for (std::size_t c = 0; c < k; ++c) {
    priors.push_back(spec.classes[c].prior);
    chol.push_back(detail::cholesky_psd(spec.classes[c].cov, "class " + std::to_string(c)));
  }
  std::vector<std::size_t> count_values;
  std::vector<double> count_probs;
  for (const auto& [n, p] : spec.label_counts) {
    count_values.push_back(n);
    count_probs.push_back(p);
  }

  std::mt19937_64 rng(detail::mix_seed(spec.seed, split_name(split)));
  std::normal_distribution<double> normal(0.0, 1.0);

  Manifest m;
  m.space = space;
  m.split = split;
  m.records.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    AffectSample s;
    s.id = std::string(split_name(split)) + "_" + std::to_string(i);
    std::size_t n_labels = 1;
    if (space.multi_label) n_labels = count_values[detail::draw_index(rng, count_probs)];
    std::vector<double> remaining = priors;
    for (std::size_t l = 0; l < n_labels; ++l) {
      const std::size_t c = detail::draw_index(rng, remaining);
      remaining[c] = 0.0;
      s.labels.push_back(c);
    }
    std::sort(s.labels.begin() + 1, s.labels.end());

    // Continuous values follow the first (primary) label's Gaussian.
    const std::size_t primary = s.labels.front();
    std::vector<double> z(dims);
    for (double& v : z) v = normal(rng);
    std::vector<double> unit(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      double v = spec.classes[primary].mean[d];
      for (std::size_t j = 0; j <= d; ++j) v += chol[primary][d][j] * z[j];
      unit[d] = std::clamp(v, -1.0, 1.0);
    }
    for (std::size_t d = 0; d < dims; ++d) {
      double v = scale_from_unit(unit[d], space.value_range, space.continuous_dims[d]);
      if (space.value_range == ValueRange::TenInt) {
        v = std::round(v);
        unit[d] = scale_to_unit(v, ValueRange::TenInt);
      }
      s.continuous[space.continuous_dims[d]] = v;
    }

    s.features.assign(spec.feature_dim, 0.0);
    for (std::size_t f = 0; f < spec.feature_dim; ++f) {
      double v = 0.0;
      for (std::size_t c : s.labels) v += spec.class_signal * structure.prototypes[c][f];
      for (std::size_t d = 0; d < dims; ++d) v += spec.va_signal * unit[d] * structure.va_basis[d][f];
      if (spec.noise_scale != 0.0) v += spec.noise_scale * normal(rng);
      s.features[f] = v;
    }
    m.records.push_back(std::move(s));
  }
  return m;
}

// Circumplex-inspired defaults: eight well-separated categories with
// tight per-class valence/arousal clouds, balanced priors.
inline SyntheticSpec default_synthetic_spec(std::uint64_t seed = 7) {
  SyntheticSpec spec;
  spec.space = "affectnet8";
  spec.seed = seed;
  const std::array<std::array<double, 2>, 8> means{{
      {0.0, 0.0},     // neutral
      {0.7, 0.3},     // happiness
      {-0.6, -0.4},   // sadness
      {0.3, 0.75},    // surprise
      {-0.4, 0.75},   // fear
      {-0.7, 0.25},   // disgust
      {-0.5, 0.5},    // anger
      {-0.3, -0.05},  // contempt
  }};
  for (const auto& mu : means) {
    spec.classes.push_back({1.0 / 8.0, {mu[0], mu[1]}, {{0.01, 0.0}, {0.0, 0.01}}});
  }
  return spec;
}

inline SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) try {
  SyntheticSpec spec;
  spec.space = j.value("space", spec.space);
  spec.feature_dim = j.value("feature_dim", spec.feature_dim);
  spec.class_signal = j.value("class_signal", spec.class_signal);
  spec.va_signal = j.value("va_signal", spec.va_signal);
  spec.noise_scale = j.value("noise_scale", spec.noise_scale);
  spec.seed = j.value("seed", spec.seed);
  if (j.contains("splits")) {
    spec.splits.clear();
    for (const auto& [name, n] : j.at("splits").items()) spec.splits[name] = n.get<std::size_t>();
  }
  if (j.contains("label_counts")) {
    for (const auto& [k, p] : j.at("label_counts").items()) spec.label_counts[std::stoul(k)] = p.get<double>();
  }
  if (!j.contains("classes")) fail(ErrorKind::Spec, "synthetic spec needs a 'classes' array");
  for (const auto& c : j.at("classes")) {
    ClassProfile p;
    p.prior = c.at("prior").get<double>();
    p.mean = c.at("mean").get<std::vector<double>>();
    if (c.contains("cov")) {
      p.cov = c.at("cov").get<std::vector<std::vector<double>>>();
    } else {
      const double sd = c.value("stddev", 0.1);
      p.cov.assign(p.mean.size(), std::vector<double>(p.mean.size(), 0.0));
      for (std::size_t d = 0; d < p.mean.size(); ++d) p.cov[d][d] = sd * sd;
    }
    spec.classes.push_back(std::move(p));
  }
  return spec;
} catch (const nlohmann::json::exception& e) {
  fail(ErrorKind::Spec, std::string("bad synthetic spec: ") + e.what());
}

inline nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec) {
  nlohmann::json j;
  j["space"] = spec.space;
  j["feature_dim"] = spec.feature_dim;
  j["class_signal"] = spec.class_signal;
  j["va_signal"] = spec.va_signal;
  j["noise_scale"] = spec.noise_scale;
  j["seed"] = spec.seed;
  j["splits"] = spec.splits;
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [k, p] : spec.label_counts) counts[std::to_string(k)] = p;
  if (!spec.label_counts.empty()) j["label_counts"] = counts;
  j["classes"] = nlohmann::json::array();
  for (const auto& c : spec.classes) j["classes"].push_back({{"prior", c.prior}, {"mean", c.mean}, {"cov", c.cov}});
  return j;
}

}  // namespace affect

#endif  // AFFECT_DATA_HPP
