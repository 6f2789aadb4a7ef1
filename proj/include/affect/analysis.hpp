#ifndef AFFECT_ANALYSIS_HPP
#define AFFECT_ANALYSIS_HPP

// Dataset distribution statistics: category frequencies, per-category
// valence/arousal box statistics, labels-per-image counts and value
// histograms, plus their JSON/CSV exports.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "affect/csv.hpp"
#include "affect/data.hpp"
#include "affect/error.hpp"
#include "affect/label_space.hpp"

namespace affect::analysis {

struct CategoryCounts {
  std::vector<std::int64_t> counts;
  std::int64_t images = 0;

  std::int64_t occurrences() const {
    std::int64_t s = 0;
    for (auto c : counts) s += c;
    return s;
  }
};

/// Associative, order-independent merge of partial counts.
inline CategoryCounts merge(const CategoryCounts& a, const CategoryCounts& b) {
  if (a.counts.size() != b.counts.size()) fail(ErrorKind::Shape, "merging counts over different category sets");
  CategoryCounts out = a;
  for (std::size_t i = 0; i < b.counts.size(); ++i) out.counts[i] += b.counts[i];
  out.images += b.images;
  return out;
}

inline CategoryCounts count_categories(std::span<const AffectSample> samples, const LabelSpace& space) {
  CategoryCounts c;
  c.counts = count_labels(samples, space.num_classes());
  c.images = static_cast<std::int64_t>(samples.size());
  return c;
}

struct CategoryHistogram {
  CategoryCounts counts;
  std::vector<double> per_occurrence;  // count / total label occurrences
  std::vector<double> per_image;       // count / number of images
};

inline CategoryHistogram category_histogram(std::span<const AffectSample> samples, const LabelSpace& space) {
  if (samples.empty()) fail(ErrorKind::EmptyDataset, "category_histogram: no samples");
  CategoryHistogram h;
  h.counts = count_categories(samples, space);
  const double occ = static_cast<double>(h.counts.occurrences());
  const double img = static_cast<double>(h.counts.images);
  for (auto c : h.counts.counts) {
    h.per_occurrence.push_back(occ > 0 ? static_cast<double>(c) / occ : 0.0);
    h.per_image.push_back(static_cast<double>(c) / img);
  }
  return h;
}

struct FiveNumber {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

/// Quantile by linear interpolation between order statistics at
/// position q*(n-1) (the inclusive method).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) fail(ErrorKind::EmptyDataset, "quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline FiveNumber five_number(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  FiveNumber f;
  f.count = values.size();
  f.min = values.front();
  f.max = values.back();
  f.q1 = quantile_sorted(values, 0.25);
  f.median = quantile_sorted(values, 0.5);
  f.q3 = quantile_sorted(values, 0.75);
  return f;
}

struct ScatterPoint {
  std::size_t category = 0;
  double valence = 0.0;
  double arousal = 0.0;
};

struct VaStatistics {
  // category index -> dim -> summary; categories without samples are absent.
  std::map<std::size_t, std::map<Dim, FiveNumber>> per_category;
  std::vector<std::string> warnings;
};

/// Per-category five-number summaries; a multi-label sample contributes to
/// every one of its categories.
inline VaStatistics va_statistics(std::span<const AffectSample> samples, const LabelSpace& space) {
  if (samples.empty()) fail(ErrorKind::EmptyDataset, "va_statistics: no samples");
  std::vector<std::map<Dim, std::vector<double>>> values(space.num_classes());
  for (const auto& s : samples) {
    for (Dim d : space.continuous_dims) {
      auto v = s.value(d);
      if (!v) fail(ErrorKind::Dimension, "sample '" + s.id + "' lacks " + std::string(dim_name(d)));
      for (std::size_t l : s.labels) {
        if (l >= space.num_classes()) fail(ErrorKind::Label, "label out of range in sample '" + s.id + "'");
        values[l][d].push_back(*v);
      }
    }
  }
  VaStatistics st;
  for (std::size_t c = 0; c < space.num_classes(); ++c) {
    if (values[c].empty()) {
      st.warnings.push_back("category '" + space.categories[c] + "' has no samples");
      continue;
    }
    for (auto& [d, vals] : values[c]) st.per_category[c][d] = five_number(std::move(vals));
  }
  return st;
}

/// Up to `limit` (category, valence, arousal) triples in sample order, one
/// per label.
inline std::vector<ScatterPoint> scatter_points(std::span<const AffectSample> samples, const LabelSpace& space,
                                                std::size_t limit) {
  if (!space.has_dim(Dim::Valence) || !space.has_dim(Dim::Arousal)) {
    fail(ErrorKind::Dimension, "scatter export needs valence and arousal");
  }
  std::vector<ScatterPoint> out;
  for (std::size_t i = 0; i < samples.size() && i < limit; ++i) {
    const auto& s = samples[i];
    for (std::size_t l : s.labels) out.push_back({l, *s.value(Dim::Valence), *s.value(Dim::Arousal)});
  }
  return out;
}

/// Number of images with exactly k labels, k >= 1.
inline std::map<std::size_t, std::int64_t> labels_per_image_histogram(std::span<const AffectSample> samples,
                                                                      const LabelSpace& space) {
  if (!space.multi_label) fail(ErrorKind::UnsupportedSpace, "labels-per-image needs a multi-label space");
  std::map<std::size_t, std::int64_t> h;
  for (const auto& s : samples) {
    if (!s.labels.empty()) ++h[s.labels.size()];
  }
  return h;
}

struct Bin {
  double lo = 0.0;
  double hi = 0.0;
  std::int64_t count = 0;
};

struct ValueHistogram {
  Dim dim = Dim::Valence;
  std::vector<Bin> bins;
  std::vector<std::string> warnings;
};

/// Equal-width bins over the space's value range. Bins are [lo, hi) except
/// the last, which is closed.
inline ValueHistogram value_histogram(std::span<const AffectSample> samples, const LabelSpace& space, Dim dim,
                                      std::size_t bins) {
  if (bins < 2) fail(ErrorKind::Argument, "value_histogram needs at least 2 bins");
  if (!space.has_dim(dim)) fail(ErrorKind::Dimension, "space '" + space.name + "' has no " + std::string(dim_name(dim)));
  const double lo = range_lo(space.value_range);
  const double hi = range_hi(space.value_range);
  const double width = (hi - lo) / static_cast<double>(bins);
  ValueHistogram h;
  h.dim = dim;
  for (std::size_t b = 0; b < bins; ++b) {
    h.bins.push_back({lo + width * static_cast<double>(b), b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1), 0});
  }
  std::size_t seen = 0;
  for (const auto& s : samples) {
    auto v = s.value(dim);
    if (!v) continue;
    ++seen;
    if (*v < lo || *v > hi) fail(ErrorKind::Range, "value outside range in sample '" + s.id + "'");
    std::size_t b = bins - 1;
    for (std::size_t i = 0; i + 1 < bins; ++i) {
      if (*v < h.bins[i].hi) {
        b = i;
        break;
      }
    }
    ++h.bins[b].count;
  }
  if (seen == 0) h.warnings.push_back(std::string(dim_name(dim)) + " column is empty");
  return h;
}

struct DistributionReport {
  std::string split_name;
  std::string space_name;
  CategoryHistogram categories;
  VaStatistics va;
  std::optional<std::map<std::size_t, std::int64_t>> labels_per_image;
  std::vector<ValueHistogram> histograms;
};

inline DistributionReport analyze(const Manifest& m, std::size_t bins = 20) {
  DistributionReport r;
  r.split_name = std::string(split_name(m.split));
  r.space_name = m.space.name;
  r.categories = category_histogram(m.records, m.space);
  r.va = va_statistics(m.records, m.space);
  if (m.space.multi_label) r.labels_per_image = labels_per_image_histogram(m.records, m.space);
  for (Dim d : m.space.continuous_dims) r.histograms.push_back(value_histogram(m.records, m.space, d, bins));
  return r;
}

inline nlohmann::json to_json(const FiveNumber& f) {
  return {{"min", f.min}, {"q1", f.q1}, {"median", f.median}, {"q3", f.q3}, {"max", f.max}, {"count", f.count}};
}

inline nlohmann::json to_json(const DistributionReport& r, const LabelSpace& space) {
  nlohmann::json j;
  j["split"] = r.split_name;
  j["space"] = r.space_name;
  nlohmann::json freq = nlohmann::json::object();
  for (std::size_t c = 0; c < space.num_classes(); ++c) {
    freq[space.categories[c]] = {{"count", r.categories.counts.counts[c]},
                                 {"relative", r.categories.per_occurrence[c]},
                                 {"per_image", r.categories.per_image[c]}};
  }
  j["category_frequencies"] = freq;
  j["images"] = r.categories.counts.images;
  nlohmann::json va = nlohmann::json::object();
  for (const auto& [c, dims] : r.va.per_category) {
    nlohmann::json per_dim = nlohmann::json::object();
    for (const auto& [d, f] : dims) per_dim[std::string(dim_name(d))] = to_json(f);
    va[space.categories[c]] = per_dim;
  }
  j["va_stats"] = va;
  if (r.labels_per_image) {
    nlohmann::json lpi = nlohmann::json::object();
    for (const auto& [k, n] : *r.labels_per_image) lpi[std::to_string(k)] = n;
    j["labels_per_image"] = lpi;
  }
  nlohmann::json hist = nlohmann::json::object();
  std::vector<std::string> warnings = r.va.warnings;
  for (const auto& h : r.histograms) {
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& b : h.bins) bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
    hist[std::string(dim_name(h.dim))] = bins;
    warnings.insert(warnings.end(), h.warnings.begin(), h.warnings.end());
  }
  j["histograms"] = hist;
  j["warnings"] = warnings;
  return j;
}

inline std::string scatter_csv(const std::vector<ScatterPoint>& points, const LabelSpace& space) {
  std::string out = "category,valence,arousal\n";
  for (const auto& p : points) {
    out += csv::join_row({space.categories[p.category], csv::format_number(p.valence), csv::format_number(p.arousal)});
    out += '\n';
  }
  return out;
}

inline std::string histogram_csv(const ValueHistogram& h) {
  std::string out = "bin_lo,bin_hi,count\n";
  for (const auto& b : h.bins) {
    out += csv::format_number(b.lo) + "," + csv::format_number(b.hi) + "," + std::to_string(b.count) + "\n";
  }
  return out;
}

inline std::string category_csv(const CategoryHistogram& h, const LabelSpace& space) {
  std::string out = "category,count,relative,per_image\n";
  for (std::size_t c = 0; c < space.num_classes(); ++c) {
    out += csv::join_row({space.categories[c], std::to_string(h.counts.counts[c]), csv::format_number(h.per_occurrence[c]),
                          csv::format_number(h.per_image[c])});
    out += '\n';
  }
  return out;
}

}  // namespace affect::analysis

#endif  // AFFECT_ANALYSIS_HPP
