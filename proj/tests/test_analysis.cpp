#include <gtest/gtest.h>

#include <random>

#include "affect/analysis.hpp"

using namespace affect;
using namespace affect::analysis;

namespace {

AffectSample va_sample(std::string id, std::size_t label, double v, double a) {
  return {std::move(id), {}, {label}, {{Dim::Valence, v}, {Dim::Arousal, a}}};
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const AffectError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an AffectError";
  return ErrorKind::Io;
}

}  // namespace

TEST(CategoryHistogram, SingleLabelFrequencies) {
  LabelSpace s{"ab", {"a", "b"}, false, {}, ValueRange::UnitReal};
  std::vector<AffectSample> xs{{"1", {}, {0}, {}}, {"2", {}, {0}, {}}, {"3", {}, {1}, {}}};
  const auto h = category_histogram(xs, s);
  EXPECT_DOUBLE_EQ(h.per_occurrence[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(h.per_occurrence[1], 1.0 / 3.0);
  EXPECT_EQ(h.counts.counts, (std::vector<std::int64_t>{2, 1}));
  EXPECT_EQ(kind_of([&] { category_histogram(std::vector<AffectSample>{}, s); }), ErrorKind::EmptyDataset);
}

TEST(CategoryHistogram, MultiLabelPerImage) {
  LabelSpace s{"ab", {"a", "b"}, true, {}, ValueRange::UnitReal};
  std::vector<AffectSample> xs{{"1", {}, {0, 1}, {}}, {"2", {}, {0}, {}}};
  const auto h = category_histogram(xs, s);
  EXPECT_DOUBLE_EQ(h.per_image[0], 1.0);
  EXPECT_DOUBLE_EQ(h.per_image[1], 0.5);
  EXPECT_DOUBLE_EQ(h.per_occurrence[0], 2.0 / 3.0);
}

TEST(CategoryHistogram, BalancedSyntheticIsNearUniform) {
  const Manifest m = gen_synthetic(default_synthetic_spec(1), Split::Train, 8000);
  const auto h = category_histogram(m.records, m.space);
  double sum = 0;
  for (double f : h.per_occurrence) {
    EXPECT_NEAR(f, 0.125, 0.02);
    sum += f;
  }
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(FiveNumber, SingleValue) {
  const auto f = five_number({0.2});
  EXPECT_EQ(f.min, 0.2);
  EXPECT_EQ(f.q1, 0.2);
  EXPECT_EQ(f.median, 0.2);
  EXPECT_EQ(f.q3, 0.2);
  EXPECT_EQ(f.max, 0.2);
}

TEST(FiveNumber, InclusiveQuartiles) {
  const auto f = five_number({5, 3, 1, 4, 2});
  EXPECT_EQ(f.min, 1);
  EXPECT_EQ(f.q1, 2);
  EXPECT_EQ(f.median, 3);
  EXPECT_EQ(f.q3, 4);
  EXPECT_EQ(f.max, 5);
  // 4 values: positions 0.75, 1.5, 2.25
  const auto g = five_number({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(g.q1, 1.75);
  EXPECT_DOUBLE_EQ(g.median, 2.5);
  EXPECT_DOUBLE_EQ(g.q3, 3.25);
}

TEST(VaStatistics, OrderedQuartilesAndMissingCategoryWarning) {
  std::vector<AffectSample> xs{va_sample("a", 0, 0.2, 0.1), va_sample("b", 0, -0.4, 0.3), va_sample("c", 1, 0.9, -0.9)};
  const auto st = va_statistics(xs, affectnet8_space());
  EXPECT_EQ(st.per_category.size(), 2u);
  EXPECT_EQ(st.warnings.size(), 6u);
  for (const auto& [c, dims] : st.per_category) {
    for (const auto& [d, f] : dims) {
      EXPECT_LE(f.min, f.q1);
      EXPECT_LE(f.q1, f.median);
      EXPECT_LE(f.median, f.q3);
      EXPECT_LE(f.q3, f.max);
    }
  }
  EXPECT_DOUBLE_EQ(st.per_category.at(0).at(Dim::Valence).median, -0.1);
}

TEST(VaStatistics, SyntheticNeutralCenteredAtZero) {
  const Manifest m = gen_synthetic(default_synthetic_spec(2), Split::Train, 4000);
  const auto st = va_statistics(m.records, m.space);
  EXPECT_NEAR(st.per_category.at(0).at(Dim::Valence).median, 0.0, 0.05);
  EXPECT_NEAR(st.per_category.at(0).at(Dim::Arousal).median, 0.0, 0.05);
}

TEST(LabelsPerImage, Examples) {
  const auto space = emotic26_space();
  std::vector<AffectSample> xs{{"1", {}, {0}, {}}, {"2", {}, {0, 1}, {}}, {"3", {}, {0, 1, 2}, {}}};
  const auto h = labels_per_image_histogram(xs, space);
  EXPECT_EQ(h, (std::map<std::size_t, std::int64_t>{{1, 1}, {2, 1}, {3, 1}}));
  std::vector<AffectSample> singles(7, AffectSample{"x", {}, {4}, {}});
  EXPECT_EQ(labels_per_image_histogram(singles, space), (std::map<std::size_t, std::int64_t>{{1, 7}}));
  EXPECT_EQ(kind_of([&] { labels_per_image_histogram(xs, affectnet8_space()); }), ErrorKind::UnsupportedSpace);
}

TEST(ValueHistogram, HalfOpenBinsFinalClosed) {
  std::vector<AffectSample> xs{va_sample("a", 0, -1, 0), va_sample("b", 0, 0, 0), va_sample("c", 0, 1, 0)};
  const auto h = value_histogram(xs, affectnet8_space(), Dim::Valence, 2);
  ASSERT_EQ(h.bins.size(), 2u);
  // [-1, 0) holds -1; [0, 1] holds 0 and 1
  EXPECT_EQ(h.bins[0].count, 1);
  EXPECT_EQ(h.bins[1].count, 2);
  EXPECT_EQ(h.bins[0].hi, 0.0);
  EXPECT_EQ(h.bins[1].hi, 1.0);
}

TEST(ValueHistogram, EmptyColumnAndErrors) {
  std::vector<AffectSample> xs{{"a", {}, {0}, {{Dim::Valence, 0.1}}}};
  const auto h = value_histogram(xs, affectnet8_space(), Dim::Arousal, 4);
  for (const auto& b : h.bins) EXPECT_EQ(b.count, 0);
  EXPECT_EQ(h.warnings.size(), 1u);
  EXPECT_EQ(kind_of([&] { value_histogram(xs, affectnet8_space(), Dim::Dominance, 4); }), ErrorKind::Dimension);
  EXPECT_EQ(kind_of([&] { value_histogram(xs, affectnet8_space(), Dim::Valence, 1); }), ErrorKind::Argument);
}

TEST(ValueHistogram, UniformValenceFillsBinsEvenly) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<AffectSample> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(va_sample(std::to_string(i), 0, u(rng), 0.0));
  const auto h = value_histogram(xs, affectnet8_space(), Dim::Valence, 10);
  std::int64_t total = 0;
  for (const auto& b : h.bins) {
    EXPECT_NEAR(static_cast<double>(b.count), 1000.0, 100.0);
    total += b.count;
  }
  EXPECT_EQ(total, 10000);
}

TEST(ValueHistogram, TenIntRange) {
  std::vector<AffectSample> xs{{"a", {}, {0}, {{Dim::Valence, 1}, {Dim::Arousal, 10}, {Dim::Dominance, 5}}}};
  const auto h = value_histogram(xs, emotic26_space(), Dim::Arousal, 3);
  EXPECT_EQ(h.bins.front().lo, 1.0);
  EXPECT_EQ(h.bins.back().hi, 10.0);
  EXPECT_EQ(h.bins.back().count, 1);
}

TEST(CategoryCounts, MergeIsAssociativeAndOrderFree) {
  const Manifest m = gen_synthetic(default_synthetic_spec(4), Split::Train, 900);
  const std::span<const AffectSample> all(m.records);
  const auto a = count_categories(all.subspan(0, 300), m.space);
  const auto b = count_categories(all.subspan(300, 250), m.space);
  const auto c = count_categories(all.subspan(550), m.space);
  const auto whole = count_categories(all, m.space);
  const auto left = merge(merge(a, b), c), right = merge(a, merge(b, c)), swapped = merge(c, merge(b, a));
  EXPECT_EQ(left.counts, whole.counts);
  EXPECT_EQ(right.counts, whole.counts);
  EXPECT_EQ(swapped.counts, whole.counts);
  EXPECT_EQ(left.images, 900);
}

TEST(Analyze, DeterministicReport) {
  const Manifest m = gen_synthetic(default_synthetic_spec(6), Split::Validation, 500);
  const std::string a = to_json(analyze(m), m.space).dump(), b = to_json(analyze(m), m.space).dump();
  EXPECT_EQ(a, b);
  const auto r = analyze(m, 10);
  EXPECT_EQ(r.split_name, "validation");
  EXPECT_EQ(r.histograms.size(), 2u);
  EXPECT_FALSE(r.labels_per_image.has_value());
  const std::string csv = histogram_csv(r.histograms[0]);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "bin_lo,bin_hi,count");
  const std::string sc = scatter_csv(scatter_points(m.records, m.space, 20), m.space);
  EXPECT_EQ(std::count(sc.begin(), sc.end(), '\n'), 21);
}
