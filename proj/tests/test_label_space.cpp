#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "affect/label_space.hpp"
#include "reference_data.hpp"

using namespace affect;

namespace {

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

TEST(ScaleToUnit, TenIntEndpointsAndMidpoint) {
  EXPECT_DOUBLE_EQ(scale_to_unit(1, ValueRange::TenInt), -1.0);
  EXPECT_DOUBLE_EQ(scale_to_unit(10, ValueRange::TenInt), 1.0);
  EXPECT_DOUBLE_EQ(scale_to_unit(5.5, ValueRange::TenInt), 0.0);
}

TEST(ScaleToUnit, UnitRealIsIdentity) {
  for (double v : {-1.0, -0.3, 0.0, 0.77, 1.0}) EXPECT_EQ(scale_to_unit(v, ValueRange::UnitReal), v);
}

TEST(ScaleToUnit, OutOfRangeNamesDimension) {
  try {
    scale_to_unit(11, ValueRange::TenInt, Dim::Arousal);
    FAIL();
  } catch (const AffectError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Range);
    EXPECT_NE(std::string(e.what()).find("arousal"), std::string::npos);
  }
  EXPECT_EQ(kind_of([] { scale_to_unit(1.5, ValueRange::UnitReal); }), ErrorKind::Range);
  EXPECT_EQ(kind_of([] { scale_to_unit(NAN, ValueRange::UnitReal); }), ErrorKind::Range);
}

TEST(ScaleFromUnit, Examples) {
  EXPECT_DOUBLE_EQ(scale_from_unit(-1.0, ValueRange::TenInt), 1.0);
  EXPECT_DOUBLE_EQ(scale_from_unit(0.0, ValueRange::TenInt), 5.5);
  EXPECT_DOUBLE_EQ(scale_from_unit(scale_to_unit(7, ValueRange::TenInt), ValueRange::TenInt), 7.0);
  EXPECT_EQ(kind_of([] { scale_from_unit(1.01, ValueRange::TenInt); }), ErrorKind::Range);
}

TEST(ScaleToUnit, RoundTripAndOrderOnAllTenIntValues) {
  for (int v = 1; v <= 10; ++v) {
    EXPECT_NEAR(scale_from_unit(scale_to_unit(v, ValueRange::TenInt), ValueRange::TenInt), v, 1e-12);
    if (v > 1) {
      EXPECT_LT(scale_to_unit(v - 1, ValueRange::TenInt), scale_to_unit(v, ValueRange::TenInt));
    }
  }
}

TEST(ScaleToUnit, DifferencesShrinkByTwoNinths) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(1, 10);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), b = u(rng);
    const double d = scale_to_unit(a, ValueRange::TenInt) - scale_to_unit(b, ValueRange::TenInt);
    EXPECT_NEAR(d, (a - b) * 2.0 / 9.0, 1e-14);
  }
}

TEST(ClassWeights, HandExamples) {
  const std::vector<std::int64_t> even{100, 100};
  const auto w = compute_class_weights(even).weights;
  EXPECT_DOUBLE_EQ(w[0], 0.5);
  EXPECT_DOUBLE_EQ(w[1], 0.5);
  const std::vector<std::int64_t> skew{100, 300};
  const auto s = compute_class_weights(skew);
  EXPECT_NEAR(s.weights[0], 0.75, 1e-15);
  EXPECT_NEAR(s.weights[1], 0.25, 1e-15);
  EXPECT_EQ(s.source_counts, skew);
}

TEST(ClassWeights, ZeroCountIsDegenerate) {
  const std::vector<std::int64_t> c{10, 0, 3};
  EXPECT_EQ(kind_of([&] { compute_class_weights(c); }), ErrorKind::DegenerateClass);
}

TEST(ClassWeights, SumToOneAndReverseCountOrder) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> u(1, 100000);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::int64_t> c(8);
    for (auto& v : c) v = u(rng);
    const auto w = compute_class_weights(c).weights;
    double sum = 0;
    for (double x : w) sum += x;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j)
        if (c[i] < c[j]) {
          EXPECT_GT(w[i], w[j]);
        }
  }
}

TEST(ClassWeights, AffectNetSevenClassColumnReproduced) {
  const std::vector<std::int64_t> seven(reference::kAffectNetTrainCounts.begin(), reference::kAffectNetTrainCounts.begin() + 7);
  const auto w = compute_class_weights(seven).weights;
  for (std::size_t i = 0; i < 7; ++i) EXPECT_NEAR(w[i], reference::kPublishedWeights7[i], 5e-7) << "class " << i;
}

TEST(ClassWeights, AffectNetEightClassOrderMatchesPublished) {
  const auto w = compute_class_weights(reference::kAffectNetTrainCounts).weights;
  // Happiness is the most frequent class and contempt the rarest, so they
  // bound the weights from below and above.
  EXPECT_EQ(std::min_element(w.begin(), w.end()) - w.begin(), 1);
  EXPECT_EQ(std::max_element(w.begin(), w.end()) - w.begin(), 7);
  EXPECT_NEAR(w[1], reference::kPublishedWeights8[1], 1e-4);
}

TEST(PosWeights, Examples) {
  EXPECT_EQ(compute_pos_weights(std::vector<std::int64_t>{10}, 100), std::vector<double>{10.0});
  EXPECT_EQ(compute_pos_weights(std::vector<std::int64_t>{100}, 100), std::vector<double>{1.0});
  EXPECT_EQ(compute_pos_weights(std::vector<std::int64_t>{25, 50}, 100), (std::vector<double>{4.0, 2.0}));
  EXPECT_EQ(kind_of([] { compute_pos_weights(std::vector<std::int64_t>{0}, 100); }), ErrorKind::DegenerateClass);
  EXPECT_EQ(kind_of([] { compute_pos_weights(std::vector<std::int64_t>{101}, 100); }), ErrorKind::Argument);
}

TEST(PosWeights, AtLeastOneAndAntitoneInCount) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> u(1, 1000);
  std::vector<std::int64_t> c(26);
  for (auto& v : c) v = u(rng);
  const auto p = compute_pos_weights(c, 1000);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_GE(p[i], 1.0);
    for (std::size_t j = 0; j < c.size(); ++j)
      if (c[i] < c[j]) {
        EXPECT_GT(p[i], p[j]);
      }
  }
}

TEST(LabelSpace, Presets) {
  const auto a8 = affectnet8_space();
  EXPECT_EQ(a8.num_classes(), 8u);
  EXPECT_EQ(a8.categories[7], "contempt");
  EXPECT_FALSE(a8.multi_label);
  EXPECT_EQ(a8.num_dims(), 2u);
  const auto a7 = affectnet7_space();
  EXPECT_EQ(a7.num_classes(), 7u);
  EXPECT_FALSE(a7.category_index("contempt").has_value());
  const auto e = emotic26_space();
  EXPECT_EQ(e.num_classes(), 26u);
  EXPECT_TRUE(e.multi_label);
  EXPECT_EQ(e.num_dims(), 3u);
  EXPECT_EQ(e.value_range, ValueRange::TenInt);
  EXPECT_TRUE(e.category_index("engagement").has_value());
  for (const auto& n : preset_space_names()) EXPECT_NO_THROW(space_by_name(n).check());
  EXPECT_EQ(kind_of([] { space_by_name("fer2013"); }), ErrorKind::Space);
}

TEST(LabelSpace, CheckRejectsDuplicates) {
  LabelSpace s{"dup", {"a", "a"}, false, {Dim::Valence}, ValueRange::UnitReal};
  EXPECT_EQ(kind_of([&] { s.check(); }), ErrorKind::Spec);
}

TEST(ValidateSample, ValidSingleLabel) {
  AffectSample s{"x", {}, {3}, {{Dim::Valence, 0.2}, {Dim::Arousal, -0.1}}};
  EXPECT_TRUE(validate_sample(s, affectnet8_space()).empty());
}

TEST(ValidateSample, ValenceOutOfUnitRange) {
  AffectSample s{"x", {}, {0}, {{Dim::Valence, 1.5}, {Dim::Arousal, 0.0}}};
  const auto v = validate_sample(s, affectnet8_space());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "valence");
}

TEST(ValidateSample, TwoLabelsAndBadArousalGiveTwoViolations) {
  AffectSample s{"x", {}, {0, 1}, {{Dim::Valence, 0.0}, {Dim::Arousal, -2.0}}};
  const auto v = validate_sample(s, affectnet8_space());
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].field, "labels");
  EXPECT_EQ(v[1].field, "arousal");
}

TEST(ValidateSample, TenIntMustBeInteger) {
  AffectSample s{"x", {}, {0, 4}, {{Dim::Valence, 7.5}, {Dim::Arousal, 3}, {Dim::Dominance, 5}}};
  const auto v = validate_sample(s, emotic26_space());
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].field, "valence");
}

TEST(ValidateSample, MissingAndUndeclaredDims) {
  AffectSample s{"x", {}, {9}, {{Dim::Valence, 0.0}, {Dim::Dominance, 0.0}}};
  const auto v = validate_sample(s, affectnet8_space());
  // label 9 >= 8, arousal missing, dominance undeclared
  EXPECT_EQ(v.size(), 3u);
}

TEST(CountLabels, MultiLabelCountsEachLabel) {
  std::vector<AffectSample> s{{"a", {}, {0, 1}, {}}, {"b", {}, {0}, {}}};
  EXPECT_EQ(count_labels(s, 3), (std::vector<std::int64_t>{2, 1, 0}));
  std::vector<AffectSample> bad{{"c", {}, {5}, {}}};
  EXPECT_EQ(kind_of([&] { count_labels(bad, 3); }), ErrorKind::Label);
}
