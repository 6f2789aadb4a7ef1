#include <gtest/gtest.h>

#include <random>

#include "affect/augment.hpp"

using namespace affect;
using namespace affect::augment;

namespace {

Image random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(h, w);
  for (double& v : img.data) v = u(rng);
  return img;
}

}  // namespace

TEST(Normalize, BitExactFormula) {
  Image img(1, 1);
  img.at(0, 0, 0) = 0.485;
  img.at(0, 0, 1) = 0.456;
  img.at(0, 0, 2) = 0.406;
  const Params p;
  const Image n = normalize(img, p.mean, p.std);
  EXPECT_EQ(n.at(0, 0, 0), 0.0);
  EXPECT_EQ(n.at(0, 0, 1), 0.0);
  EXPECT_EQ(n.at(0, 0, 2), 0.0);
  const Image r = random_image(5, 7, 1);
  const Image rn = normalize(r, p.mean, p.std);
  for (std::size_t i = 0; i < r.data.size(); ++i) EXPECT_EQ(rn.data[i], (r.data[i] - p.mean[i % 3]) / p.std[i % 3]);
}

TEST(HorizontalFlip, InvolutionAndMirror) {
  const Image img = random_image(4, 6, 2);
  EXPECT_EQ(hflip(hflip(img)), img);
  EXPECT_EQ(hflip(img).at(1, 0, 2), img.at(1, 5, 2));
}

TEST(RandomErasing, ForcedDrawsStayInRange) {
  Params p;
  p.erase_p = 1.0;
  Rng rng(77);
  const Image img = random_image(32, 48, 3);
  int erased = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto [out, box] = random_erasing(img, p, rng);
    if (!box) continue;
    ++erased;
    const double frac = static_cast<double>(box->height * box->width) / (32.0 * 48.0);
    const double ratio = static_cast<double>(box->height) / static_cast<double>(box->width);
    EXPECT_GE(frac, 0.02);
    EXPECT_LE(frac, 0.2);
    EXPECT_GE(ratio, 0.3);
    EXPECT_LE(ratio, 3.3);
    EXPECT_LE(box->top + box->height, 32u);
    EXPECT_LE(box->left + box->width, 48u);
    // exactly the box changes
    std::size_t changed = 0;
    for (std::size_t k = 0; k < img.data.size(); ++k) changed += out.data[k] != img.data[k];
    EXPECT_EQ(changed, box->height * box->width * 3);
  }
  EXPECT_GT(erased, 950);
}

TEST(RandomErasing, ProbabilityZeroIsIdentity) {
  Params p;
  p.erase_p = 0.0;
  Rng rng(1);
  const Image img = random_image(8, 8, 4);
  const auto [out, box] = random_erasing(img, p, rng);
  EXPECT_FALSE(box.has_value());
  EXPECT_EQ(out, img);
}

TEST(Rotation, ZeroDegreesIsIdentity) {
  const Image img = random_image(6, 5, 5);
  const Image r = rotate(img, 0.0);
  for (std::size_t i = 0; i < img.data.size(); ++i) EXPECT_NEAR(r.data[i], img.data[i], 1e-12);
}

TEST(ColorOps, UnitFactorsAreIdentity) {
  const Image img = random_image(5, 5, 6);
  EXPECT_EQ(adjust_brightness(img, 1.0), img);
  const Image c = adjust_contrast(img, 1.0);
  for (std::size_t i = 0; i < img.data.size(); ++i) EXPECT_NEAR(c.data[i], img.data[i], 1e-12);
  const Image s = adjust_saturation(img, 1.0);
  for (std::size_t i = 0; i < img.data.size(); ++i) EXPECT_NEAR(s.data[i], img.data[i], 1e-12);
  const Image g = grayscale(img);
  EXPECT_EQ(g.at(2, 3, 0), g.at(2, 3, 1));
  EXPECT_EQ(g.at(2, 3, 1), g.at(2, 3, 2));
}

TEST(Pipeline, ReproduciblePerSeed) {
  const Image img = random_image(24, 24, 7);
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    Rng a = sample_rng(seed, "img_001"), b = sample_rng(seed, "img_001");
    EXPECT_EQ(augment::augment(img, a), augment::augment(img, b));
  }
  Rng a = sample_rng(1, "img_001"), b = sample_rng(1, "img_002");
  EXPECT_NE(augment::augment(img, a), augment::augment(img, b));
}

TEST(Pipeline, RejectsOutOfRangeInput) {
  Image img = random_image(4, 4, 8);
  img.at(1, 1, 1) = 1.2;
  Rng rng(0);
  try {
    augment::augment(img, rng);
    FAIL();
  } catch (const AffectError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Range);
  }
}
