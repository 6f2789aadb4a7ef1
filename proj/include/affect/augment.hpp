#ifndef AFFECT_AUGMENT_HPP
#define AFFECT_AUGMENT_HPP

// Training-time image augmentation on H×W×3 images with values in [0, 1].
// The pipeline order is fixed:
//   horizontal flip, grayscale, rotation, color jitter, perspective,
//   normalize, random erasing.
// Geometric warps sample bilinearly and fill with zero outside the source.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "affect/data.hpp"
#include "affect/error.hpp"

namespace affect::augment {

struct Image {
  Image() = default;
  Image(std::size_t h, std::size_t w, double fill = 0.0) : height(h), width(w), data(h * w * 3, fill) {}

  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;  // row-major, interleaved channels

  double& at(std::size_t y, std::size_t x, std::size_t c) { return data[(y * width + x) * 3 + c]; }
  double at(std::size_t y, std::size_t x, std::size_t c) const { return data[(y * width + x) * 3 + c]; }

  friend bool operator==(const Image&, const Image&) = default;
};

struct Params {
  double flip_p = 0.5;
  double grayscale_p = 0.01;
  double rotation_degrees = 10.0;
  double brightness = 0.2;
  double contrast = 0.2;
  double saturation = 0.2;
  double hue = 0.1;
  double perspective_distortion = 0.2;
  double perspective_p = 0.5;
  std::array<double, 3> mean{0.485, 0.456, 0.406};
  std::array<double, 3> std{0.229, 0.224, 0.225};
  double erase_p = 0.5;
  std::pair<double, double> erase_scale{0.02, 0.2};
  std::pair<double, double> erase_ratio{0.3, 3.3};
  int erase_attempts = 10;
};

using Rng = std::mt19937_64;

/// Independent generator per sample so parallel workers are order-free.
inline Rng sample_rng(std::uint64_t base_seed, std::string_view sample_id) {
  return Rng(detail::mix_seed(base_seed, sample_id));
}

inline void check_unit(const Image& img) {
  if (img.data.size() != img.height * img.width * 3) fail(ErrorKind::Shape, "image buffer does not match H×W×3");
  for (double v : img.data) {
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorKind::Range, "image value " + std::to_string(v) + " outside [0, 1]");
  }
}

namespace detail {

inline bool coin(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

inline double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Integer in [lo, hi).
inline long randint(Rng& rng, long lo, long hi) {
  if (hi <= lo + 1) return lo;
  return std::uniform_int_distribution<long>(lo, hi - 1)(rng);
}

inline double bilinear(const Image& img, double sx, double sy, std::size_t c) {
  if (sx < -1.0 || sy < -1.0 || sx > static_cast<double>(img.width) || sy > static_cast<double>(img.height)) return 0.0;
  const double fx = std::floor(sx), fy = std::floor(sy);
  const double ax = sx - fx, ay = sy - fy;
  auto px = [&](long y, long x) {
    if (x < 0 || y < 0 || x >= static_cast<long>(img.width) || y >= static_cast<long>(img.height)) return 0.0;
    return img.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x), c);
  };
  const long x0 = static_cast<long>(fx), y0 = static_cast<long>(fy);
  return (1 - ax) * (1 - ay) * px(y0, x0) + ax * (1 - ay) * px(y0, x0 + 1) + (1 - ax) * ay * px(y0 + 1, x0) +
         ax * ay * px(y0 + 1, x0 + 1);
}

// Resamples `img` where out(x, y) = img(map(x, y)).
template <class Map>
Image warp(const Image& img, Map map) {
  Image out(img.height, img.width);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) {
      const auto [sx, sy] = map(static_cast<double>(x), static_cast<double>(y));
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = bilinear(img, sx, sy, c);
    }
  }
  return out;
}

inline double luma(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Solves A x = b (n×n, row-major) by partial-pivot elimination.
inline std::vector<double> solve(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-15) fail(ErrorKind::Numeric, "singular perspective system");
    if (piv != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[piv * n + k]);
      std::swap(b[col], b[piv]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (std::size_t k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i * n + k] * x[k];
    x[i] = s / a[i * n + i];
  }
  return x;
}

}  // namespace detail

inline Image hflip(const Image& img) {
  Image out(img.height, img.width);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
  return out;
}

inline Image grayscale(const Image& img) {
  Image out(img.height, img.width);
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x) {
      const double l = detail::luma(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2));
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = l;
    }
  return out;
}

/// Counter-clockwise rotation by `degrees` about the image center.
inline Image rotate(const Image& img, double degrees) {
  const double rad = degrees * std::numbers::pi / 180.0;
  const double cx = (static_cast<double>(img.width) - 1.0) / 2.0;
  const double cy = (static_cast<double>(img.height) - 1.0) / 2.0;
  const double cs = std::cos(rad), sn = std::sin(rad);
  // Image rows grow downward, so a visual CCW turn is a CW turn in (x, y).
  return detail::warp(img, [&](double x, double y) {
    const double dx = x - cx, dy = y - cy;
    return std::pair{cs * dx - sn * dy + cx, sn * dx + cs * dy + cy};
  });
}

inline Image adjust_brightness(const Image& img, double factor) {
  Image out = img;
  for (double& v : out.data) v = detail::clamp01(v * factor);
  return out;
}

inline Image adjust_contrast(const Image& img, double factor) {
  double mean = 0.0;
  for (std::size_t i = 0; i < img.data.size(); i += 3) mean += detail::luma(img.data[i], img.data[i + 1], img.data[i + 2]);
  mean /= static_cast<double>(std::max<std::size_t>(1, img.height * img.width));
  Image out = img;
  for (double& v : out.data) v = detail::clamp01(factor * v + (1.0 - factor) * mean);
  return out;
}

inline Image adjust_saturation(const Image& img, double factor) {
  Image out = img;
  for (std::size_t i = 0; i < out.data.size(); i += 3) {
    const double l = detail::luma(img.data[i], img.data[i + 1], img.data[i + 2]);
    for (std::size_t c = 0; c < 3; ++c) out.data[i + c] = detail::clamp01(factor * img.data[i + c] + (1.0 - factor) * l);
  }
  return out;
}

/// Rotates hue by `shift` turns (shift in [-0.5, 0.5]).
inline Image adjust_hue(const Image& img, double shift) {
  Image out = img;
  for (std::size_t i = 0; i < out.data.size(); i += 3) {
    const double r = img.data[i], g = img.data[i + 1], b = img.data[i + 2];
    const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
    const double delta = mx - mn;
    double h = 0.0;
    if (delta > 0.0) {
      if (mx == r) h = std::fmod((g - b) / delta, 6.0);
      else if (mx == g) h = (b - r) / delta + 2.0;
      else h = (r - g) / delta + 4.0;
      h /= 6.0;
    }
    const double s = mx > 0.0 ? delta / mx : 0.0;
    const double v = mx;
    h = std::fmod(h + shift + 2.0, 1.0);
    const double hh = h * 6.0;
    const int sector = static_cast<int>(std::floor(hh)) % 6;
    const double f = hh - std::floor(hh);
    const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double rr = v, gg = t, bb = p;
    switch (sector) {
      case 0: rr = v; gg = t; bb = p; break;
      case 1: rr = q; gg = v; bb = p; break;
      case 2: rr = p; gg = v; bb = t; break;
      case 3: rr = p; gg = q; bb = v; break;
      case 4: rr = t; gg = p; bb = v; break;
      default: rr = v; gg = p; bb = q; break;
    }
    out.data[i] = detail::clamp01(rr);
    out.data[i + 1] = detail::clamp01(gg);
    out.data[i + 2] = detail::clamp01(bb);
  }
  return out;
}

/// Brightness, contrast and saturation factors from [max(0, 1-f), 1+f],
/// hue shift from [-hue, hue], applied in a random order.
inline Image color_jitter(const Image& img, Rng& rng, const Params& p) {
  std::array<int, 4> order{0, 1, 2, 3};
  std::shuffle(order.begin(), order.end(), rng);
  const double b = detail::uniform(rng, std::max(0.0, 1.0 - p.brightness), 1.0 + p.brightness);
  const double c = detail::uniform(rng, std::max(0.0, 1.0 - p.contrast), 1.0 + p.contrast);
  const double s = detail::uniform(rng, std::max(0.0, 1.0 - p.saturation), 1.0 + p.saturation);
  const double h = detail::uniform(rng, -p.hue, p.hue);
  Image out = img;
  for (int op : order) {
    switch (op) {
      case 0: out = adjust_brightness(out, b); break;
      case 1: out = adjust_contrast(out, c); break;
      case 2: out = adjust_saturation(out, s); break;
      default: out = adjust_hue(out, h); break;
    }
  }
  return out;
}

using Quad = std::array<std::pair<double, double>, 4>;

/// Warps so that source corners `start` land on `end` (x, y pairs).
inline Image perspective(const Image& img, const Quad& start, const Quad& end) {
  // Homography taking output (end) coordinates back to input (start).
  std::vector<double> a(64, 0.0), b(8, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto [x, y] = end[i];
    const auto [u, v] = start[i];
    const std::size_t r0 = 2 * i, r1 = 2 * i + 1;
    const double row0[8] = {x, y, 1, 0, 0, 0, -u * x, -u * y};
    const double row1[8] = {0, 0, 0, x, y, 1, -v * x, -v * y};
    std::copy(row0, row0 + 8, a.begin() + static_cast<std::ptrdiff_t>(r0 * 8));
    std::copy(row1, row1 + 8, a.begin() + static_cast<std::ptrdiff_t>(r1 * 8));
    b[r0] = u;
    b[r1] = v;
  }
  const auto h = detail::solve(std::move(a), std::move(b));
  return detail::warp(img, [&](double x, double y) {
    const double den = h[6] * x + h[7] * y + 1.0;
    return std::pair{(h[0] * x + h[1] * y + h[2]) / den, (h[3] * x + h[4] * y + h[5]) / den};
  });
}

/// Random corner displacement of up to `distortion` of the half extent.
inline std::pair<Quad, Quad> perspective_params(std::size_t height, std::size_t width, double distortion, Rng& rng) {
  const long w = static_cast<long>(width), h = static_cast<long>(height);
  const long dw = static_cast<long>(distortion * static_cast<double>(w / 2));
  const long dh = static_cast<long>(distortion * static_cast<double>(h / 2));
  auto ri = [&](long lo, long hi) { return static_cast<double>(detail::randint(rng, lo, hi)); };
  Quad end;
  end[0] = {ri(0, dw + 1), ri(0, dh + 1)};
  end[1] = {ri(w - dw - 1, w), ri(0, dh + 1)};
  end[2] = {ri(w - dw - 1, w), ri(h - dh - 1, h)};
  end[3] = {ri(0, dw + 1), ri(h - dh - 1, h)};
  const double wm = static_cast<double>(w - 1), hm = static_cast<double>(h - 1);
  Quad start{{{0.0, 0.0}, {wm, 0.0}, {wm, hm}, {0.0, hm}}};
  return {start, end};
}

/// Per channel (x - mean) / std.
inline Image normalize(const Image& img, const std::array<double, 3>& mean, const std::array<double, 3>& stdev) {
  Image out = img;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = (img.data[i] - mean[i % 3]) / stdev[i % 3];
  return out;
}

struct EraseBox {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};

/// Picks an erase rectangle; the realized (rounded) area fraction and aspect
/// ratio h/w both lie inside the configured ranges. nullopt when no attempt
/// fits.
inline std::optional<EraseBox> erase_params(std::size_t height, std::size_t width, const Params& p, Rng& rng) {
  const double area = static_cast<double>(height * width);
  const double log_lo = std::log(p.erase_ratio.first), log_hi = std::log(p.erase_ratio.second);
  for (int attempt = 0; attempt < p.erase_attempts; ++attempt) {
    const double target = area * detail::uniform(rng, p.erase_scale.first, p.erase_scale.second);
    const double aspect = std::exp(detail::uniform(rng, log_lo, log_hi));
    const auto eh = static_cast<std::size_t>(std::llround(std::sqrt(target * aspect)));
    const auto ew = static_cast<std::size_t>(std::llround(std::sqrt(target / aspect)));
    if (eh == 0 || ew == 0 || eh >= height || ew >= width) continue;
    const double frac = static_cast<double>(eh * ew) / area;
    const double ratio = static_cast<double>(eh) / static_cast<double>(ew);
    if (frac < p.erase_scale.first || frac > p.erase_scale.second) continue;
    if (ratio < p.erase_ratio.first || ratio > p.erase_ratio.second) continue;
    EraseBox box;
    box.height = eh;
    box.width = ew;
    box.top = static_cast<std::size_t>(detail::randint(rng, 0, static_cast<long>(height - eh + 1)));
    box.left = static_cast<std::size_t>(detail::randint(rng, 0, static_cast<long>(width - ew + 1)));
    return box;
  }
  return std::nullopt;
}

/// Fills a random rectangle with standard-normal noise with probability p.
inline std::pair<Image, std::optional<EraseBox>> random_erasing(const Image& img, const Params& p, Rng& rng) {
  if (!detail::coin(rng, p.erase_p)) return {img, std::nullopt};
  auto box = erase_params(img.height, img.width, p, rng);
  if (!box) return {img, std::nullopt};
  Image out = img;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t y = box->top; y < box->top + box->height; ++y)
    for (std::size_t x = box->left; x < box->left + box->width; ++x)
      for (std::size_t c = 0; c < 3; ++c) out.at(y, x, c) = normal(rng);
  return {out, box};
}

/// Full training pipeline. Output is normalized (not in [0, 1]).
inline Image augment(const Image& img, Rng& rng, const Params& p = {}) {
  check_unit(img);
  Image out = img;
  if (detail::coin(rng, p.flip_p)) out = hflip(out);
  if (detail::coin(rng, p.grayscale_p)) out = grayscale(out);
  out = rotate(out, detail::uniform(rng, -p.rotation_degrees, p.rotation_degrees));
  out = color_jitter(out, rng, p);
  if (detail::coin(rng, p.perspective_p)) {
    const auto [start, end] = perspective_params(out.height, out.width, p.perspective_distortion, rng);
    out = perspective(out, start, end);
  }
  out = normalize(out, p.mean, p.std);
  return random_erasing(out, p, rng).first;
}

}  // namespace affect::augment

#endif  // AFFECT_AUGMENT_HPP
