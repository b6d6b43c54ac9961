// Copyright 2026 The detkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#include "detkit/imageops.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "absl/status/status.h"
#include "detkit/internal/status_macros.h"
#include "internal/strings.h"

namespace detkit {
namespace {

constexpr int kC = Image::kChannels;

}  // namespace

// --- Mixup -------------------------------------------------------------------

absl::StatusOr<MixupResult> Mixup(const Image& a, std::span<const Box> boxes_a,
                                  const Image& b, std::span<const Box> boxes_b,
                                  double lambda) {
  if (!a.SameShape(b)) {
    return absl::InvalidArgumentError(
        fmt::sprintf("mixup needs equal sizes, got %dx%d and %dx%d",
                        a.width(), a.height(), b.width(), b.height()));
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    return absl::InvalidArgumentError(
        fmt::sprintf("mixup lambda %g outside [0, 1]", lambda));
  }
  MixupResult result{Image(a.width(), a.height()), {}};
  const auto pa = a.samples();
  const auto pb = b.samples();
  auto out = result.image.mutable_samples();
  const double mu = 1.0 - lambda;
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = QuantizeSample(lambda * pa[i] + mu * pb[i]);
  }
  result.boxes.reserve(boxes_a.size() + boxes_b.size());
  for (const Box& box : boxes_a) result.boxes.push_back({box, lambda});
  for (const Box& box : boxes_b) result.boxes.push_back({box, mu});
  return result;
}

BetaSampler::BetaSampler(double alpha, uint64_t seed)
    : rng_(seed), gamma_(alpha, 1.0) {}

absl::StatusOr<BetaSampler> BetaSampler::Create(double alpha, uint64_t seed) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    return absl::InvalidArgumentError(
        fmt::sprintf("beta shape must be positive, got %g", alpha));
  }
  return BetaSampler(alpha, seed);
}

double BetaSampler::Next() {
  // X / (X + Y) with X, Y ~ Gamma(alpha, 1). Both zero only under underflow
  // for tiny alpha; fall back to the distribution's mean.
  const double x = gamma_(rng_);
  const double y = gamma_(rng_);
  const double sum = x + y;
  if (!(sum > 0.0)) return 0.5;
  return std::clamp(x / sum, 0.0, 1.0);
}

absl::StatusOr<double> SampleMixupLambda(double alpha, uint64_t seed) {
  DETKIT_ASSIGN_OR_RETURN(BetaSampler sampler, BetaSampler::Create(alpha, seed));
  return sampler.Next();
}

// --- Blurs -------------------------------------------------------------------

std::vector<KernelTap> MotionBlurKernel(int length, double angle_degrees) {
  if (length < 1) return {};
  const auto [c, s] = CosSinDegrees(angle_degrees);
  std::map<std::pair<int, int>, int> counts;  // (dy, dx) -> hits
  const double half = (length - 1) / 2.0;
  for (int i = 0; i < length; ++i) {
    const double t = i - half;
    const int dx = static_cast<int>(std::floor(t * c + 0.5));
    const int dy = static_cast<int>(std::floor(-t * s + 0.5));
    ++counts[{dy, dx}];
  }
  std::vector<KernelTap> taps;
  taps.reserve(counts.size());
  for (const auto& [offset, n] : counts) {
    taps.push_back({offset.second, offset.first,
                    static_cast<double>(n) / length});
  }
  return taps;
}

absl::StatusOr<Image> MotionBlur(const Image& image, int length,
                                 double angle_degrees) {
  if (length < 1) {
    return absl::InvalidArgumentError(
        fmt::sprintf("motion blur length must be >= 1, got %d", length));
  }
  const std::vector<KernelTap> taps = MotionBlurKernel(length, angle_degrees);
  const int w = image.width();
  const int h = image.height();
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc[kC] = {0.0, 0.0, 0.0};
      for (const KernelTap& tap : taps) {
        const int sx = Reflect101(x + tap.dx, w);
        const int sy = Reflect101(y + tap.dy, h);
        for (int c = 0; c < kC; ++c) acc[c] += tap.weight * image.at(sx, sy, c);
      }
      for (int c = 0; c < kC; ++c) out.at(x, y, c) = QuantizeSample(acc[c]);
    }
  }
  return out;
}

double GaussianSigmaForSize(int size) {
  return 0.3 * ((size - 1) * 0.5 - 1.0) + 0.8;
}

std::vector<double> GaussianKernel1d(int size) {
  if (size < 1) return {};
  const double sigma = GaussianSigmaForSize(size);
  const int r = size / 2;
  std::vector<double> k(size);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - r;
    k[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

namespace {

Image GaussianBlur(const Image& image, int size) {
  const std::vector<double> k = GaussianKernel1d(size);
  const int r = size / 2;
  const int w = image.width();
  const int h = image.height();
  std::vector<double> tmp(static_cast<size_t>(w) * h * kC);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < kC; ++c) {
        double acc = 0.0;
        for (int i = 0; i < size; ++i) {
          acc += k[i] * image.at(Reflect101(x + i - r, w), y, c);
        }
        tmp[(static_cast<size_t>(y) * w + x) * kC + c] = acc;
      }
    }
  }
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < kC; ++c) {
        double acc = 0.0;
        for (int i = 0; i < size; ++i) {
          const int sy = Reflect101(y + i - r, h);
          acc += k[i] * tmp[(static_cast<size_t>(sy) * w + x) * kC + c];
        }
        out.at(x, y, c) = QuantizeSample(acc);
      }
    }
  }
  return out;
}

Image MedianBlur(const Image& image, int size) {
  const int r = size / 2;
  const int w = image.width();
  const int h = image.height();
  Image out(w, h);
  std::vector<uint8_t> window(static_cast<size_t>(size) * size);
  const size_t mid = window.size() / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < kC; ++c) {
        size_t n = 0;
        for (int dy = -r; dy <= r; ++dy) {
          const int sy = Reflect101(y + dy, h);
          for (int dx = -r; dx <= r; ++dx) {
            window[n++] = image.at(Reflect101(x + dx, w), sy, c);
          }
        }
        std::nth_element(window.begin(), window.begin() + mid, window.end());
        out.at(x, y, c) = window[mid];
      }
    }
  }
  return out;
}

}  // namespace

absl::StatusOr<Image> Blur(const Image& image, BlurKind kind, int size) {
  if (size < 3 || size % 2 == 0) {
    return absl::InvalidArgumentError(
        fmt::sprintf("blur size must be odd and >= 3, got %d", size));
  }
  return kind == BlurKind::kGaussian ? GaussianBlur(image, size)
                                     : MedianBlur(image, size);
}

// --- Colour ------------------------------------------------------------------

Hsv RgbToHsv(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv hsv;
  hsv.v = mx;
  hsv.s = mx > 0.0 ? delta / mx : 0.0;
  if (delta > 0.0) {
    double h;
    if (mx == r) {
      h = (g - b) / delta;
    } else if (mx == g) {
      h = 2.0 + (b - r) / delta;
    } else {
      h = 4.0 + (r - g) / delta;
    }
    h *= 60.0;
    if (h < 0.0) h += 360.0;
    hsv.h = h >= 360.0 ? h - 360.0 : h;
  }
  return hsv;
}

std::array<double, 3> HsvToRgb(const Hsv& hsv) {
  const double v = hsv.v;
  if (hsv.s <= 0.0) return {v, v, v};
  double h = std::fmod(hsv.h, 360.0);
  if (h < 0.0) h += 360.0;
  h /= 60.0;
  const int sector = std::min(5, static_cast<int>(h));
  const double f = h - sector;
  const double p = v * (1.0 - hsv.s);
  const double q = v * (1.0 - hsv.s * f);
  const double t = v * (1.0 - hsv.s * (1.0 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

namespace {

struct ColorPixelFn {
  std::array<double, 3> operator()(const RgbShift& s,
                                   const std::array<double, 3>& p) const {
    return {p[0] + s.red, p[1] + s.green, p[2] + s.blue};
  }
  std::array<double, 3> operator()(const HsvShift& s,
                                   const std::array<double, 3>& p) const {
    Hsv hsv = RgbToHsv(p[0] / 255.0, p[1] / 255.0, p[2] / 255.0);
    hsv.h = std::fmod(hsv.h + s.hue, 360.0);
    if (hsv.h < 0.0) hsv.h += 360.0;
    hsv.s = std::clamp(hsv.s + s.saturation, 0.0, 1.0);
    hsv.v = std::clamp(hsv.v + s.value, 0.0, 1.0);
    const auto rgb = HsvToRgb(hsv);
    return {rgb[0] * 255.0, rgb[1] * 255.0, rgb[2] * 255.0};
  }
  std::array<double, 3> operator()(const BrightnessContrast& s,
                                   const std::array<double, 3>& p) const {
    const double beta = s.beta * 255.0;
    return {s.alpha * p[0] + beta, s.alpha * p[1] + beta,
            s.alpha * p[2] + beta};
  }
};

}  // namespace

Image ColorAdjust(const Image& image, const ColorAdjustment& adjustment) {
  Image out = image;
  auto px = out.mutable_samples();
  for (size_t i = 0; i + 2 < px.size(); i += kC) {
    const std::array<double, 3> in = {static_cast<double>(px[i]),
                                      static_cast<double>(px[i + 1]),
                                      static_cast<double>(px[i + 2])};
    const auto res = std::visit(
        [&](const auto& adj) { return ColorPixelFn{}(adj, in); }, adjustment);
    for (int c = 0; c < kC; ++c) px[i + c] = QuantizeSample(res[c]);
  }
  return out;
}

// --- Geometry ----------------------------------------------------------------

absl::StatusOr<AffineResult> FlipOrAffine(const Image& image,
                                          std::span<const Box> boxes,
                                          const AffineMap& map) {
  DETKIT_ASSIGN_OR_RETURN(const AffineMap inverse, map.Inverse());
  const int w = image.width();
  const int h = image.height();
  AffineResult result{Image(w, h), {}};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto [sx, sy] = inverse.Apply(x + 0.5, y + 0.5);
      // Back to sample-index space, where sample i sits at i + 0.5.
      const double u = sx - 0.5;
      const double v = sy - 0.5;
      const double fu = std::floor(u);
      const double fv = std::floor(v);
      if (!std::isfinite(fu) || !std::isfinite(fv) || fu < -2.0 ||
          fv < -2.0 || fu > w + 1.0 || fv > h + 1.0) {
        continue;  // black
      }
      const int x0 = static_cast<int>(fu);
      const int y0 = static_cast<int>(fv);
      const double ax = u - fu;
      const double ay = v - fv;
      const double wx[2] = {1.0 - ax, ax};
      const double wy[2] = {1.0 - ay, ay};
      double acc[kC] = {0.0, 0.0, 0.0};
      for (int j = 0; j < 2; ++j) {
        if (wy[j] == 0.0) continue;
        const int py = y0 + j;
        if (py < 0 || py >= h) continue;
        for (int i = 0; i < 2; ++i) {
          if (wx[i] == 0.0) continue;
          const int px = x0 + i;
          if (px < 0 || px >= w) continue;
          const double wt = wx[i] * wy[j];
          for (int c = 0; c < kC; ++c) acc[c] += wt * image.at(px, py, c);
        }
      }
      for (int c = 0; c < kC; ++c) {
        result.image.at(x, y, c) = QuantizeSample(acc[c]);
      }
    }
  }
  for (const Box& box : boxes) {
    absl::StatusOr<Box> mapped = TransformBox(box, map);
    if (!mapped.ok()) continue;
    absl::StatusOr<Box> clipped = Clip(*mapped, w, h);
    if (clipped.ok()) result.boxes.push_back(*clipped);
  }
  return result;
}

// --- Enhancement ---------------------------------------------------------------

absl::StatusOr<Image> ShadesOfGray(const Image& image, double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    return absl::InvalidArgumentError(
        fmt::sprintf("Minkowski norm must be >= 1, got %g", p));
  }
  const auto px = image.samples();
  const size_t pixels = px.size() / kC;
  if (pixels == 0) return image;
  double e[kC];
  for (int c = 0; c < kC; ++c) {
    double acc = 0.0;
    for (size_t i = 0; i < pixels; ++i) {
      acc += std::pow(px[i * kC + c] / 255.0, p);
    }
    e[c] = std::pow(acc / static_cast<double>(pixels), 1.0 / p);
  }
  double mean = 0.0;
  int lit = 0;
  for (int c = 0; c < kC; ++c) {
    if (e[c] > 0.0) {
      mean += e[c];
      ++lit;
    }
  }
  if (lit == 0) return image;
  mean /= lit;
  double gain[kC];
  for (int c = 0; c < kC; ++c) gain[c] = e[c] > 0.0 ? mean / e[c] : 1.0;
  Image out = image;
  auto o = out.mutable_samples();
  for (size_t i = 0; i < pixels; ++i) {
    for (int c = 0; c < kC; ++c) {
      o[i * kC + c] = QuantizeSample(px[i * kC + c] * gain[c]);
    }
  }
  return out;
}

}  // namespace detkit
