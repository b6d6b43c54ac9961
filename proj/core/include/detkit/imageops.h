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
#ifndef DETKIT_IMAGEOPS_H_
#define DETKIT_IMAGEOPS_H_

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "detkit/geometry.h"
#include "detkit/image.h"

// Raster augmentation and enhancement. Every operation keeps the image size,
// reads borders with Reflect101 (except resampling, which fills with black)
// and writes samples through QuantizeSample.

namespace detkit {

// --- Mixup -------------------------------------------------------------------

struct WeightedBox {
  Box box;
  double weight = 1.0;

  friend bool operator==(const WeightedBox&, const WeightedBox&) = default;
};

struct MixupResult {
  Image image;
  // boxes_a at weight lambda followed by boxes_b at weight 1 - lambda.
  std::vector<WeightedBox> boxes;
};

// Pixel-wise lambda * a + (1 - lambda) * b.
absl::StatusOr<MixupResult> Mixup(const Image& a, std::span<const Box> boxes_a,
                                  const Image& b, std::span<const Box> boxes_b,
                                  double lambda);

inline constexpr double kDefaultMixupAlpha = 1.5;

// Seeded stream of Beta(alpha, alpha) draws (ratio of two gamma variates).
class BetaSampler {
 public:
  static absl::StatusOr<BetaSampler> Create(double alpha, uint64_t seed);
  double Next();

 private:
  BetaSampler(double alpha, uint64_t seed);

  std::mt19937_64 rng_;
  std::gamma_distribution<double> gamma_;
};

// First draw of BetaSampler(alpha, seed).
absl::StatusOr<double> SampleMixupLambda(double alpha, uint64_t seed);

// --- Blurs -------------------------------------------------------------------

struct KernelTap {
  int dx = 0;
  int dy = 0;
  double weight = 0.0;
};

// Normalized one-pixel-wide line of `length` samples through the origin at
// `angle_degrees` (counter-clockwise on screen).
std::vector<KernelTap> MotionBlurKernel(int length, double angle_degrees);

absl::StatusOr<Image> MotionBlur(const Image& image, int length,
                                 double angle_degrees);

enum class BlurKind { kGaussian, kMedian };

// sigma = 0.3 * ((size - 1) / 2 - 1) + 0.8
double GaussianSigmaForSize(int size);
std::vector<double> GaussianKernel1d(int size);

// `size` must be odd and >= 3.
absl::StatusOr<Image> Blur(const Image& image, BlurKind kind, int size);

// --- Colour ------------------------------------------------------------------

struct RgbShift {
  double red = 0.0;
  double green = 0.0;
  double blue = 0.0;
};

// Hue in degrees (wraps around); saturation and value as fractions of full
// scale (clamped).
struct HsvShift {
  double hue = 0.0;
  double saturation = 0.0;
  double value = 0.0;
};

// p -> alpha * p + beta * 255
struct BrightnessContrast {
  double beta = 0.0;
  double alpha = 1.0;
};

using ColorAdjustment = std::variant<RgbShift, HsvShift, BrightnessContrast>;

Image ColorAdjust(const Image& image, const ColorAdjustment& adjustment);

struct Hsv {
  double h = 0.0;  // [0, 360)
  double s = 0.0;  // [0, 1]
  double v = 0.0;  // [0, 1]
};

// Hexcone model on [0, 1] RGB.
Hsv RgbToHsv(double r, double g, double b);
std::array<double, 3> HsvToRgb(const Hsv& hsv);

// --- Geometry ----------------------------------------------------------------

struct AffineResult {
  Image image;
  // Mapped, clipped boxes; boxes pushed fully outside the frame are dropped.
  std::vector<Box> boxes;
};

// `map` sends input pixel coordinates to output coordinates. Output pixels are
// bilinearly resampled from the inverse-mapped pixel centers; samples outside
// the source are black.
absl::StatusOr<AffineResult> FlipOrAffine(const Image& image,
                                          std::span<const Box> boxes,
                                          const AffineMap& map);

// --- Enhancement ---------------------------------------------------------------

inline constexpr double kDefaultShadesOfGrayNorm = 6.0;

// Shades-of-Gray colour constancy with Minkowski norm `p`. Channels whose
// illuminant estimate is zero keep a unit gain and do not enter the mean.
absl::StatusOr<Image> ShadesOfGray(const Image& image,
                                   double p = kDefaultShadesOfGrayNorm);

struct NlmParams {
  double h = 1.0;        // luminance filter strength
  double h_color = 1.0;  // chroma filter strength
  int template_size = 7;
  int search_size = 21;
};

// Luma/chroma matrix used by DenoiseNlm (BT.601 full range, no offsets).
std::array<double, 3> RgbToYcc(double r, double g, double b);
std::array<double, 3> YccToRgb(double y, double cb, double cr);

// Non-local means on a luma/chroma split. Candidate q in the search window
// around p gets weight exp(-d2 / h^2), where d2 is the mean squared difference
// of the template patches around p and q (luma for h, the two chroma planes
// for h_color).
absl::StatusOr<Image> DenoiseNlm(const Image& image, const NlmParams& params);

}  // namespace detkit

#endif  // DETKIT_IMAGEOPS_H_
