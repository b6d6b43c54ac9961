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
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "absl/status/status.h"
#include "detkit/imageops.h"
#include "internal/strings.h"

// Direct non-local means. Patch distances are computed on integer-scaled
// planes so they are exact regardless of summation order; the weighted
// averages then run offset by offset (dy outer, dx inner).

namespace detkit {
namespace {

using Int128 = __int128;

// Forward matrix scaled to integers: luma by 1e3, chroma by 1e6.
constexpr int64_t kLuma[3] = {299, 587, 114};
constexpr int64_t kCb[3] = {-168736, -331264, 500000};
constexpr int64_t kCr[3] = {500000, -418688, -81312};
constexpr double kLumaScale = 1e3;
constexpr double kChromaScale = 1e6;

using Matrix = std::array<std::array<double, 3>, 3>;

Matrix ForwardMatrix() {
  Matrix m;
  for (int c = 0; c < 3; ++c) {
    m[0][c] = kLuma[c] / kLumaScale;
    m[1][c] = kCb[c] / kChromaScale;
    m[2][c] = kCr[c] / kChromaScale;
  }
  return m;
}

Matrix Invert(const Matrix& m) {
  const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                     m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                     m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  Matrix inv;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
    }
  }
  return inv;
}

const Matrix& InverseMatrix() {
  static const Matrix inv = Invert(ForwardMatrix());
  return inv;
}

// Zero-weight cutoff: exp(-746) underflows even subnormal doubles.
constexpr double kMaxExponent = 746.0;

double Weight(double d2, double h) {
  const double e = d2 / (h * h);
  return e > kMaxExponent ? 0.0 : std::exp(-e);
}

}  // namespace

std::array<double, 3> RgbToYcc(double r, double g, double b) {
  static const Matrix m = ForwardMatrix();
  return {m[0][0] * r + m[0][1] * g + m[0][2] * b,
          m[1][0] * r + m[1][1] * g + m[1][2] * b,
          m[2][0] * r + m[2][1] * g + m[2][2] * b};
}

std::array<double, 3> YccToRgb(double y, double cb, double cr) {
  const Matrix& m = InverseMatrix();
  return {m[0][0] * y + m[0][1] * cb + m[0][2] * cr,
          m[1][0] * y + m[1][1] * cb + m[1][2] * cr,
          m[2][0] * y + m[2][1] * cb + m[2][2] * cr};
}

absl::StatusOr<Image> DenoiseNlm(const Image& image, const NlmParams& params) {
  const int t = params.template_size;
  const int s = params.search_size;
  if (t < 1 || t % 2 == 0 || s < 1 || s % 2 == 0) {
    return absl::InvalidArgumentError(fmt::sprintf(
        "template and search sizes must be odd and positive, got %d and %d", t,
        s));
  }
  if (t > s) {
    return absl::InvalidArgumentError(fmt::sprintf(
        "template size %d exceeds search size %d", t, s));
  }
  if (!(params.h > 0.0) || !(params.h_color > 0.0)) {
    return absl::InvalidArgumentError("filter strengths must be positive");
  }
  const int w = image.width();
  const int h = image.height();
  if (w == 0 || h == 0) return image;

  const int rt = t / 2;
  const int rs = s / 2;
  const int pad = rt + rs;
  const int pw = w + 2 * pad;
  const int ph = h + 2 * pad;

  // Padded integer planes.
  std::vector<int64_t> py(static_cast<size_t>(pw) * ph);
  std::vector<int64_t> pcb(py.size());
  std::vector<int64_t> pcr(py.size());
  for (int y = 0; y < ph; ++y) {
    const int sy = Reflect101(y - pad, h);
    for (int x = 0; x < pw; ++x) {
      const int sx = Reflect101(x - pad, w);
      int64_t rgb[3];
      for (int c = 0; c < 3; ++c) rgb[c] = image.at(sx, sy, c);
      const size_t i = static_cast<size_t>(y) * pw + x;
      py[i] = kLuma[0] * rgb[0] + kLuma[1] * rgb[1] + kLuma[2] * rgb[2];
      pcb[i] = kCb[0] * rgb[0] + kCb[1] * rgb[1] + kCb[2] * rgb[2];
      pcr[i] = kCr[0] * rgb[0] + kCr[1] * rgb[1] + kCr[2] * rgb[2];
    }
  }

  const size_t n = static_cast<size_t>(w) * h;
  std::vector<double> sum_w(n, 0.0), sum_wy(n, 0.0);
  std::vector<double> sum_wc(n, 0.0), sum_wcb(n, 0.0), sum_wcr(n, 0.0);

  // Integral images of squared differences over the template-padded region
  // [-rt, w + rt) x [-rt, h + rt), one extra leading row/column of zeros.
  const int iw = w + 2 * rt + 1;
  const int ih = h + 2 * rt + 1;
  std::vector<int64_t> int_y(static_cast<size_t>(iw) * ih, 0);
  std::vector<Int128> int_c(int_y.size(), 0);
  const double area = static_cast<double>(t) * t;
  const double luma_norm = area * kLumaScale * kLumaScale;
  const double chroma_norm = 2.0 * area * kChromaScale * kChromaScale;

  for (int dy = -rs; dy <= rs; ++dy) {
    for (int dx = -rs; dx <= rs; ++dx) {
      for (int y = 1; y < ih; ++y) {
        int64_t row_y = 0;
        Int128 row_c = 0;
        // Padded-plane row of template-region row y - 1.
        const int a_y = y - 1 - rt + pad;
        const int b_y = a_y + dy;
        for (int x = 1; x < iw; ++x) {
          const int a_x = x - 1 - rt + pad;
          const size_t a = static_cast<size_t>(a_y) * pw + a_x;
          const size_t b = static_cast<size_t>(b_y) * pw + a_x + dx;
          const int64_t ly = py[a] - py[b];
          const Int128 lcb = pcb[a] - pcb[b];
          const Int128 lcr = pcr[a] - pcr[b];
          row_y += ly * ly;
          row_c += lcb * lcb + lcr * lcr;
          const size_t i = static_cast<size_t>(y) * iw + x;
          int_y[i] = int_y[i - iw] + row_y;
          int_c[i] = int_c[i - iw] + row_c;
        }
      }
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          // Template around (x, y) spans region indices [x, x + t).
          const size_t tl = static_cast<size_t>(y) * iw + x;
          const size_t tr = tl + t;
          const size_t bl = tl + static_cast<size_t>(t) * iw;
          const size_t br = bl + t;
          const int64_t dist_y = int_y[br] - int_y[bl] - int_y[tr] + int_y[tl];
          const Int128 dist_c = int_c[br] - int_c[bl] - int_c[tr] + int_c[tl];
          const double wy = Weight(static_cast<double>(dist_y) / luma_norm,
                                   params.h);
          const double wc = Weight(static_cast<double>(dist_c) / chroma_norm,
                                   params.h_color);
          const size_t q = static_cast<size_t>(y + pad + dy) * pw + x + pad + dx;
          const size_t o = static_cast<size_t>(y) * w + x;
          sum_w[o] += wy;
          sum_wy[o] += wy * (py[q] / kLumaScale);
          sum_wc[o] += wc;
          sum_wcb[o] += wc * (pcb[q] / kChromaScale);
          sum_wcr[o] += wc * (pcr[q] / kChromaScale);
        }
      }
    }
  }

  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t o = static_cast<size_t>(y) * w + x;
      // The zero offset always contributes weight 1, so both sums are >= 1.
      const auto rgb = YccToRgb(sum_wy[o] / sum_w[o], sum_wcb[o] / sum_wc[o],
                                sum_wcr[o] / sum_wc[o]);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = QuantizeSample(rgb[c]);
    }
  }
  return out;
}

}  // namespace detkit
