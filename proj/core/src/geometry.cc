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
#include "detkit/geometry.h"
#include "internal/strings.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <utility>


namespace detkit {
namespace {

constexpr double kBoundsTolerance = 1e-6;

bool AllFinite(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace

std::pair<double, double> CosSinDegrees(double degrees) {
  double reduced = std::fmod(degrees, 360.0);
  if (reduced < 0) reduced += 360.0;
  if (reduced == 0.0) return {1.0, 0.0};
  if (reduced == 90.0) return {0.0, 1.0};
  if (reduced == 180.0) return {-1.0, 0.0};
  if (reduced == 270.0) return {0.0, -1.0};
  const double radians = reduced * std::numbers::pi / 180.0;
  return {std::cos(radians), std::sin(radians)};
}

bool Box::IsValid() const {
  return AllFinite({xmin, ymin, xmax, ymax}) && xmin <= xmax && ymin <= ymax;
}

AffineMap AffineMap::Translation(double dx, double dy) {
  return {1.0, 0.0, dx, 0.0, 1.0, dy};
}

AffineMap AffineMap::Scaling(double sx, double sy, double cx, double cy) {
  return {sx, 0.0, cx - sx * cx, 0.0, sy, cy - sy * cy};
}

AffineMap AffineMap::Rotation(double degrees, double cx, double cy) {
  const auto [cs, sn] = CosSinDegrees(degrees);
  return {cs, sn, (1.0 - cs) * cx - sn * cy, -sn, cs, sn * cx + (1.0 - cs) * cy};
}

AffineMap AffineMap::HorizontalFlip(double width) {
  return {-1.0, 0.0, width, 0.0, 1.0, 0.0};
}

AffineMap AffineMap::VerticalFlip(double height) {
  return {1.0, 0.0, 0.0, 0.0, -1.0, height};
}

bool AffineMap::IsInvertible() const {
  const double det = Determinant();
  return std::isfinite(det) && std::abs(det) > 1e-12 &&
         AllFinite({m_[0], m_[1], m_[2], m_[3], m_[4], m_[5]});
}

absl::StatusOr<AffineMap> AffineMap::Inverse() const {
  if (!IsInvertible()) {
    return absl::InvalidArgumentError(
        fmt::sprintf("affine map is singular (determinant %g)",
                        Determinant()));
  }
  const double det = Determinant();
  const double ia = m_[4] / det;
  const double ib = -m_[1] / det;
  const double ic = -m_[3] / det;
  const double id = m_[0] / det;
  return AffineMap(ia, ib, -(ia * m_[2] + ib * m_[5]), ic, id,
                   -(ic * m_[2] + id * m_[5]));
}

AffineMap AffineMap::Compose(const AffineMap& outer, const AffineMap& inner) {
  return {outer.a() * inner.a() + outer.b() * inner.c(),
          outer.a() * inner.b() + outer.b() * inner.d(),
          outer.a() * inner.tx() + outer.b() * inner.ty() + outer.tx(),
          outer.c() * inner.a() + outer.d() * inner.c(),
          outer.c() * inner.b() + outer.d() * inner.d(),
          outer.c() * inner.tx() + outer.d() * inner.ty() + outer.ty()};
}

double Area(const Box& box) {
  return std::max(0.0, box.Width()) * std::max(0.0, box.Height());
}

double IntersectionArea(const Box& a, const Box& b) {
  const double w = std::min(a.xmax, b.xmax) - std::max(a.xmin, b.xmin);
  const double h = std::min(a.ymax, b.ymax) - std::max(a.ymin, b.ymin);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double Iou(const Box& a, const Box& b) {
  const double inter = IntersectionArea(a, b);
  const double uni = Area(a) + Area(b) - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Box Merge(const Box& a, const Box& b) {
  return {std::min(a.xmin, b.xmin), std::min(a.ymin, b.ymin),
          std::max(a.xmax, b.xmax), std::max(a.ymax, b.ymax)};
}

absl::StatusOr<Box> Clip(const Box& box, double width, double height) {
  if (!(width > 0.0) || !(height > 0.0)) {
    return absl::InvalidArgumentError(
        fmt::sprintf("image size must be positive, got %gx%g", width,
                        height));
  }
  if (!box.IsValid()) {
    return absl::InvalidArgumentError("invalid box");
  }
  const Box clipped{std::clamp(box.xmin, 0.0, width),
                    std::clamp(box.ymin, 0.0, height),
                    std::clamp(box.xmax, 0.0, width),
                    std::clamp(box.ymax, 0.0, height)};
  const bool outside = box.xmin > width || box.ymin > height ||
                       box.xmax < 0.0 || box.ymax < 0.0 ||
                       (box.Width() > 0.0 && clipped.Width() == 0.0) ||
                       (box.Height() > 0.0 && clipped.Height() == 0.0);
  if (outside) {
    return absl::OutOfRangeError(fmt::sprintf(
        "box (%g,%g,%g,%g) lies outside the %gx%g image", box.xmin, box.ymin,
        box.xmax, box.ymax, width, height));
  }
  return clipped;
}

absl::StatusOr<NormBox> ToNormalized(const Box& box, double width,
                                     double height) {
  if (!(width > 0.0) || !(height > 0.0)) {
    return absl::InvalidArgumentError(
        fmt::sprintf("image size must be positive, got %gx%g", width,
                        height));
  }
  if (!box.IsValid() || box.Width() <= 0.0 || box.Height() <= 0.0) {
    return absl::InvalidArgumentError(
        fmt::sprintf("box (%g,%g,%g,%g) has no area", box.xmin, box.ymin,
                        box.xmax, box.ymax));
  }
  const double tol_x = kBoundsTolerance * width;
  const double tol_y = kBoundsTolerance * height;
  if (box.xmin < -tol_x || box.ymin < -tol_y || box.xmax > width + tol_x ||
      box.ymax > height + tol_y) {
    return absl::OutOfRangeError(fmt::sprintf(
        "box (%g,%g,%g,%g) exceeds the %gx%g image", box.xmin, box.ymin,
        box.xmax, box.ymax, width, height));
  }
  return NormBox{(box.xmin + box.xmax) / (2.0 * width),
                 (box.ymin + box.ymax) / (2.0 * height), box.Width() / width,
                 box.Height() / height};
}

Box FromNormalized(const NormBox& norm, double width, double height) {
  return {(norm.cx - 0.5 * norm.w) * width, (norm.cy - 0.5 * norm.h) * height,
          (norm.cx + 0.5 * norm.w) * width, (norm.cy + 0.5 * norm.h) * height};
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

absl::StatusOr<Box> DecodeYolo(const YoloOffsets& offsets, double stride) {
  if (!(stride > 0.0) || !std::isfinite(stride)) {
    return absl::InvalidArgumentError("stride must be positive");
  }
  if (!AllFinite({offsets.tx, offsets.ty, offsets.tw, offsets.th})) {
    return absl::InvalidArgumentError("non-finite YOLO offsets");
  }
  if (!(offsets.prior.width > 0.0) || !(offsets.prior.height > 0.0)) {
    return absl::InvalidArgumentError("anchor prior must be positive");
  }
  if (offsets.cell.x < 0 || offsets.cell.y < 0) {
    return absl::InvalidArgumentError("grid cell offsets must be >= 0");
  }
  const double cx = (Sigmoid(offsets.tx) + offsets.cell.x) * stride;
  const double cy = (Sigmoid(offsets.ty) + offsets.cell.y) * stride;
  const double w = offsets.prior.width * std::exp(offsets.tw);
  const double h = offsets.prior.height * std::exp(offsets.th);
  if (!AllFinite({w, h})) {
    return absl::OutOfRangeError("decoded box extent overflows");
  }
  return Box{cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

absl::StatusOr<YoloOffsets> EncodeYolo(const Box& box, GridCell cell,
                                       AnchorPrior prior, double stride) {
  if (!(stride > 0.0) || !std::isfinite(stride)) {
    return absl::InvalidArgumentError("stride must be positive");
  }
  if (!(prior.width > 0.0) || !(prior.height > 0.0)) {
    return absl::InvalidArgumentError("anchor prior must be positive");
  }
  if (!box.IsValid() || box.Width() <= 0.0 || box.Height() <= 0.0) {
    return absl::InvalidArgumentError("cannot encode a zero-size box");
  }
  const double sx = box.CenterX() / stride - cell.x;
  const double sy = box.CenterY() / stride - cell.y;
  if (!(sx > 0.0 && sx < 1.0 && sy > 0.0 && sy < 1.0)) {
    return absl::OutOfRangeError(fmt::sprintf(
        "box center (%g,%g) is not strictly inside cell (%d,%d)",
        box.CenterX(), box.CenterY(), cell.x, cell.y));
  }
  YoloOffsets out;
  out.tx = std::log(sx / (1.0 - sx));
  out.ty = std::log(sy / (1.0 - sy));
  out.tw = std::log(box.Width() / prior.width);
  out.th = std::log(box.Height() / prior.height);
  out.cell = cell;
  out.prior = prior;
  return out;
}

absl::StatusOr<Box> TransformBox(const Box& box, const AffineMap& map) {
  if (!map.IsInvertible()) {
    return absl::InvalidArgumentError("affine map is singular");
  }
  const std::array<std::array<double, 2>, 4> corners = {
      map.Apply(box.xmin, box.ymin), map.Apply(box.xmax, box.ymin),
      map.Apply(box.xmin, box.ymax), map.Apply(box.xmax, box.ymax)};
  Box out{std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};
  for (const auto& [x, y] : corners) {
    out.xmin = std::min(out.xmin, x);
    out.ymin = std::min(out.ymin, y);
    out.xmax = std::max(out.xmax, x);
    out.ymax = std::max(out.ymax, y);
  }
  return out;
}

double CenteredIou(const AnchorPrior& a, const AnchorPrior& b) {
  const double inter =
      std::min(a.width, b.width) * std::min(a.height, b.height);
  const double uni = a.width * a.height + b.width * b.height - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

namespace {

// Uniform double in [0, 1) from the top 53 bits; stable across standard
// library implementations unlike std::uniform_real_distribution.
template <typename Rng>
double UnitDraw(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

absl::StatusOr<std::vector<AnchorPrior>> ClusterAnchors(
    std::span<const Box> boxes, int k, uint64_t seed) {
  if (k < 1) return absl::InvalidArgumentError("k must be at least 1");
  std::vector<AnchorPrior> points;
  points.reserve(boxes.size());
  for (const Box& box : boxes) {
    if (!box.IsValid() || box.Width() <= 0.0 || box.Height() <= 0.0) {
      return absl::InvalidArgumentError(
          "anchor clustering needs boxes with positive extent");
    }
    points.push_back({box.Width(), box.Height()});
  }
  {
    std::vector<std::pair<double, double>> distinct;
    distinct.reserve(points.size());
    for (const auto& p : points) distinct.emplace_back(p.width, p.height);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()),
                   distinct.end());
    if (static_cast<size_t>(k) > distinct.size()) {
      return absl::InvalidArgumentError(fmt::sprintf(
          "k=%d exceeds the %d distinct box extents", k, distinct.size()));
    }
  }

  const size_t n = points.size();
  auto distance = [](const AnchorPrior& a, const AnchorPrior& b) {
    return 1.0 - CenteredIou(a, b);
  };

  // k-means++ seeding.
  std::mt19937_64 rng(seed);
  std::vector<AnchorPrior> centers;
  centers.reserve(k);
  centers.push_back(points[rng() % n]);
  std::vector<double> nearest(n);
  for (size_t i = 0; i < n; ++i) nearest[i] = distance(points[i], centers[0]);
  while (centers.size() < static_cast<size_t>(k)) {
    double total = 0.0;
    for (double d : nearest) total += d * d;
    size_t pick = n;
    const double target = UnitDraw(rng) * total;
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
      if (nearest[i] <= 0.0) continue;
      acc += nearest[i] * nearest[i];
      pick = i;
      if (acc > target) break;
    }
    centers.push_back(points[pick]);
    for (size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], distance(points[i], centers.back()));
    }
  }

  // Lloyd iterations until the assignment stabilizes.
  std::vector<int> assignment(n, -1);
  for (int iter = 0; iter < kMaxAnchorIterations; ++iter) {
    bool changed = false;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = distance(points[i], centers[0]);
      for (int c = 1; c < k; ++c) {
        const double d = distance(points[i], centers[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (assignment[i] != best) {
        assignment[i] = best;
        changed = true;
      }
    }
    if (!changed) break;

    std::vector<double> sum_w(k, 0.0), sum_h(k, 0.0);
    std::vector<size_t> count(k, 0);
    for (size_t i = 0; i < n; ++i) {
      sum_w[assignment[i]] += points[i].width;
      sum_h[assignment[i]] += points[i].height;
      ++count[assignment[i]];
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0) {
        centers[c] = {sum_w[c] / count[c], sum_h[c] / count[c]};
        continue;
      }
      // Empty cluster: restart it at the worst-served point.
      size_t worst = 0;
      double worst_d = -1.0;
      for (size_t i = 0; i < n; ++i) {
        const double d = distance(points[i], centers[assignment[i]]);
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      centers[c] = points[worst];
      assignment[worst] = c;
    }
  }

  std::sort(centers.begin(), centers.end(),
            [](const AnchorPrior& a, const AnchorPrior& b) {
              const double area_a = a.width * a.height;
              const double area_b = b.width * b.height;
              if (area_a != area_b) return area_a < area_b;
              return a.width < b.width;
            });
  return centers;
}

}  // namespace detkit
