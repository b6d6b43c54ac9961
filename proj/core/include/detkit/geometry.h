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
#ifndef DETKIT_GEOMETRY_H_
#define DETKIT_GEOMETRY_H_

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace detkit {

// Axis-aligned box in continuous pixel coordinates. The origin is the top-left
// image corner, x grows rightwards and y downwards. A pixel (i, j) covers
// [i, i+1) x [j, j+1), so areas carry no "+1" term.
struct Box {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;

  double Width() const { return xmax - xmin; }
  double Height() const { return ymax - ymin; }
  double CenterX() const { return 0.5 * (xmin + xmax); }
  double CenterY() const { return 0.5 * (ymin + ymax); }

  // Finite coordinates with xmin <= xmax and ymin <= ymax.
  bool IsValid() const;

  friend bool operator==(const Box&, const Box&) = default;
};

// Center/extent box normalized by image width and height (the YOLO txt
// layout).
struct NormBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const NormBox&, const NormBox&) = default;
};

struct GridCell {
  int x = 0;
  int y = 0;
};

// Anchor prior extent in pixels.
struct AnchorPrior {
  double width = 0.0;
  double height = 0.0;

  friend bool operator==(const AnchorPrior&, const AnchorPrior&) = default;
};

// Raw YOLO regression outputs for one prediction plus the grid cell and anchor
// prior they are relative to.
struct YoloOffsets {
  double tx = 0.0;
  double ty = 0.0;
  double tw = 0.0;
  double th = 0.0;
  GridCell cell;
  AnchorPrior prior;
};

// 2x3 affine map (x, y) -> (a*x + b*y + tx, c*x + d*y + ty).
class AffineMap {
 public:
  AffineMap() = default;
  AffineMap(double a, double b, double tx, double c, double d, double ty)
      : m_{a, b, tx, c, d, ty} {}

  static AffineMap Identity() { return {}; }
  static AffineMap Translation(double dx, double dy);
  // Scales about the pivot (cx, cy).
  static AffineMap Scaling(double sx, double sy, double cx = 0.0,
                           double cy = 0.0);
  // Rotates by `degrees` about (cx, cy). Positive angles turn counter-clockwise
  // as seen on screen (y axis pointing down).
  static AffineMap Rotation(double degrees, double cx, double cy);
  // Mirror across the vertical line x = width / 2.
  static AffineMap HorizontalFlip(double width);
  // Mirror across the horizontal line y = height / 2.
  static AffineMap VerticalFlip(double height);

  double a() const { return m_[0]; }
  double b() const { return m_[1]; }
  double tx() const { return m_[2]; }
  double c() const { return m_[3]; }
  double d() const { return m_[4]; }
  double ty() const { return m_[5]; }

  double Determinant() const { return m_[0] * m_[4] - m_[1] * m_[3]; }
  bool IsInvertible() const;

  std::array<double, 2> Apply(double x, double y) const {
    return {m_[0] * x + m_[1] * y + m_[2], m_[3] * x + m_[4] * y + m_[5]};
  }

  absl::StatusOr<AffineMap> Inverse() const;

  // Returns the map x -> outer(inner(x)).
  static AffineMap Compose(const AffineMap& outer, const AffineMap& inner);

 private:
  std::array<double, 6> m_ = {1.0, 0.0, 0.0, 0.0, 1.0, 0.0};
};

double Area(const Box& box);
double IntersectionArea(const Box& a, const Box& b);

// Intersection over union. Defined as 0 when the union has zero area.
double Iou(const Box& a, const Box& b);

// Smallest box enclosing both inputs (component-wise min of the minima, max of
// the maxima).
Box Merge(const Box& a, const Box& b);

// Clamps `box` to [0, width] x [0, height]. Fails when the box lies entirely
// outside the image.
absl::StatusOr<Box> Clip(const Box& box, double width, double height);

// Fails when the box is degenerate or leaves the image by more than 1e-6 of
// the image dimension.
absl::StatusOr<NormBox> ToNormalized(const Box& box, double width,
                                     double height);
Box FromNormalized(const NormBox& norm, double width, double height);

double Sigmoid(double x);

// (cos, sin) of an angle in degrees, exact for multiples of 90.
std::pair<double, double> CosSinDegrees(double degrees);

// Box center = (sigmoid(t) + cell) * stride, extent = prior * exp(t).
absl::StatusOr<Box> DecodeYolo(const YoloOffsets& offsets, double stride);

// Exact inverse of DecodeYolo. The box center must lie strictly inside `cell`
// and the box must have positive extent.
absl::StatusOr<YoloOffsets> EncodeYolo(const Box& box, GridCell cell,
                                       AnchorPrior prior, double stride);

// Maps the four corners and returns their axis-aligned bounding box.
absl::StatusOr<Box> TransformBox(const Box& box, const AffineMap& map);

// IoU of two boxes sharing the same center.
double CenteredIou(const AnchorPrior& a, const AnchorPrior& b);

// k-means over box extents with distance 1 - CenteredIou, k-means++ seeding
// from `seed`, and at most 300 Lloyd iterations. Priors are returned sorted by
// area, then width.
absl::StatusOr<std::vector<AnchorPrior>> ClusterAnchors(
    std::span<const Box> boxes, int k, uint64_t seed);

inline constexpr int kMaxAnchorIterations = 300;

}  // namespace detkit

#endif  // DETKIT_GEOMETRY_H_
