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
#ifndef DETKIT_ENSEMBLE_H_
#define DETKIT_ENSEMBLE_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "detkit/annotations.h"
#include "detkit/geometry.h"
#include "detkit/postprocess.h"

namespace detkit {

enum class FusionScoreMode {
  // Weighted mean of member scores.
  kMean,
  // Weighted mean scaled by min(T, N) / N, T = cluster size, N = model count.
  kMeanRescaled,
};

std::string_view FusionScoreModeName(FusionScoreMode mode);
absl::StatusOr<FusionScoreMode> ParseFusionScoreMode(std::string_view name);

inline constexpr double kDefaultFusionIou = 0.55;

struct FusionConfig {
  double iou_threshold = kDefaultFusionIou;
  // One nonnegative weight per model. Empty means equal weights.
  std::vector<double> weights;
  FusionScoreMode score_mode = FusionScoreMode::kMeanRescaled;
};

absl::Status ValidateFusionConfig(const FusionConfig& config,
                                  size_t model_count);

// Weighted Boxes Fusion.
//
// Boxes from all models are visited in descending weight * score order (ties
// by RanksBefore, then model index). Each box joins the first existing cluster
// whose running fused box has IoU >= iou_threshold with it, otherwise it opens
// a new cluster. A fused box is the average of its members' coordinates
// weighted by score * model weight; its score follows `score_mode`. Clusters
// never span two image ids. Boxes from zero-weight models are ignored.
absl::StatusOr<std::vector<Detection>> WeightedBoxesFusion(
    std::span<const std::vector<Detection>> per_model,
    const FusionConfig& config);

// Maps boxes of an augmented view back into original image coordinates.
struct ViewTransform {
  AffineMap to_original;
  std::string label;
};

struct TtaView {
  ViewTransform transform;
  std::vector<Detection> detections;
};

inline constexpr double kDefaultTtaNmsIou = 0.30;

// Maps every view's detections back through its transform, pools them and
// runs NMS per image.
absl::StatusOr<std::vector<Detection>> TtaMerge(std::span<const TtaView> views,
                                                double nms_iou =
                                                    kDefaultTtaNmsIou);

// WeightedBoxesFusion followed by `post` applied per image.
absl::StatusOr<std::vector<Detection>> EnsemblePipeline(
    std::span<const std::vector<Detection>> per_model,
    const FusionConfig& config, const PostChain& post = {});

}  // namespace detkit

#endif  // DETKIT_ENSEMBLE_H_
