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
#ifndef DETKIT_POSTPROCESS_H_
#define DETKIT_POSTPROCESS_H_

#include <functional>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "detkit/annotations.h"

// Single-image detection filters. Every function here assumes its input comes
// from one image; use ApplyPerImage for mixed lists. Orderings follow
// RanksBefore.

namespace detkit {

// Greedy hard NMS. Keeps the best-ranked box, discards every remaining box
// with IoU >= iou_threshold against it, repeats. Output is in rank order.
std::vector<Detection> Nms(std::span<const Detection> detections,
                           double iou_threshold);

enum class SoftNmsDecay { kGaussian, kLinear };

// How prune_score is compared after decay.
enum class SoftNmsPrune {
  // Drop when the decayed score falls below prune_score.
  kAbsolute,
  // Drop when decayed / original score falls below prune_score.
  kRetainedFraction,
};

struct SoftNmsConfig {
  SoftNmsDecay decay = SoftNmsDecay::kGaussian;
  // Gaussian decay: score *= exp(-iou^2 / sigma).
  double sigma = 0.5;
  // Linear decay: score *= (1 - iou) once iou >= iou_trigger.
  double iou_trigger = 0.5;
  double prune_score = 0.5;
  SoftNmsPrune prune = SoftNmsPrune::kAbsolute;
  // Optional filter on the original scores before any decay.
  double min_input_score = 0.0;
};

absl::Status ValidateSoftNmsConfig(const SoftNmsConfig& config);

// Returns the surviving detections with their decayed scores, ordered by
// final score.
std::vector<Detection> SoftNms(std::span<const Detection> detections,
                               const SoftNmsConfig& config);

// Keeps detections with score >= min_score, preserving input order.
std::vector<Detection> FilterConfidence(std::span<const Detection> detections,
                                        double min_score);

inline constexpr double kDefaultOverlapThreshold = 0.8;

// Groups detections by the transitive closure of IoU >= overlap_threshold and
// keeps the best-ranked member of every group. Output is in rank order.
std::vector<Detection> RemoveOverlaps(std::span<const Detection> detections,
                                      double overlap_threshold =
                                          kDefaultOverlapThreshold);

inline constexpr double kDefaultAdaptiveThreshold = 0.5;

// A lone detection always survives; otherwise behaves like FilterConfidence.
std::vector<Detection> AdaptiveSuppress(std::span<const Detection> detections,
                                        double threshold =
                                            kDefaultAdaptiveThreshold);

// --- Chains -----------------------------------------------------------------

struct NmsStep {
  double iou_threshold = 0.5;
};
struct SoftNmsStep {
  SoftNmsConfig config;
};
struct FilterStep {
  double min_score = 0.3;
};
struct RemoveOverlapsStep {
  double overlap_threshold = kDefaultOverlapThreshold;
};
struct AdaptiveSuppressStep {
  double threshold = kDefaultAdaptiveThreshold;
};

using PostStep = std::variant<NmsStep, SoftNmsStep, FilterStep,
                              RemoveOverlapsStep, AdaptiveSuppressStep>;
using PostChain = std::vector<PostStep>;

absl::Status ValidatePostChain(const PostChain& chain);

// Applies the steps in order to one image's detections.
std::vector<Detection> ApplyChain(std::span<const Detection> detections,
                                  const PostChain& chain);

std::string DescribeStep(const PostStep& step);

// Splits a mixed list by image id, applies `fn` to each image (in image id
// order) and concatenates the results.
std::vector<Detection> ApplyPerImage(
    std::span<const Detection> detections,
    const std::function<std::vector<Detection>(std::span<const Detection>)>&
        fn);

// Image id -> that image's detections, in input order.
std::map<std::string, std::vector<Detection>, std::less<>> GroupByImage(
    std::span<const Detection> detections);

}  // namespace detkit

#endif  // DETKIT_POSTPROCESS_H_
