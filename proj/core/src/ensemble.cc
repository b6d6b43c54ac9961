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
#include "detkit/ensemble.h"

#include <algorithm>
#include <cmath>

#include "detkit/internal/status_macros.h"
#include "internal/strings.h"

namespace detkit {
namespace {

struct Entry {
  const Detection* detection;
  size_t model;
  double weight;
  double weighted_score;
};

struct Cluster {
  std::string image_id;
  Box fused;
  size_t members = 0;
  double score_weight_sum = 0.0;  // sum of w * s (coordinate weights)
  double model_weight_sum = 0.0;  // sum of w
  double weighted_score_sum = 0.0;
  std::array<double, 4> coord_sums{};  // weighted by w * s
  std::array<double, 4> plain_sums{};

  void Add(const Entry& e) {
    const Box& b = e.detection->box;
    const std::array<double, 4> coords = {b.xmin, b.ymin, b.xmax, b.ymax};
    const double cw = e.weighted_score;
    for (int i = 0; i < 4; ++i) {
      coord_sums[i] += cw * coords[i];
      plain_sums[i] += coords[i];
    }
    score_weight_sum += cw;
    model_weight_sum += e.weight;
    weighted_score_sum += e.weight * e.detection->score;
    ++members;
    std::array<double, 4> f;
    for (int i = 0; i < 4; ++i) {
      f[i] = score_weight_sum > 0.0
                 ? coord_sums[i] / score_weight_sum
                 : plain_sums[i] / static_cast<double>(members);
    }
    fused = {f[0], f[1], f[2], f[3]};
  }
};

}  // namespace

std::string_view FusionScoreModeName(FusionScoreMode mode) {
  return mode == FusionScoreMode::kMean ? "mean" : "mean_rescaled";
}

absl::StatusOr<FusionScoreMode> ParseFusionScoreMode(std::string_view name) {
  if (name == "mean") return FusionScoreMode::kMean;
  if (name == "mean_rescaled") return FusionScoreMode::kMeanRescaled;
  return absl::InvalidArgumentError(
      internal::StrCat("unknown score mode '", name,
                   "' (expected mean or mean_rescaled)"));
}

absl::Status ValidateFusionConfig(const FusionConfig& config,
                                  size_t model_count) {
  if (model_count == 0) {
    return absl::InvalidArgumentError("fusion needs at least one model");
  }
  if (!(config.iou_threshold > 0.0 && config.iou_threshold <= 1.0)) {
    return absl::InvalidArgumentError("fusion IoU threshold must be in (0, 1]");
  }
  if (config.weights.empty()) return absl::OkStatus();
  if (config.weights.size() != model_count) {
    return absl::InvalidArgumentError(
        fmt::sprintf("got %d weights for %d models", config.weights.size(),
                        model_count));
  }
  bool any_positive = false;
  for (double w : config.weights) {
    if (!std::isfinite(w) || w < 0.0) {
      return absl::InvalidArgumentError("model weights must be >= 0");
    }
    any_positive |= w > 0.0;
  }
  if (!any_positive) {
    return absl::InvalidArgumentError("at least one model weight must be > 0");
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<Detection>> WeightedBoxesFusion(
    std::span<const std::vector<Detection>> per_model,
    const FusionConfig& config) {
  DETKIT_RETURN_IF_ERROR(ValidateFusionConfig(config, per_model.size()));
  const size_t model_count = per_model.size();

  std::vector<Entry> entries;
  for (size_t m = 0; m < model_count; ++m) {
    const double w = config.weights.empty() ? 1.0 : config.weights[m];
    if (w == 0.0) continue;
    for (const Detection& d : per_model[m]) {
      entries.push_back({&d, m, w, w * d.score});
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) {
                     if (a.weighted_score != b.weighted_score) {
                       return a.weighted_score > b.weighted_score;
                     }
                     if (RanksBefore(*a.detection, *b.detection)) return true;
                     if (RanksBefore(*b.detection, *a.detection)) return false;
                     return a.model < b.model;
                   });

  std::vector<Cluster> clusters;
  for (const Entry& e : entries) {
    Cluster* target = nullptr;
    for (Cluster& c : clusters) {
      if (c.image_id == e.detection->image_id &&
          Iou(c.fused, e.detection->box) >= config.iou_threshold) {
        target = &c;
        break;
      }
    }
    if (target == nullptr) {
      clusters.push_back({});
      target = &clusters.back();
      target->image_id = e.detection->image_id;
    }
    target->Add(e);
  }

  std::vector<Detection> fused;
  fused.reserve(clusters.size());
  for (const Cluster& c : clusters) {
    double score = c.weighted_score_sum / c.model_weight_sum;
    if (config.score_mode == FusionScoreMode::kMeanRescaled) {
      score *= static_cast<double>(std::min(c.members, model_count)) /
               static_cast<double>(model_count);
    }
    fused.push_back({c.image_id, c.fused, std::clamp(score, 0.0, 1.0)});
  }
  std::stable_sort(fused.begin(), fused.end(), RanksBefore);
  return fused;
}

absl::StatusOr<std::vector<Detection>> TtaMerge(std::span<const TtaView> views,
                                                double nms_iou) {
  if (!(nms_iou > 0.0 && nms_iou <= 1.0)) {
    return absl::InvalidArgumentError("NMS IoU threshold must be in (0, 1]");
  }
  std::vector<Detection> pooled;
  for (const TtaView& view : views) {
    if (!view.transform.to_original.IsInvertible()) {
      return absl::InvalidArgumentError(internal::StrCat(
          "view '", view.transform.label, "' has a singular transform"));
    }
    for (const Detection& d : view.detections) {
      DETKIT_ASSIGN_OR_RETURN(Box mapped,
                              TransformBox(d.box, view.transform.to_original));
      pooled.push_back({d.image_id, mapped, d.score});
    }
  }
  return ApplyPerImage(pooled, [nms_iou](std::span<const Detection> image) {
    return Nms(image, nms_iou);
  });
}

absl::StatusOr<std::vector<Detection>> EnsemblePipeline(
    std::span<const std::vector<Detection>> per_model,
    const FusionConfig& config, const PostChain& post) {
  DETKIT_RETURN_IF_ERROR(ValidatePostChain(post));
  DETKIT_ASSIGN_OR_RETURN(std::vector<Detection> fused,
                          WeightedBoxesFusion(per_model, config));
  if (post.empty()) return fused;
  return ApplyPerImage(fused, [&post](std::span<const Detection> image) {
    return ApplyChain(image, post);
  });
}

}  // namespace detkit
