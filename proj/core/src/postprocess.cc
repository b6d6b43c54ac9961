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
#include "detkit/postprocess.h"
#include "internal/strings.h"

#include <algorithm>
#include <cmath>
#include <numeric>


namespace detkit {
namespace {

std::vector<Detection> RankSorted(std::span<const Detection> detections) {
  std::vector<Detection> sorted(detections.begin(), detections.end());
  std::stable_sort(sorted.begin(), sorted.end(), RanksBefore);
  return sorted;
}

bool InUnitInterval(double v) { return v >= 0.0 && v <= 1.0; }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::vector<Detection> Nms(std::span<const Detection> detections,
                           double iou_threshold) {
  const std::vector<Detection> sorted = RankSorted(detections);
  std::vector<bool> suppressed(sorted.size(), false);
  std::vector<Detection> kept;
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (suppressed[i]) continue;
    kept.push_back(sorted[i]);
    for (size_t j = i + 1; j < sorted.size(); ++j) {
      if (!suppressed[j] && Iou(sorted[i].box, sorted[j].box) >= iou_threshold) {
        suppressed[j] = true;
      }
    }
  }
  return kept;
}

absl::Status ValidateSoftNmsConfig(const SoftNmsConfig& config) {
  if (config.decay == SoftNmsDecay::kGaussian && !(config.sigma > 0.0)) {
    return absl::InvalidArgumentError("soft-NMS sigma must be positive");
  }
  if (!(config.iou_trigger > 0.0 && config.iou_trigger <= 1.0)) {
    return absl::InvalidArgumentError("soft-NMS iou trigger must be in (0, 1]");
  }
  if (!InUnitInterval(config.prune_score)) {
    return absl::InvalidArgumentError("soft-NMS prune score must be in [0, 1]");
  }
  if (!InUnitInterval(config.min_input_score)) {
    return absl::InvalidArgumentError(
        "soft-NMS minimum input score must be in [0, 1]");
  }
  return absl::OkStatus();
}

std::vector<Detection> SoftNms(std::span<const Detection> detections,
                               const SoftNmsConfig& config) {
  struct Candidate {
    Detection detection;
    double retained = 1.0;
  };
  auto survives = [&config](const Candidate& c) {
    if (config.prune == SoftNmsPrune::kAbsolute) {
      return c.detection.score >= config.prune_score;
    }
    return c.retained >= config.prune_score;
  };

  std::vector<Candidate> pool;
  pool.reserve(detections.size());
  for (const Detection& d : detections) {
    if (d.score < config.min_input_score) continue;
    Candidate c{d, 1.0};
    if (survives(c)) pool.push_back(std::move(c));
  }

  std::vector<Detection> out;
  while (!pool.empty()) {
    auto best = std::min_element(pool.begin(), pool.end(),
                                 [](const Candidate& a, const Candidate& b) {
                                   return RanksBefore(a.detection, b.detection);
                                 });
    Detection selected = std::move(best->detection);
    pool.erase(best);
    for (Candidate& c : pool) {
      const double iou = Iou(selected.box, c.detection.box);
      double factor = 1.0;
      if (config.decay == SoftNmsDecay::kGaussian) {
        factor = std::exp(-(iou * iou) / config.sigma);
      } else if (iou >= config.iou_trigger) {
        factor = 1.0 - iou;
      }
      c.detection.score *= factor;
      c.retained *= factor;
    }
    std::erase_if(pool, [&](const Candidate& c) { return !survives(c); });
    out.push_back(std::move(selected));
  }
  std::stable_sort(out.begin(), out.end(), RanksBefore);
  return out;
}

std::vector<Detection> FilterConfidence(std::span<const Detection> detections,
                                        double min_score) {
  std::vector<Detection> out;
  for (const Detection& d : detections) {
    if (d.score >= min_score) out.push_back(d);
  }
  return out;
}

std::vector<Detection> RemoveOverlaps(std::span<const Detection> detections,
                                      double overlap_threshold) {
  const size_t n = detections.size();
  std::vector<size_t> parent(n);
  std::iota(parent.begin(), parent.end(), size_t{0});
  auto find = [&parent](size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      if (Iou(detections[i].box, detections[j].box) >= overlap_threshold) {
        parent[find(i)] = find(j);
      }
    }
  }
  std::vector<long> best(n, -1);
  for (size_t i = 0; i < n; ++i) {
    const size_t root = find(i);
    if (best[root] < 0 || RanksBefore(detections[i], detections[best[root]])) {
      best[root] = static_cast<long>(i);
    }
  }
  std::vector<Detection> out;
  for (size_t i = 0; i < n; ++i) {
    if (best[i] >= 0) out.push_back(detections[best[i]]);
  }
  std::stable_sort(out.begin(), out.end(), RanksBefore);
  return out;
}

std::vector<Detection> AdaptiveSuppress(std::span<const Detection> detections,
                                        double threshold) {
  if (detections.size() == 1) {
    return {detections.begin(), detections.end()};
  }
  return FilterConfidence(detections, threshold);
}

absl::Status ValidatePostChain(const PostChain& chain) {
  for (const PostStep& step : chain) {
    absl::Status status = std::visit(
        Overloaded{
            [](const NmsStep& s) {
              return s.iou_threshold > 0.0 && s.iou_threshold <= 1.0
                         ? absl::OkStatus()
                         : absl::InvalidArgumentError(
                               "NMS IoU threshold must be in (0, 1]");
            },
            [](const SoftNmsStep& s) { return ValidateSoftNmsConfig(s.config); },
            [](const FilterStep& s) {
              return InUnitInterval(s.min_score)
                         ? absl::OkStatus()
                         : absl::InvalidArgumentError(
                               "minimum score must be in [0, 1]");
            },
            [](const RemoveOverlapsStep& s) {
              return s.overlap_threshold > 0.0 && s.overlap_threshold <= 1.0
                         ? absl::OkStatus()
                         : absl::InvalidArgumentError(
                               "overlap threshold must be in (0, 1]");
            },
            [](const AdaptiveSuppressStep& s) {
              return InUnitInterval(s.threshold)
                         ? absl::OkStatus()
                         : absl::InvalidArgumentError(
                               "suppression threshold must be in [0, 1]");
            },
        },
        step);
    if (!status.ok()) return status;
  }
  return absl::OkStatus();
}

std::vector<Detection> ApplyChain(std::span<const Detection> detections,
                                  const PostChain& chain) {
  std::vector<Detection> current(detections.begin(), detections.end());
  for (const PostStep& step : chain) {
    current = std::visit(
        Overloaded{
            [&](const NmsStep& s) { return Nms(current, s.iou_threshold); },
            [&](const SoftNmsStep& s) { return SoftNms(current, s.config); },
            [&](const FilterStep& s) {
              return FilterConfidence(current, s.min_score);
            },
            [&](const RemoveOverlapsStep& s) {
              return RemoveOverlaps(current, s.overlap_threshold);
            },
            [&](const AdaptiveSuppressStep& s) {
              return AdaptiveSuppress(current, s.threshold);
            },
        },
        step);
  }
  return current;
}

std::string DescribeStep(const PostStep& step) {
  return std::visit(
      Overloaded{
          [](const NmsStep& s) {
            return fmt::sprintf("nms(iou=%g)", s.iou_threshold);
          },
          [](const SoftNmsStep& s) {
            const SoftNmsConfig& c = s.config;
            return fmt::sprintf(
                "softnms(decay=%s,sigma=%g,trigger=%g,prune=%g%s)",
                c.decay == SoftNmsDecay::kGaussian ? "gaussian" : "linear",
                c.sigma, c.iou_trigger, c.prune_score,
                c.prune == SoftNmsPrune::kRetainedFraction ? ",relative" : "");
          },
          [](const FilterStep& s) {
            return fmt::sprintf("filter(min=%g)", s.min_score);
          },
          [](const RemoveOverlapsStep& s) {
            return fmt::sprintf("remove-overlaps(iou=%g)",
                                   s.overlap_threshold);
          },
          [](const AdaptiveSuppressStep& s) {
            return fmt::sprintf("adaptive-suppress(min=%g)", s.threshold);
          },
      },
      step);
}

std::map<std::string, std::vector<Detection>, std::less<>> GroupByImage(
    std::span<const Detection> detections) {
  std::map<std::string, std::vector<Detection>, std::less<>> grouped;
  for (const Detection& d : detections) grouped[d.image_id].push_back(d);
  return grouped;
}

std::vector<Detection> ApplyPerImage(
    std::span<const Detection> detections,
    const std::function<std::vector<Detection>(std::span<const Detection>)>&
        fn) {
  std::vector<Detection> out;
  for (const auto& [id, group] : GroupByImage(detections)) {
    std::vector<Detection> result = fn(group);
    out.insert(out.end(), std::make_move_iterator(result.begin()),
               std::make_move_iterator(result.end()));
  }
  return out;
}

}  // namespace detkit
