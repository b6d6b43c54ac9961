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
#include "cli.h"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "detkit/annotations.h"
#include "detkit/geometry.h"
#include "detkit/image.h"
#include "detkit/imageops.h"
#include "detkit/internal/status_macros.h"
#include "detkit/metrics.h"
#include "fmt/format.h"
#include "fmt/printf.h"
#include "json.hpp"

#ifndef DETKIT_VERSION
#define DETKIT_VERSION "0.0.0"
#endif

namespace detkit::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Failures caused by flag values rather than by file contents.
absl::Status UsageError(std::string message) {
  return absl::InvalidArgumentError(std::move(message));
}
bool IsUsageError(const absl::Status& status) {
  return absl::IsInvalidArgument(status) &&
         std::string_view(status.message().data(), status.message().size())
                 .rfind("usage: ", 0) == 0;
}
absl::Status Usage(std::string_view message) {
  return UsageError(fmt::format("usage: {}", message));
}

std::string Message(const absl::Status& status) {
  std::string_view m(status.message().data(), status.message().size());
  if (m.rfind("usage: ", 0) == 0) m.remove_prefix(7);
  return std::string(m);
}

std::vector<std::string_view> SplitOn(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t end = s.find(sep, start);
    parts.push_back(s.substr(start, end == std::string_view::npos
                                        ? std::string_view::npos
                                        : end - start));
    if (end == std::string_view::npos) return parts;
    start = end + 1;
  }
}

absl::StatusOr<double> ParseReal(std::string_view text, std::string_view what) {
  const std::string s(text);
  size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || !std::isfinite(value)) {
    return Usage(fmt::format("{}: '{}' is not a number", what, text));
  }
  return value;
}

absl::StatusOr<int> ParseInt(std::string_view text, std::string_view what) {
  DETKIT_ASSIGN_OR_RETURN(double v, ParseReal(text, what));
  if (v != std::floor(v) || std::abs(v) > 1e9) {
    return Usage(fmt::format("{}: '{}' is not an integer", what, text));
  }
  return static_cast<int>(v);
}

// Writes to `path`, or to `out` when no path was given.
absl::Status Emit(const std::string& path, std::string_view text,
                  std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return absl::OkStatus();
  }
  return WriteFileAtomically(path, text);
}

// Runs fn(0..n-1) on up to `jobs` threads. Callers write into per-index
// slots, so results do not depend on scheduling.
void ParallelFor(size_t n, int jobs, const std::function<void(size_t)>& fn) {
  const size_t workers = std::min<size_t>(std::max(jobs, 1), n);
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (size_t i; (i = next.fetch_add(1)) < n;) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

using ImageFn =
    std::function<std::vector<Detection>(std::span<const Detection>)>;

// Same output as ApplyPerImage, with images spread over `jobs` threads.
std::vector<Detection> PerImage(std::span<const Detection> detections,
                                int jobs, const ImageFn& fn) {
  const auto grouped = GroupByImage(detections);
  std::vector<const std::vector<Detection>*> groups;
  groups.reserve(grouped.size());
  for (const auto& [id, group] : grouped) groups.push_back(&group);
  std::vector<std::vector<Detection>> results(groups.size());
  ParallelFor(groups.size(), jobs,
              [&](size_t i) { results[i] = fn(*groups[i]); });
  std::vector<Detection> out;
  for (auto& r : results) {
    out.insert(out.end(), std::make_move_iterator(r.begin()),
               std::make_move_iterator(r.end()));
  }
  return out;
}

absl::Status EmitDetections(const std::string& path,
                            std::span<const Detection> detections,
                            std::ostream& out) {
  DETKIT_ASSIGN_OR_RETURN(std::string text, FormatDetectionsCsv(detections));
  return Emit(path, text, out);
}

absl::Status EmitAnnotations(const std::string& path,
                             std::span<const Annotation> annotations,
                             std::ostream& out) {
  DETKIT_ASSIGN_OR_RETURN(std::string text, FormatAnnotationsCsv(annotations));
  return Emit(path, text, out);
}

// --- Options -----------------------------------------------------------------

struct Options {
  int jobs = 1;
  std::string out;

  std::string gt;
  std::string pred;
  std::vector<std::string> preds;
  std::string metas;

  double iou = 0.5;
  std::string ap_mode = "allpoint";
  std::vector<double> ious = {0.3, 0.4, 0.5};

  double nms_iou = 0.5;

  std::string decay = "gaussian";
  double sigma = 0.5;
  double iou_trigger = 0.5;
  double prune_score = 0.5;
  std::string prune_mode = "absolute";
  double min_input_score = 0.0;

  double min_score = 0.3;
  double overlap = kDefaultOverlapThreshold;
  double adaptive_threshold = kDefaultAdaptiveThreshold;

  double wbf_iou = kDefaultFusionIou;
  std::vector<double> weights;
  std::string score_mode = "mean_rescaled";
  std::vector<std::string> post;

  std::vector<std::string> views;
  double tta_nms_iou = kDefaultTtaNmsIou;

  double pseudo_min_score = 0.70;

  std::string pairs;
  bool strict = false;

  std::string from = "csv";
  std::string to = "yolo";
  std::string input;
  std::string output;

  std::string manifest;
  std::string annotations;
  std::string annotations_out;

  int k = 9;
  uint64_t seed = 0;
};

// --- Post-processing steps -----------------------------------------------------

absl::StatusOr<std::map<std::string, std::string, std::less<>>> ParseKeyValues(
    std::string_view text, char sep, std::string_view what) {
  std::map<std::string, std::string, std::less<>> kv;
  if (text.empty()) return kv;
  for (std::string_view item : SplitOn(text, sep)) {
    if (item.empty()) continue;
    const size_t eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      return Usage(fmt::format("{}: expected key=value, got '{}'", what, item));
    }
    const std::string key(item.substr(0, eq));
    if (!kv.emplace(key, std::string(item.substr(eq + 1))).second) {
      return Usage(fmt::format("{}: repeated key '{}'", what, key));
    }
  }
  return kv;
}

}  // namespace

absl::StatusOr<PostStep> ParsePostStep(std::string_view spec) {
  const size_t colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  DETKIT_ASSIGN_OR_RETURN(
      auto kv, ParseKeyValues(colon == std::string_view::npos
                                  ? std::string_view()
                                  : spec.substr(colon + 1),
                              ',', fmt::format("--post {}", spec)));
  std::set<std::string, std::less<>> allowed;
  auto take = [&](std::string_view key, double fallback) -> absl::StatusOr<double> {
    allowed.emplace(key);
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    return ParseReal(it->second, fmt::format("--post {} {}", name, key));
  };

  PostStep step;
  if (name == "nms") {
    DETKIT_ASSIGN_OR_RETURN(double iou, take("iou", 0.5));
    step = NmsStep{iou};
  } else if (name == "softnms") {
    SoftNmsConfig c;
    allowed.emplace("decay");
    allowed.emplace("prune_mode");
    if (const auto it = kv.find("decay"); it != kv.end()) {
      if (it->second == "gaussian") {
        c.decay = SoftNmsDecay::kGaussian;
      } else if (it->second == "linear") {
        c.decay = SoftNmsDecay::kLinear;
      } else {
        return Usage(fmt::format("--post softnms: unknown decay '{}'",
                                 it->second));
      }
    }
    if (const auto it = kv.find("prune_mode"); it != kv.end()) {
      if (it->second == "absolute") {
        c.prune = SoftNmsPrune::kAbsolute;
      } else if (it->second == "retained") {
        c.prune = SoftNmsPrune::kRetainedFraction;
      } else {
        return Usage(fmt::format("--post softnms: unknown prune_mode '{}'",
                                 it->second));
      }
    }
    DETKIT_ASSIGN_OR_RETURN(c.sigma, take("sigma", c.sigma));
    DETKIT_ASSIGN_OR_RETURN(c.iou_trigger, take("trigger", c.iou_trigger));
    DETKIT_ASSIGN_OR_RETURN(c.prune_score, take("prune", c.prune_score));
    DETKIT_ASSIGN_OR_RETURN(c.min_input_score,
                            take("min_input", c.min_input_score));
    step = SoftNmsStep{c};
  } else if (name == "filter") {
    DETKIT_ASSIGN_OR_RETURN(double min, take("min", 0.3));
    step = FilterStep{min};
  } else if (name == "remove-overlaps") {
    DETKIT_ASSIGN_OR_RETURN(double overlap,
                            take("overlap", kDefaultOverlapThreshold));
    step = RemoveOverlapsStep{overlap};
  } else if (name == "adaptive-suppress") {
    DETKIT_ASSIGN_OR_RETURN(double threshold,
                            take("threshold", kDefaultAdaptiveThreshold));
    step = AdaptiveSuppressStep{threshold};
  } else {
    return Usage(fmt::format("--post: unknown step '{}'", name));
  }
  for (const auto& [key, value] : kv) {
    if (!allowed.contains(key)) {
      return Usage(fmt::format("--post {}: unknown key '{}'", name, key));
    }
  }
  const absl::Status valid = ValidatePostChain({step});
  if (!valid.ok()) return Usage(fmt::format("--post {}: {}", spec, Message(valid)));
  return step;
}

absl::StatusOr<AffineMap> ParseViewTransform(std::string_view spec, int width,
                                             int height) {
  const size_t colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  const std::string_view arg =
      colon == std::string_view::npos ? std::string_view() : spec.substr(colon + 1);
  if (name == "identity" && arg.empty()) return AffineMap::Identity();
  if (name == "hflip" && arg.empty()) return AffineMap::HorizontalFlip(width);
  if (name == "vflip" && arg.empty()) return AffineMap::VerticalFlip(height);
  if (name == "scale") {
    DETKIT_ASSIGN_OR_RETURN(double s, ParseReal(arg, "scale view"));
    if (!(s > 0.0)) return Usage("scale view: factor must be positive");
    return AffineMap::Scaling(1.0 / s, 1.0 / s);
  }
  if (name == "affine") {
    const auto parts = SplitOn(arg, ',');
    if (parts.size() != 6) {
      return Usage("affine view: expected six coefficients a,b,tx,c,d,ty");
    }
    double v[6];
    for (int i = 0; i < 6; ++i) {
      DETKIT_ASSIGN_OR_RETURN(v[i], ParseReal(parts[i], "affine view"));
    }
    const AffineMap map(v[0], v[1], v[2], v[3], v[4], v[5]);
    if (!map.IsInvertible()) return Usage("affine view: singular map");
    return map;
  }
  return Usage(fmt::format("unknown view transform '{}'", spec));
}

namespace {

bool NeedsImageSize(std::string_view spec) {
  return spec == "hflip" || spec == "vflip";
}

// --- Subcommands ---------------------------------------------------------------

absl::Status RunEvaluate(const Options& o, std::ostream& out) {
  DETKIT_ASSIGN_OR_RETURN(ApMode mode, ParseApMode(o.ap_mode));
  DETKIT_ASSIGN_OR_RETURN(auto gt, LoadAnnotations(o.gt));
  DETKIT_ASSIGN_OR_RETURN(auto pred, LoadDetections(o.pred));
  return Emit(o.out, ReportToJson(Evaluate(gt, pred, o.iou, mode)) + "\n", out);
}

absl::Status RunSweep(const Options& o, std::ostream& out) {
  DETKIT_ASSIGN_OR_RETURN(ApMode mode, ParseApMode(o.ap_mode));
  DETKIT_ASSIGN_OR_RETURN(auto gt, LoadAnnotations(o.gt));
  DETKIT_ASSIGN_OR_RETURN(auto pred, LoadDetections(o.pred));
  return Emit(o.out,
              ReportsToJson(ThresholdSweep(gt, pred, o.ious, mode)) + "\n", out);
}

absl::Status RunPerImageStep(const Options& o, const PostStep& step,
                             std::ostream& out) {
  const absl::Status valid = ValidatePostChain({step});
  if (!valid.ok()) return Usage(Message(valid));
  DETKIT_ASSIGN_OR_RETURN(auto pred, LoadDetections(o.pred));
  const PostChain chain = {step};
  const auto result = PerImage(pred, o.jobs, [&](std::span<const Detection> d) {
    return ApplyChain(d, chain);
  });
  return EmitDetections(o.out, result, out);
}

absl::StatusOr<SoftNmsConfig> SoftNmsFromFlags(const Options& o) {
  SoftNmsConfig c;
  c.decay = o.decay == "linear" ? SoftNmsDecay::kLinear : SoftNmsDecay::kGaussian;
  c.sigma = o.sigma;
  c.iou_trigger = o.iou_trigger;
  c.prune_score = o.prune_score;
  c.prune = o.prune_mode == "retained" ? SoftNmsPrune::kRetainedFraction
                                       : SoftNmsPrune::kAbsolute;
  c.min_input_score = o.min_input_score;
  const absl::Status valid = ValidateSoftNmsConfig(c);
  if (!valid.ok()) return Usage(Message(valid));
  return c;
}

absl::Status RunFilter(const Options& o, std::ostream& out) {
  DETKIT_ASSIGN_OR_RETURN(auto pred, LoadDetections(o.pred));
  return EmitDetections(o.out, FilterConfidence(pred, o.min_score), out);
}

absl::Status RunWbf(const Options& o, std::ostream& out) {
  FusionConfig config;
  config.iou_threshold = o.wbf_iou;
  config.weights = o.weights;
  DETKIT_ASSIGN_OR_RETURN(config.score_mode, ParseFusionScoreMode(o.score_mode));
  if (const absl::Status s = ValidateFusionConfig(config, o.preds.size());
      !s.ok()) {
    return Usage(Message(s));
  }
  PostChain chain;
  for (const std::string& spec : o.post) {
    DETKIT_ASSIGN_OR_RETURN(PostStep step, ParsePostStep(spec));
    chain.push_back(step);
  }

  const size_t models = o.preds.size();
  // image -> per-model detections of that image
  std::map<std::string, std::vector<std::vector<Detection>>, std::less<>> images;
  for (size_t m = 0; m < models; ++m) {
    DETKIT_ASSIGN_OR_RETURN(auto pred, LoadDetections(o.preds[m]));
    for (Detection& d : pred) {
      auto& slot = images[d.image_id];
      if (slot.empty()) slot.resize(models);
      slot[m].push_back(std::move(d));
    }
  }
  std::vector<const std::vector<std::vector<Detection>>*> work;
  for (const auto& [id, per_model] : images) work.push_back(&per_model);
  std::vector<absl::StatusOr<std::vector<Detection>>> fused(work.size());
  ParallelFor(work.size(), o.jobs, [&](size_t i) {
    fused[i] = WeightedBoxesFusion(*work[i], config);
  });
  std::vector<Detection> all;
  for (auto& f : fused) {
    if (!f.ok()) return f.status();
    all.insert(all.end(), f->begin(), f->end());
  }
  // Clusters never span images, so the global order is recovered by the
  // same stable sort the single-pass fusion ends with.
  std::stable_sort(all.begin(), all.end(), RanksBefore);
  if (!chain.empty()) {
    all = PerImage(all, o.jobs, [&](std::span<const Detection> d) {
      return ApplyChain(d, chain);
    });
  }
  return EmitDetections(o.out, all, out);
}

absl::Status RunTtaMerge(const Options& o, std::ostream& out) {
  if (!(o.tta_nms_iou > 0.0 && o.tta_nms_iou <= 1.0)) {
    return Usage("--nms-iou must be in (0, 1]");
  }
  struct ViewSpec {
    std::string transform;
    std::map<std::string, std::vector<Detection>, std::less<>> by_image;
  };
  std::vector<ViewSpec> views;
  bool need_metas = false;
  for (const std::string& v : o.views) {
    const size_t eq = v.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == v.size()) {
      return Usage(fmt::format("--view expects transform=path, got '{}'", v));
    }
    ViewSpec spec;
    spec.transform = v.substr(0, eq);
    // Validate the spelling up front with a dummy size.
    DETKIT_RETURN_IF_ERROR(ParseViewTransform(spec.transform, 1, 1).status());
    need_metas |= NeedsImageSize(spec.transform);
    DETKIT_ASSIGN_OR_RETURN(auto pred, LoadDetections(v.substr(eq + 1)));
    spec.by_image = GroupByImage(pred);
    views.push_back(std::move(spec));
  }
  if (need_metas && o.metas.empty()) {
    return Usage("flip views need --metas for image sizes");
  }
  MetaIndex metas;
  if (!o.metas.empty()) {
    DETKIT_ASSIGN_OR_RETURN(metas, LoadImageMetas(o.metas));
  }
  std::set<std::string, std::less<>> ids;
  for (const ViewSpec& v : views) {
    for (const auto& [id, d] : v.by_image) ids.insert(id);
  }
  const std::vector<std::string> order(ids.begin(), ids.end());
  std::vector<absl::StatusOr<std::vector<Detection>>> merged(order.size());
  ParallelFor(order.size(), o.jobs, [&](size_t i) {
    const std::string& id = order[i];
    int width = 1, height = 1;
    if (need_metas) {
      const auto it = metas.find(id);
      if (it == metas.end()) {
        merged[i] = absl::NotFoundError(
            fmt::format("no image metadata for '{}'", id));
        return;
      }
      width = it->second.width;
      height = it->second.height;
    }
    std::vector<TtaView> image_views;
    for (const ViewSpec& v : views) {
      auto map = ParseViewTransform(v.transform, width, height);
      if (!map.ok()) {
        merged[i] = map.status();
        return;
      }
      TtaView view{{*map, v.transform}, {}};
      if (const auto it = v.by_image.find(id); it != v.by_image.end()) {
        view.detections = it->second;
      }
      image_views.push_back(std::move(view));
    }
    merged[i] = TtaMerge(image_views, o.tta_nms_iou);
  });
  std::vector<Detection> all;
  for (auto& m : merged) {
    if (!m.ok()) return m.status();
    all.insert(all.end(), m->begin(), m->end());
  }
  return EmitDetections(o.out, all, out);
}

absl::Status RunPseudoLabel(const Options& o, std::ostream& out) {
  DETKIT_ASSIGN_OR_RETURN(auto pred, LoadDetections(o.pred));
  return EmitAnnotations(o.out, PseudoLabel(pred, o.pseudo_min_score), out);
}

absl::Status RunMergeAnnotations(const Options& o, std::ostream& out,
                                 std::ostream& err) {
  DETKIT_ASSIGN_OR_RETURN(auto gt, LoadAnnotations(o.gt));
  std::vector<DuplicatePair> pairs;
  if (!o.pairs.empty()) {
    DETKIT_ASSIGN_OR_RETURN(pairs, LoadDuplicatePairs(o.pairs));
  }
  JoinResult joined = JoinDuplicates(gt, pairs);
  for (const std::string& w : joined.warnings) err << "warning: " << w << "\n";
  return EmitAnnotations(o.out, MergeIntersecting(joined.annotations), out);
}

std::string IssuesToJson(std::span<const Issue> issues) {
  Json array = Json::array();
  for (const Issue& issue : issues) {
    array.push_back({{"kind", std::string(IssueKindName(issue.kind))},
                     {"filename", issue.image_id},
                     {"index", issue.index},
                     {"message", issue.message}});
  }
  return array.dump(2) + "\n";
}

absl::Status RunValidate(const Options& o, std::ostream& out, bool* failed) {
  DETKIT_ASSIGN_OR_RETURN(auto gt, LoadAnnotations(o.gt));
  DETKIT_ASSIGN_OR_RETURN(auto metas, LoadImageMetas(o.metas));
  const std::vector<Issue> issues = Validate(gt, metas);
  DETKIT_RETURN_IF_ERROR(Emit(o.out, IssuesToJson(issues), out));
  *failed = o.strict && !issues.empty();
  return absl::OkStatus();
}

// Writes a YOLO label directory; a fresh directory appears all at once.
absl::Status SaveYoloDirectory(std::span<const Annotation> annotations,
                               const MetaIndex& metas, const fs::path& dir) {
  std::error_code ec;
  if (fs::exists(dir, ec)) return SaveYolo(annotations, metas, dir);
  fs::path staging = dir;
  staging += fmt::format(".tmp.{}", ::getpid());
  fs::remove_all(staging, ec);
  absl::Status saved = SaveYolo(annotations, metas, staging);
  if (saved.ok()) {
    fs::rename(staging, dir, ec);
    if (ec) {
      saved = absl::InternalError(
          fmt::format("cannot rename onto {}: {}", dir.string(), ec.message()));
    }
  }
  if (!saved.ok()) fs::remove_all(staging, ec);
  return saved;
}

absl::Status RunConvert(const Options& o, std::ostream& out) {
  const bool yolo_side = o.from == "yolo" || o.to == "yolo";
  if (yolo_side && o.metas.empty()) {
    return Usage("YOLO conversion needs --metas");
  }
  MetaIndex metas;
  if (yolo_side) {
    DETKIT_ASSIGN_OR_RETURN(metas, LoadImageMetas(o.metas));
  }
  std::vector<Annotation> annotations;
  if (o.from == "yolo") {
    DETKIT_ASSIGN_OR_RETURN(annotations, LoadYolo(o.input, metas));
  } else {
    DETKIT_ASSIGN_OR_RETURN(annotations, LoadAnnotations(o.input));
  }
  if (o.to == "yolo") {
    if (o.output.empty() || o.output == "-") {
      return Usage("YOLO output needs a directory in --output");
    }
    return SaveYoloDirectory(annotations, metas, o.output);
  }
  return EmitAnnotations(o.output, annotations, out);
}

absl::Status RunAnchors(const Options& o, std::ostream& out) {
  if (o.k < 1) return Usage("--k must be >= 1");
  DETKIT_ASSIGN_OR_RETURN(auto gt, LoadAnnotations(o.gt));
  std::vector<Box> boxes;
  boxes.reserve(gt.size());
  for (const Annotation& a : gt) boxes.push_back(a.box);
  DETKIT_ASSIGN_OR_RETURN(auto priors, ClusterAnchors(boxes, o.k, o.seed));
  std::string text = "width,height\n";
  for (const AnchorPrior& p : priors) {
    text += fmt::sprintf("%.6f,%.6f\n", p.width, p.height);
  }
  return Emit(o.out, text, out);
}

// --- augment -------------------------------------------------------------------

struct ManifestRow {
  size_t line = 0;
  fs::path input;
  fs::path output;
  std::string operation;
  std::map<std::string, std::string, std::less<>> params;
  uint64_t seed = 0;
};

absl::StatusOr<std::vector<ManifestRow>> LoadManifest(const fs::path& path) {
  DETKIT_ASSIGN_OR_RETURN(std::string content, ReadFile(path));
  const fs::path base = path.parent_path();
  std::vector<ManifestRow> rows;
  bool header = true;
  size_t line_no = 0;
  for (std::string_view line : SplitOn(content, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = SplitOn(line, ',');
    const auto where = [&] {
      return fmt::format("{}:{}: ", path.string(), line_no);
    };
    if (header) {
      if (line != "input,output,operation,params,seed") {
        return absl::InvalidArgumentError(
            where() + "expected header input,output,operation,params,seed");
      }
      header = false;
      continue;
    }
    if (fields.size() != 5) {
      return absl::InvalidArgumentError(where() + "expected 5 fields");
    }
    ManifestRow row;
    row.line = line_no;
    row.input = base / std::string(fields[0]);
    row.output = base / std::string(fields[1]);
    row.operation = std::string(fields[2]);
    auto params = ParseKeyValues(fields[3], ';', "params");
    if (!params.ok()) {
      return absl::InvalidArgumentError(where() + Message(params.status()));
    }
    row.params = *std::move(params);
    if (!fields[4].empty()) {
      const std::string s(fields[4]);
      size_t used = 0;
      try {
        row.seed = std::stoull(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size() || s.front() == '-') {
        return absl::InvalidArgumentError(where() + "seed must be an unsigned integer");
      }
    }
    if (fields[0].empty() || fields[1].empty()) {
      return absl::InvalidArgumentError(where() + "empty input or output");
    }
    rows.push_back(std::move(row));
  }
  if (header) {
    return absl::InvalidArgumentError(path.string() + ": missing header");
  }
  return rows;
}

// Parameter lookup for one manifest row; absent values are drawn from the
// row's seeded generator.
class RowParams {
 public:
  explicit RowParams(const ManifestRow& row) : row_(row), rng_(row.seed) {}

  absl::StatusOr<double> Real(std::string_view key, double lo, double hi) {
    used_.emplace(key);
    if (const auto it = row_.params.find(key); it != row_.params.end()) {
      return ParseReal(it->second, key);
    }
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  absl::StatusOr<double> RealOr(std::string_view key, double fallback) {
    used_.emplace(key);
    if (const auto it = row_.params.find(key); it != row_.params.end()) {
      return ParseReal(it->second, key);
    }
    return fallback;
  }
  absl::StatusOr<int> IntOr(std::string_view key, int fallback) {
    used_.emplace(key);
    if (const auto it = row_.params.find(key); it != row_.params.end()) {
      return ParseInt(it->second, key);
    }
    return fallback;
  }
  std::string StringOr(std::string_view key, std::string fallback) {
    used_.emplace(key);
    if (const auto it = row_.params.find(key); it != row_.params.end()) {
      return it->second;
    }
    return fallback;
  }
  bool Has(std::string_view key) const { return row_.params.contains(key); }
  uint64_t seed() const { return row_.seed; }

  absl::Status CheckAllUsed() const {
    for (const auto& [key, value] : row_.params) {
      if (!used_.contains(key)) {
        return absl::InvalidArgumentError(fmt::format(
            "unknown parameter '{}' for {}", key, row_.operation));
      }
    }
    return absl::OkStatus();
  }

 private:
  const ManifestRow& row_;
  std::mt19937_64 rng_;
  std::set<std::string, std::less<>> used_;
};

struct AugmentOutput {
  Image image;
  std::vector<Box> boxes;
};

using BoxIndex = std::map<std::string, std::vector<Box>, std::less<>>;

std::vector<Box> BoxesFor(const BoxIndex& index, const fs::path& image) {
  const auto it = index.find(image.filename().string());
  return it == index.end() ? std::vector<Box>{} : it->second;
}

absl::StatusOr<AugmentOutput> ApplyRow(const ManifestRow& row,
                                       const BoxIndex& boxes) {
  DETKIT_ASSIGN_OR_RETURN(Image image, ReadPpm(row.input));
  std::vector<Box> in_boxes = BoxesFor(boxes, row.input);
  RowParams p(row);
  AugmentOutput result;
  const std::string& op = row.operation;
  const int w = image.width();
  const int h = image.height();

  if (op == "mixup") {
    const std::string other = p.StringOr("with", "");
    if (other.empty()) {
      return absl::InvalidArgumentError("mixup needs with=<image>");
    }
    const fs::path other_path = row.input.parent_path().empty()
                                    ? fs::path(other)
                                    : row.input.parent_path() / other;
    DETKIT_ASSIGN_OR_RETURN(Image b, ReadPpm(other_path));
    DETKIT_ASSIGN_OR_RETURN(double alpha, p.RealOr("alpha", kDefaultMixupAlpha));
    double lambda;
    if (p.Has("lambda")) {
      DETKIT_ASSIGN_OR_RETURN(lambda, p.RealOr("lambda", 0.5));
    } else {
      DETKIT_ASSIGN_OR_RETURN(lambda, SampleMixupLambda(alpha, p.seed()));
    }
    DETKIT_ASSIGN_OR_RETURN(
        MixupResult mixed,
        Mixup(image, in_boxes, b, BoxesFor(boxes, other_path), lambda));
    result.image = std::move(mixed.image);
    for (const WeightedBox& wb : mixed.boxes) result.boxes.push_back(wb.box);
  } else if (op == "motion-blur") {
    DETKIT_ASSIGN_OR_RETURN(int length, p.IntOr("length", 9));
    DETKIT_ASSIGN_OR_RETURN(double angle, p.Real("angle", 0.0, 180.0));
    DETKIT_ASSIGN_OR_RETURN(result.image, MotionBlur(image, length, angle));
    result.boxes = in_boxes;
  } else if (op == "gaussian-blur" || op == "median-blur") {
    DETKIT_ASSIGN_OR_RETURN(int size, p.IntOr("size", 3));
    DETKIT_ASSIGN_OR_RETURN(
        result.image,
        Blur(image, op == "gaussian-blur" ? BlurKind::kGaussian : BlurKind::kMedian,
             size));
    result.boxes = in_boxes;
  } else if (op == "rgb-shift") {
    RgbShift s;
    DETKIT_ASSIGN_OR_RETURN(s.red, p.Real("r", 0.0, 10.0));
    DETKIT_ASSIGN_OR_RETURN(s.green, p.Real("g", 0.0, 10.0));
    DETKIT_ASSIGN_OR_RETURN(s.blue, p.Real("b", 0.0, 10.0));
    result.image = ColorAdjust(image, s);
    result.boxes = in_boxes;
  } else if (op == "hsv-shift") {
    HsvShift s;
    DETKIT_ASSIGN_OR_RETURN(s.hue, p.Real("h", 0.0, 20.0));
    DETKIT_ASSIGN_OR_RETURN(s.saturation, p.Real("s", 0.0, 20.0 / 255.0));
    DETKIT_ASSIGN_OR_RETURN(s.value, p.Real("v", 0.0, 20.0 / 255.0));
    result.image = ColorAdjust(image, s);
    result.boxes = in_boxes;
  } else if (op == "brightness-contrast") {
    BrightnessContrast s;
    DETKIT_ASSIGN_OR_RETURN(s.beta, p.Real("beta", -0.2, 0.2));
    DETKIT_ASSIGN_OR_RETURN(s.alpha, p.Real("alpha", 0.8, 1.2));
    result.image = ColorAdjust(image, s);
    result.boxes = in_boxes;
  } else if (op == "hflip" || op == "vflip" || op == "affine") {
    AffineMap map;
    if (op == "hflip") {
      map = AffineMap::HorizontalFlip(w);
    } else if (op == "vflip") {
      map = AffineMap::VerticalFlip(h);
    } else {
      DETKIT_ASSIGN_OR_RETURN(double angle, p.Real("rotate", -10.0, 10.0));
      DETKIT_ASSIGN_OR_RETURN(double scale, p.Real("scale", 0.9, 1.1));
      DETKIT_ASSIGN_OR_RETURN(double tx, p.RealOr("tx", 0.0));
      DETKIT_ASSIGN_OR_RETURN(double ty, p.RealOr("ty", 0.0));
      if (!(scale > 0.0)) {
        return absl::InvalidArgumentError("affine scale must be positive");
      }
      const double cx = w / 2.0;
      const double cy = h / 2.0;
      map = AffineMap::Compose(
          AffineMap::Translation(tx, ty),
          AffineMap::Compose(AffineMap::Scaling(scale, scale, cx, cy),
                             AffineMap::Rotation(angle, cx, cy)));
    }
    DETKIT_ASSIGN_OR_RETURN(AffineResult mapped,
                            FlipOrAffine(image, in_boxes, map));
    result.image = std::move(mapped.image);
    result.boxes = std::move(mapped.boxes);
  } else if (op == "shades-of-gray") {
    DETKIT_ASSIGN_OR_RETURN(double norm,
                            p.RealOr("p", kDefaultShadesOfGrayNorm));
    DETKIT_ASSIGN_OR_RETURN(result.image, ShadesOfGray(image, norm));
    result.boxes = in_boxes;
  } else if (op == "nlm") {
    NlmParams params;
    DETKIT_ASSIGN_OR_RETURN(params.h, p.RealOr("h", params.h));
    DETKIT_ASSIGN_OR_RETURN(params.h_color, p.RealOr("h_color", params.h_color));
    DETKIT_ASSIGN_OR_RETURN(params.template_size,
                            p.IntOr("template", params.template_size));
    DETKIT_ASSIGN_OR_RETURN(params.search_size,
                            p.IntOr("search", params.search_size));
    DETKIT_ASSIGN_OR_RETURN(result.image, DenoiseNlm(image, params));
    result.boxes = in_boxes;
  } else {
    return absl::InvalidArgumentError(
        fmt::format("unknown operation '{}'", op));
  }
  DETKIT_RETURN_IF_ERROR(p.CheckAllUsed());
  return result;
}

absl::Status RunAugment(const Options& o, std::ostream& out) {
  if (!o.annotations_out.empty() && o.annotations.empty()) {
    return Usage("--annotations-out needs --annotations");
  }
  DETKIT_ASSIGN_OR_RETURN(auto rows, LoadManifest(o.manifest));
  BoxIndex boxes;
  if (!o.annotations.empty()) {
    DETKIT_ASSIGN_OR_RETURN(auto gt, LoadAnnotations(o.annotations));
    for (const Annotation& a : gt) boxes[a.image_id].push_back(a.box);
  }
  std::set<fs::path> outputs;
  for (const ManifestRow& row : rows) {
    if (!outputs.insert(row.output.lexically_normal()).second) {
      return absl::InvalidArgumentError(fmt::format(
          "{}:{}: output {} is written twice", o.manifest, row.line,
          row.output.string()));
    }
  }
  // Rows run independently; each result lands in its own slot.
  std::vector<absl::StatusOr<AugmentOutput>> results(rows.size());
  ParallelFor(rows.size(), o.jobs, [&](size_t i) {
    results[i] = ApplyRow(rows[i], boxes);
  });
  for (size_t i = 0; i < rows.size(); ++i) {
    if (!results[i].ok()) {
      return absl::Status(results[i].status().code(),
                          fmt::format("{}:{}: {}", o.manifest, rows[i].line,
                                      Message(results[i].status())));
    }
  }
  std::vector<absl::Status> written(rows.size());
  ParallelFor(rows.size(), o.jobs, [&](size_t i) {
    written[i] = WritePpm(results[i]->image, rows[i].output);
  });
  for (const absl::Status& s : written) DETKIT_RETURN_IF_ERROR(s);
  if (!o.annotations_out.empty()) {
    std::vector<Annotation> annotations;
    for (size_t i = 0; i < rows.size(); ++i) {
      for (const Box& b : results[i]->boxes) {
        annotations.push_back({rows[i].output.filename().string(), b});
      }
    }
    DETKIT_RETURN_IF_ERROR(
        EmitAnnotations(o.annotations_out, annotations, out));
  }
  return absl::OkStatus();
}

// --- Wiring --------------------------------------------------------------------

Json HelpJson(CLI::App& app) {
  Json help;
  help["name"] = "detkit";
  help["version"] = DETKIT_VERSION;
  help["description"] = app.get_description();
  auto options_of = [](const CLI::App* a) {
    Json list = Json::array();
    for (const CLI::Option* opt : a->get_options()) {
      Json entry;
      entry["name"] = opt->get_name(false, true);
      entry["description"] = opt->get_description();
      entry["type"] = opt->get_type_name();
      entry["required"] = opt->get_required();
      entry["repeatable"] = opt->get_items_expected_max() > 1;
      if (!opt->get_default_str().empty()) {
        entry["default"] = opt->get_default_str();
      }
      list.push_back(std::move(entry));
    }
    return list;
  };
  help["options"] = options_of(&app);
  Json subs = Json::array();
  for (const CLI::App* sub : app.get_subcommands({})) {
    Json entry;
    entry["name"] = sub->get_name();
    entry["description"] = sub->get_description();
    entry["options"] = options_of(sub);
    subs.push_back(std::move(entry));
  }
  help["subcommands"] = std::move(subs);
  return help;
}

template <typename T>
CLI::Option* Real(CLI::App* sub, const std::string& name, T& value,
                  const std::string& description, double lo = 0.0,
                  double hi = 1.0) {
  return sub->add_option(name, value, description)
      ->capture_default_str()
      ->check(CLI::Range(lo, hi));
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app("Detection post-processing, ensembling and evaluation toolkit",
               "detkit");
  app.set_help_flag();
  app.require_subcommand(1);
  // Lets --jobs appear on either side of the subcommand name.
  app.fallthrough();
  app.add_option("--jobs", o.jobs, "Worker threads for per-image work")
      ->capture_default_str()
      ->check(CLI::Range(1, 1024));
  app.add_flag("--version", "Print the version and exit");
  app.add_flag("--help", "Print this interface description as JSON and exit");

  const auto ap_modes = CLI::IsMember({"allpoint", "elevenpoint"});
  auto add_out = [&](CLI::App* sub, const std::string& what) {
    sub->add_option("--out", o.out, what + " (stdout when omitted)");
  };

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Match detections to ground truth and report metrics as JSON");
  evaluate->add_option("--gt", o.gt, "Ground-truth CSV")->required();
  evaluate->add_option("--pred", o.pred, "Detections CSV")->required();
  Real(evaluate, "--iou", o.iou, "IoU threshold for a match", 1e-12, 1.0);
  evaluate->add_option("--ap-mode", o.ap_mode, "AP interpolation")
      ->capture_default_str()
      ->check(ap_modes);
  add_out(evaluate, "Report JSON");

  CLI::App* sweep = app.add_subcommand(
      "sweep", "Evaluate at several IoU thresholds; JSON array of reports");
  sweep->add_option("--gt", o.gt, "Ground-truth CSV")->required();
  sweep->add_option("--pred", o.pred, "Detections CSV")->required();
  sweep->add_option("--ious", o.ious, "Comma-separated IoU thresholds")
      ->delimiter(',')
      ->capture_default_str()
      ->check(CLI::Range(1e-12, 1.0));
  sweep->add_option("--ap-mode", o.ap_mode, "AP interpolation")
      ->capture_default_str()
      ->check(ap_modes);
  add_out(sweep, "Report JSON");

  CLI::App* nms = app.add_subcommand("nms", "Greedy non-maximum suppression per image");
  nms->add_option("--pred", o.pred, "Detections CSV")->required();
  Real(nms, "--iou", o.nms_iou, "Suppression IoU", 1e-12, 1.0);
  add_out(nms, "Detections CSV");

  CLI::App* softnms = app.add_subcommand("softnms", "Soft-NMS per image");
  softnms->add_option("--pred", o.pred, "Detections CSV")->required();
  softnms->add_option("--decay", o.decay, "Score decay family")
      ->capture_default_str()
      ->check(CLI::IsMember({"gaussian", "linear"}));
  Real(softnms, "--sigma", o.sigma, "Gaussian decay width", 1e-12, 1e12);
  Real(softnms, "--iou-trigger", o.iou_trigger, "Linear decay IoU trigger",
       1e-12, 1.0);
  Real(softnms, "--prune-score", o.prune_score, "Drop detections below this");
  softnms->add_option("--prune-mode", o.prune_mode,
                      "absolute: decayed score; retained: decayed/original")
      ->capture_default_str()
      ->check(CLI::IsMember({"absolute", "retained"}));
  Real(softnms, "--min-input-score", o.min_input_score,
       "Drop inputs below this before decaying");
  add_out(softnms, "Detections CSV");

  CLI::App* filter =
      app.add_subcommand("filter", "Keep detections with score >= --min-score");
  filter->add_option("--pred", o.pred, "Detections CSV")->required();
  Real(filter, "--min-score", o.min_score, "Minimum confidence");
  add_out(filter, "Detections CSV");

  CLI::App* remove_overlaps = app.add_subcommand(
      "remove-overlaps", "Keep the best detection of each overlapping group");
  remove_overlaps->add_option("--pred", o.pred, "Detections CSV")->required();
  Real(remove_overlaps, "--overlap", o.overlap, "Grouping IoU", 1e-12, 1.0);
  add_out(remove_overlaps, "Detections CSV");

  CLI::App* adaptive = app.add_subcommand(
      "adaptive-suppress",
      "Score filter that keeps an image's only detection regardless of score");
  adaptive->add_option("--pred", o.pred, "Detections CSV")->required();
  Real(adaptive, "--threshold", o.adaptive_threshold, "Minimum confidence");
  add_out(adaptive, "Detections CSV");

  CLI::App* wbf = app.add_subcommand(
      "wbf", "Weighted boxes fusion across models, then optional post steps");
  wbf->add_option("--pred", o.preds, "Detections CSV, once per model")
      ->required();
  wbf->add_option("--weights", o.weights,
                  "Comma-separated model weights (equal when omitted)")
      ->delimiter(',');
  Real(wbf, "--iou", o.wbf_iou, "Cluster IoU", 1e-12, 1.0);
  wbf->add_option("--score-mode", o.score_mode, "Fused score rule")
      ->capture_default_str()
      ->check(CLI::IsMember({"mean", "mean_rescaled"}));
  wbf->add_option("--post", o.post,
                  "Post step, repeatable: nms:iou=V | softnms:decay=D,sigma=V,"
                  "trigger=V,prune=V,prune_mode=M,min_input=V | filter:min=V | "
                  "remove-overlaps:overlap=V | adaptive-suppress:threshold=V");
  add_out(wbf, "Detections CSV");

  CLI::App* tta = app.add_subcommand(
      "tta-merge", "Map test-time-augmentation views back and merge with NMS");
  tta->add_option("--view", o.views,
                  "TRANSFORM=PATH, repeatable; TRANSFORM is identity, hflip, "
                  "vflip, scale:S or affine:a,b,tx,c,d,ty (view to original)")
      ->required();
  tta->add_option("--metas", o.metas, "Image size CSV (needed for flips)");
  Real(tta, "--nms-iou", o.tta_nms_iou, "NMS IoU after pooling", 1e-12, 1.0);
  add_out(tta, "Detections CSV");

  CLI::App* pseudo = app.add_subcommand(
      "pseudo-label", "Turn confident detections into annotations");
  pseudo->add_option("--pred", o.pred, "Detections CSV")->required();
  Real(pseudo, "--min-score", o.pseudo_min_score, "Minimum confidence");
  add_out(pseudo, "Annotations CSV");

  CLI::App* merge = app.add_subcommand(
      "merge-annotations",
      "Join duplicate image pairs, then merge intersecting boxes");
  merge->add_option("--gt", o.gt, "Annotations CSV")->required();
  merge->add_option("--pairs", o.pairs, "Duplicate pair CSV");
  add_out(merge, "Annotations CSV");

  CLI::App* validate = app.add_subcommand(
      "validate", "Report annotation problems as a JSON array");
  validate->add_option("--gt", o.gt, "Annotations CSV")->required();
  validate->add_option("--metas", o.metas, "Image size CSV")->required();
  validate->add_flag("--strict", o.strict, "Exit 1 when any issue is found");
  add_out(validate, "Issue JSON");

  CLI::App* convert = app.add_subcommand(
      "convert", "Convert annotations between CSV and YOLO label directories");
  convert->add_option("--from", o.from, "Input format")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "yolo"}));
  convert->add_option("--to", o.to, "Output format")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "yolo"}));
  convert->add_option("--input", o.input, "CSV file or YOLO directory")
      ->required();
  convert->add_option("--output", o.output,
                      "CSV file (stdout when omitted) or YOLO directory");
  convert->add_option("--metas", o.metas, "Image size CSV (needed for YOLO)");

  CLI::App* augment = app.add_subcommand(
      "augment", "Apply image operations listed in a manifest CSV");
  augment->add_option("--manifest", o.manifest,
                      "CSV with input,output,operation,params,seed")
      ->required();
  augment->add_option("--annotations", o.annotations,
                      "Boxes of the input images, keyed by file name");
  augment->add_option("--annotations-out", o.annotations_out,
                      "Boxes of the output images");

  CLI::App* anchors = app.add_subcommand(
      "anchors", "Cluster box sizes into anchor priors with 1-IoU k-means");
  anchors->add_option("--gt", o.gt, "Annotations CSV")->required();
  anchors->add_option("--k", o.k, "Number of priors")->capture_default_str();
  anchors->add_option("--seed", o.seed, "Seeding RNG seed")->capture_default_str();
  add_out(anchors, "Prior CSV");

  for (const std::string& a : args) {
    if (a == "--help" || a == "-h") {
      out << HelpJson(app).dump(2) << "\n";
      return kExitOk;
    }
    if (a == "--version") {
      out << "detkit " << DETKIT_VERSION << "\n";
      return kExitOk;
    }
  }

  std::vector<const char*> argv = {"detkit"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    err << "detkit: " << e.what() << "\n";
    return kExitUsage;
  }

  absl::Status status;
  bool strict_failure = false;
  if (evaluate->parsed()) {
    status = RunEvaluate(o, out);
  } else if (sweep->parsed()) {
    status = RunSweep(o, out);
  } else if (nms->parsed()) {
    status = RunPerImageStep(o, NmsStep{o.nms_iou}, out);
  } else if (softnms->parsed()) {
    absl::StatusOr<SoftNmsConfig> config = SoftNmsFromFlags(o);
    status = config.ok() ? RunPerImageStep(o, SoftNmsStep{*config}, out)
                         : config.status();
  } else if (filter->parsed()) {
    status = RunFilter(o, out);
  } else if (remove_overlaps->parsed()) {
    status = RunPerImageStep(o, RemoveOverlapsStep{o.overlap}, out);
  } else if (adaptive->parsed()) {
    status = RunPerImageStep(o, AdaptiveSuppressStep{o.adaptive_threshold}, out);
  } else if (wbf->parsed()) {
    status = RunWbf(o, out);
  } else if (tta->parsed()) {
    status = RunTtaMerge(o, out);
  } else if (pseudo->parsed()) {
    status = RunPseudoLabel(o, out);
  } else if (merge->parsed()) {
    status = RunMergeAnnotations(o, out, err);
  } else if (validate->parsed()) {
    status = RunValidate(o, out, &strict_failure);
  } else if (convert->parsed()) {
    status = RunConvert(o, out);
  } else if (augment->parsed()) {
    status = RunAugment(o, out);
  } else if (anchors->parsed()) {
    status = RunAnchors(o, out);
  }

  if (!status.ok()) {
    err << "detkit: " << Message(status) << "\n";
    return IsUsageError(status) ? kExitUsage : kExitInputError;
  }
  return strict_failure ? kExitInputError : kExitOk;
}

}  // namespace detkit::cli
