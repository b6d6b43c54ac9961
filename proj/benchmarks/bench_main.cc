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
// Microbenchmarks for the hot paths: IoU, suppression, fusion, evaluation and
// the non-local means denoiser.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "detkit/ensemble.h"
#include "detkit/imageops.h"
#include "detkit/metrics.h"
#include "detkit/postprocess.h"

namespace detkit {
namespace {

Box RandomBox(std::mt19937_64& rng, double side) {
  std::uniform_real_distribution<double> pos(0.0, side), len(4.0, side / 4);
  const double x = pos(rng), y = pos(rng);
  return {x, y, x + len(rng), y + len(rng)};
}

std::vector<Detection> RandomDetections(int n, int images, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  std::vector<Detection> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    out.push_back({"img_" + std::to_string(i % images), RandomBox(rng, 640),
                   score(rng)});
  }
  return out;
}

void BM_Iou(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<Box> boxes;
  for (int i = 0; i < 1024; ++i) boxes.push_back(RandomBox(rng, 640));
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Iou(boxes[i & 1023], boxes[(i + 7) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_Iou);

void BM_Nms(benchmark::State& state) {
  const auto dets = RandomDetections(static_cast<int>(state.range(0)), 1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(Nms(dets, 0.5));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Nms)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_SoftNmsGaussian(benchmark::State& state) {
  const auto dets = RandomDetections(static_cast<int>(state.range(0)), 1, 3);
  SoftNmsConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(SoftNms(dets, config));
}
BENCHMARK(BM_SoftNmsGaussian)->RangeMultiplier(4)->Range(16, 1024);

void BM_Wbf(benchmark::State& state) {
  std::vector<std::vector<Detection>> models;
  for (int m = 0; m < 3; ++m) {
    models.push_back(RandomDetections(static_cast<int>(state.range(0)), 50, 10 + m));
  }
  const FusionConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(WeightedBoxesFusion(models, config));
}
BENCHMARK(BM_Wbf)->RangeMultiplier(4)->Range(64, 4096);

void BM_Evaluate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto dets = RandomDetections(n, n / 2, 20);
  std::vector<Annotation> gt;
  for (const Detection& d : RandomDetections(n, n / 2, 21)) {
    gt.push_back({d.image_id, d.box});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(Evaluate(gt, dets, 0.5, ApMode::kAllPoint));
  }
}
BENCHMARK(BM_Evaluate)->RangeMultiplier(4)->Range(256, 16384);

void BM_Nlm(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  std::mt19937_64 rng(30);
  std::uniform_int_distribution<int> sample(0, 255);
  Image image(side, side);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x)
      for (int c = 0; c < 3; ++c) image.at(x, y, c) = static_cast<uint8_t>(sample(rng));
  NlmParams params;
  params.h = 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(DenoiseNlm(image, params));
}
BENCHMARK(BM_Nlm)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace detkit

BENCHMARK_MAIN();
