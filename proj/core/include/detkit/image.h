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
#ifndef DETKIT_IMAGE_H_
#define DETKIT_IMAGE_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace detkit {

// 8-bit interleaved RGB raster, row-major.
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int width, int height, uint8_t fill = 0);

  // Fails unless samples.size() == 3 * width * height and both sides > 0.
  static absl::StatusOr<Image> FromSamples(int width, int height,
                                           std::vector<uint8_t> samples);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return samples_.empty(); }

  uint8_t at(int x, int y, int c) const { return samples_[Offset(x, y, c)]; }
  uint8_t& at(int x, int y, int c) { return samples_[Offset(x, y, c)]; }

  std::span<const uint8_t> samples() const { return samples_; }
  std::span<uint8_t> mutable_samples() { return samples_; }

  bool SameShape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  size_t Offset(int x, int y, int c) const {
    return (static_cast<size_t>(y) * width_ + x) * kChannels + c;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> samples_;
};

// Converts an intermediate value to a sample: snap to a 1e-9 grid (absorbs
// floating-point noise from reordered sums), round half away from zero, then
// clamp to [0, 255].
uint8_t QuantizeSample(double value);

// Reflect-101 border index ("gfedcb|abcdefgh|gfedcba").
int Reflect101(int index, int size);

// Binary PPM (P6, maxval 255).
absl::StatusOr<Image> DecodePpm(std::string_view bytes);
std::string EncodePpm(const Image& image);
absl::StatusOr<Image> ReadPpm(const std::filesystem::path& path);
absl::Status WritePpm(const Image& image, const std::filesystem::path& path);

}  // namespace detkit

#endif  // DETKIT_IMAGE_H_
