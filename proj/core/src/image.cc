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
#include "detkit/image.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "detkit/annotations.h"
#include "detkit/internal/status_macros.h"
#include "internal/strings.h"

namespace detkit {

Image::Image(int width, int height, uint8_t fill)
    : width_(width),
      height_(height),
      samples_(static_cast<size_t>(width) * height * kChannels, fill) {}

absl::StatusOr<Image> Image::FromSamples(int width, int height,
                                         std::vector<uint8_t> samples) {
  if (width <= 0 || height <= 0) {
    return absl::InvalidArgumentError(
        fmt::sprintf("image size must be positive, got %dx%d", width,
                        height));
  }
  if (samples.size() != static_cast<size_t>(width) * height * kChannels) {
    return absl::InvalidArgumentError(
        fmt::sprintf("expected %d samples for %dx%d RGB, got %d",
                        static_cast<size_t>(width) * height * kChannels, width,
                        height, samples.size()));
  }
  Image image;
  image.width_ = width;
  image.height_ = height;
  image.samples_ = std::move(samples);
  return image;
}

uint8_t QuantizeSample(double value) {
  if (!(value > 0.0)) return 0;  // also maps NaN to 0
  if (value >= 255.0) return 255;
  const double snapped = std::nearbyint(value * 1e9) / 1e9;
  return static_cast<uint8_t>(std::min(255.0, std::floor(snapped + 0.5)));
}

int Reflect101(int index, int size) {
  if (size <= 1) return 0;
  const int period = 2 * (size - 1);
  index %= period;
  if (index < 0) index += period;
  return index < size ? index : period - index;
}

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
absl::StatusOr<std::string_view> NextToken(std::string_view bytes,
                                           size_t& pos) {
  while (pos < bytes.size()) {
    const unsigned char ch = bytes[pos];
    if (ch == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(ch)) {
      ++pos;
    } else {
      break;
    }
  }
  const size_t start = pos;
  while (pos < bytes.size() &&
         !std::isspace(static_cast<unsigned char>(bytes[pos])) &&
         bytes[pos] != '#') {
    ++pos;
  }
  if (start == pos) return absl::InvalidArgumentError("truncated PPM header");
  return bytes.substr(start, pos - start);
}

absl::StatusOr<int> HeaderInt(std::string_view token, std::string_view name) {
  int value = 0;
  for (char ch : token) {
    if (!std::isdigit(static_cast<unsigned char>(ch)) || value > 1'000'000) {
      return absl::InvalidArgumentError(
          internal::StrCat("bad PPM ", name, " '", token, "'"));
    }
    value = value * 10 + (ch - '0');
  }
  return value;
}

}  // namespace

absl::StatusOr<Image> DecodePpm(std::string_view bytes) {
  size_t pos = 0;
  DETKIT_ASSIGN_OR_RETURN(std::string_view magic, NextToken(bytes, pos));
  if (magic != "P6") {
    return absl::InvalidArgumentError(
        internal::StrCat("not a binary PPM (magic '", magic, "')"));
  }
  DETKIT_ASSIGN_OR_RETURN(std::string_view w_tok, NextToken(bytes, pos));
  DETKIT_ASSIGN_OR_RETURN(std::string_view h_tok, NextToken(bytes, pos));
  DETKIT_ASSIGN_OR_RETURN(std::string_view max_tok, NextToken(bytes, pos));
  DETKIT_ASSIGN_OR_RETURN(int width, HeaderInt(w_tok, "width"));
  DETKIT_ASSIGN_OR_RETURN(int height, HeaderInt(h_tok, "height"));
  DETKIT_ASSIGN_OR_RETURN(int maxval, HeaderInt(max_tok, "maxval"));
  if (maxval != 255) {
    return absl::InvalidArgumentError(
        internal::StrCat("only maxval 255 is supported, got ", maxval));
  }
  if (pos >= bytes.size() ||
      !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    return absl::InvalidArgumentError("truncated PPM header");
  }
  ++pos;  // single whitespace byte before the raster
  const size_t expected = static_cast<size_t>(width) * height * Image::kChannels;
  if (bytes.size() - pos < expected) {
    return absl::InvalidArgumentError(
        fmt::sprintf("PPM raster truncated: need %d bytes, have %d",
                        expected, bytes.size() - pos));
  }
  std::vector<uint8_t> samples(bytes.begin() + pos,
                               bytes.begin() + pos + expected);
  return Image::FromSamples(width, height, std::move(samples));
}

std::string EncodePpm(const Image& image) {
  std::string out = fmt::sprintf("P6\n%d %d\n255\n", image.width(),
                                    image.height());
  const auto samples = image.samples();
  out.append(reinterpret_cast<const char*>(samples.data()), samples.size());
  return out;
}

absl::StatusOr<Image> ReadPpm(const std::filesystem::path& path) {
  DETKIT_ASSIGN_OR_RETURN(std::string bytes, ReadFile(path));
  auto image = DecodePpm(bytes);
  if (!image.ok()) {
    return absl::Status(image.status().code(),
                        internal::StrCat(path.string(), ": ",
                                     image.status().message()));
  }
  return image;
}

absl::Status WritePpm(const Image& image, const std::filesystem::path& path) {
  if (image.empty()) return absl::InvalidArgumentError("cannot write an empty image");
  return WriteFileAtomically(path, EncodePpm(image));
}

}  // namespace detkit
