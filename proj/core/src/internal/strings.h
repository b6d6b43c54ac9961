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
#ifndef DETKIT_SRC_INTERNAL_STRINGS_H_
#define DETKIT_SRC_INTERNAL_STRINGS_H_

#include <iterator>
#include <string>
#include <string_view>
#include <vector>

#include "absl/strings/string_view.h"
#include "fmt/format.h"
#include "fmt/printf.h"
#include "fmt/ranges.h"

// String plumbing over std::string_view. (The system absl ships its own
// string_view type, so its string utilities do not accept std views.)

// Status messages come back as absl::string_view.
template <>
struct fmt::formatter<absl::string_view> : fmt::formatter<std::string_view> {
  template <typename Context>
  auto format(absl::string_view s, Context& ctx) const {
    return fmt::formatter<std::string_view>::format(
        std::string_view(s.data(), s.size()), ctx);
  }
};

namespace detkit::internal {

template <typename... Args>
void StrAppend(std::string* out, const Args&... args) {
  (fmt::format_to(std::back_inserter(*out), "{}", args), ...);
}

template <typename... Args>
std::string StrCat(const Args&... args) {
  std::string out;
  StrAppend(&out, args...);
  return out;
}

// Fields between separators, empty ones included.
inline std::vector<std::string_view> Split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t end = s.find(sep, start);
    if (end == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, end - start));
    start = end + 1;
  }
}

// Non-empty runs of characters not in `seps`.
inline std::vector<std::string_view> SplitAnySkipEmpty(std::string_view s,
                                                       std::string_view seps) {
  std::vector<std::string_view> parts;
  size_t pos = s.find_first_not_of(seps);
  while (pos != std::string_view::npos) {
    const size_t end = s.find_first_of(seps, pos);
    parts.push_back(s.substr(pos, end == std::string_view::npos
                                      ? std::string_view::npos
                                      : end - pos));
    if (end == std::string_view::npos) break;
    pos = s.find_first_not_of(seps, end);
  }
  return parts;
}

inline std::string_view StripWhitespace(std::string_view s) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  const size_t first = s.find_first_not_of(kSpace);
  if (first == std::string_view::npos) return {};
  const size_t last = s.find_last_not_of(kSpace);
  return s.substr(first, last - first + 1);
}

}  // namespace detkit::internal

#endif  // DETKIT_SRC_INTERNAL_STRINGS_H_
