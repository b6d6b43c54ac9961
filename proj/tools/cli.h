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
#ifndef DETKIT_TOOLS_CLI_H_
#define DETKIT_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "detkit/ensemble.h"
#include "detkit/postprocess.h"

namespace detkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitUsage = 2;

// Runs one invocation. `args` excludes the program name. Results go to the
// requested files (or `out` when no output path is given); diagnostics go to
// `err`.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

// "name" or "name:key=value,key=value", e.g. "softnms:decay=linear,prune=0.5".
absl::StatusOr<PostStep> ParsePostStep(std::string_view spec);

// "identity", "hflip", "vflip", "scale:S" or "affine:a,b,tx,c,d,ty". The
// result maps view coordinates back to the original image of the given size.
absl::StatusOr<AffineMap> ParseViewTransform(std::string_view spec, int width,
                                             int height);

}  // namespace detkit::cli

#endif  // DETKIT_TOOLS_CLI_H_
