// Copyright 2026 The AAD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "aad/error.hpp"

namespace aad {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kUnsupportedFormat: return "unsupported format";
    case ErrorKind::kBounds: return "bounds error";
    case ErrorKind::kEmptyInput: return "empty input";
    case ErrorKind::kConfiguration: return "configuration error";
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kUsage: return "usage error";
    case ErrorKind::kDivergence: return "divergence";
    case ErrorKind::kInsufficientFrames: return "insufficient frames";
    case ErrorKind::kInsufficientLength: return "insufficient length";
    case ErrorKind::kUndefinedMetric: return "undefined metric";
    case ErrorKind::kIo: return "i/o error";
  }
  return "error";
}

}  // namespace aad
