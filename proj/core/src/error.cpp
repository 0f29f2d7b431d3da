// Copyright 2026 The Scene Probe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "probe/error.hpp"

namespace probe {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kEmptyScene: return "empty_scene";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kInsufficientData: return "insufficient_data";
    case ErrorCode::kIllConditioned: return "ill_conditioned";
    case ErrorCode::kOffPlane: return "off_plane";
    case ErrorCode::kNoShadowEvidence: return "no_shadow_evidence";
  }
  return "unknown";
}

}  // namespace probe
