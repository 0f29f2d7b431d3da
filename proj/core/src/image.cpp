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

#include "probe/image.hpp"

namespace probe {

Image::Image(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  pixels_.resize(pixel_count() * 3);
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    pixels_[i * 3 + 0] = fill.r;
    pixels_[i * 3 + 1] = fill.g;
    pixels_[i * 3 + 2] = fill.b;
  }
}

}  // namespace probe
