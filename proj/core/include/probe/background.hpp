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

#pragma once

#include <span>
#include <utility>

#include "probe/dataio.hpp"
#include "probe/image.hpp"

namespace probe {

/// Window for shadow-free composites and shadow evidence.
inline constexpr int kShadowWindowFrames = 50;

struct MedianPlate {
  int center = 0;
  int window = 0;
  Image pixels;
};

/// Per-pixel, per-channel median of a window of equally sized frames. Even
/// windows take the lower median. Throws on an empty window or size mismatch.
Image median_image(std::span<const Image> frames);

MedianPlate median_plate(std::span<const Image> frames, int center = 0);

/// Frames [first, last) of a window of `window` frames centred on
/// `frame_index`, shifted to stay inside [0, frame_count).
std::pair<int, int> window_range(int frame_index, int window, int frame_count);

/// Probe window covering one second of video.
int one_second_window(const SceneManifest& manifest);

MedianPlate plate_for_frame(const Dataset& dataset, int frame_index, int window);

/// Display/compositing base: the first training frame with no detections, or
/// the first one-second median when every frame is occupied.
Image background_image(const Dataset& dataset);

}  // namespace probe
