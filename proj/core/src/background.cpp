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

#include "probe/background.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "probe/error.hpp"

namespace probe {

Image median_image(std::span<const Image> frames) {
  if (frames.empty()) throw Error(ErrorCode::kInvalidArgument, "median: empty window");
  for (const Image& f : frames) {
    if (!f.same_size(frames.front())) {
      throw Error(ErrorCode::kInvalidArgument, "median: frame dimensions differ");
    }
  }
  const Image& first = frames.front();
  Image out(first.width(), first.height());
  const std::size_t n = frames.size();
  const std::size_t total = first.pixel_count() * 3;
  const std::size_t pick = (n - 1) / 2;
  if (n == 1) return first;

  // Selection per channel sample; the result does not depend on frame order.
  std::vector<const std::uint8_t*> src(n);
  for (std::size_t k = 0; k < n; ++k) src[k] = frames[k].data();
  std::uint8_t* dst = out.data();
  std::vector<std::uint8_t> values(n);
  for (std::size_t i = 0; i < total; ++i) {
    for (std::size_t k = 0; k < n; ++k) values[k] = src[k][i];
    std::nth_element(values.begin(), values.begin() + pick, values.end());
    dst[i] = values[pick];
  }
  return out;
}

MedianPlate median_plate(std::span<const Image> frames, int center) {
  MedianPlate plate;
  plate.center = center;
  plate.window = static_cast<int>(frames.size());
  plate.pixels = median_image(frames);
  return plate;
}

std::pair<int, int> window_range(int frame_index, int window, int frame_count) {
  if (frame_index < 0 || frame_index >= frame_count) {
    throw Error(ErrorCode::kInvalidArgument,
                "frame out of range: " + std::to_string(frame_index));
  }
  const int len = std::clamp(window, 1, frame_count);
  int first = frame_index - (len - 1) / 2;
  first = std::clamp(first, 0, frame_count - len);
  return {first, first + len};
}

int one_second_window(const SceneManifest& manifest) {
  return std::max(1, static_cast<int>(std::lround(manifest.fps)));
}

MedianPlate plate_for_frame(const Dataset& dataset, int frame_index, int window) {
  const auto [first, last] =
      window_range(frame_index, window, dataset.manifest().frame_count);
  std::vector<Image> frames;
  frames.reserve(last - first);
  for (int i = first; i < last; ++i) frames.push_back(dataset.frame(i));
  return median_plate(frames, frame_index);
}

Image background_image(const Dataset& dataset) {
  const SceneManifest& m = dataset.manifest();
  const int train = m.training_frames();
  for (int i = 0; i < train; ++i) {
    if (dataset.detections(i, kProbeConfidence).empty()) return dataset.frame(i);
  }
  return plate_for_frame(dataset, 0, one_second_window(m)).pixels;
}

}  // namespace probe
