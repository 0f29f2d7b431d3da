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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "probe/bitmask.hpp"
#include "probe/dataio.hpp"
#include "probe/image.hpp"

namespace probe {

struct ObserveOptions {
  /// Max-abs-channel colour distance a pixel must exceed to stay in M'.
  int tau = 30;
  /// Refined masks smaller than this are dropped as noise.
  std::int64_t min_area = 50;
  /// Drop an instance when another detection in the same frame covers the
  /// pixels just below its lowest row: its ground contact is not visible, so
  /// its bottom y would be too far.
  bool drop_truncated = true;
  int truncation_band = 2;
};

/// One detected object in one frame, measured on its refined mask.
/// All y values use the bottom-left origin.
struct InstanceObservation {
  int frame_index = 0;
  std::string class_name;
  double confidence = 0.0;
  BitMask mask;             // refined mask M'
  int bottom_y = 0;         // lowest foreground y
  double bottom_x = 0.0;    // midpoint of the lowest row's extent
  int pixel_height = 0;     // top y - bottom y + 1
  Color3 mean_color{};      // mean RGB over M'
};

/// M' = { p in M : max_c |frame_c(p) - plate_c(p)| > tau }.
BitMask refine_mask(const BitMask& detection, const Image& frame,
                    const Image& plate, int tau);

/// Measures bottom point, height and mean colour of a (non-empty) mask.
InstanceObservation describe(int frame_index, const std::string& class_name,
                             double confidence, BitMask refined,
                             const Image& frame);

/// True if any of `others` covers a pixel in the `band` rows below the
/// lowest row of `mask`, within one column of that row's extent.
bool contact_hidden(const BitMask& mask, std::span<const BitMask> others, int band);

std::vector<InstanceObservation> observe_frame(
    int frame_index, const Image& frame,
    std::span<const RawDetection> detections, const Image& plate,
    const ObserveOptions& options = {});

/// Frames, detections and plates are index-aligned.
std::vector<InstanceObservation> observe(
    std::span<const Frame> frames,
    std::span<const std::vector<RawDetection>> detections,
    std::span<const Image> plates, const ObserveOptions& options = {});

/// Per-pixel threshold z~(x, y): the largest bottom y of any observation that
/// covered the pixel, or -1 if none ever did.
class OcclusionMap {
 public:
  static constexpr std::int16_t kNever = -1;

  OcclusionMap() = default;
  OcclusionMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<std::int16_t>& values() const { return values_; }

  int at(int col, int row) const {
    return values_[static_cast<std::size_t>(row) * width_ + col];
  }
  int at_xy(int x, int y) const { return at(x, row_of(y, height_)); }

  /// Applies the update for one observation; the result is the per-pixel max
  /// regardless of order.
  void absorb(const InstanceObservation& observation);
  void absorb(const BitMask& mask, int bottom_y);
  /// Per-pixel max with another map of the same size.
  void merge(const OcclusionMap& other);

  static OcclusionMap from_values(int width, int height,
                                  std::vector<std::int16_t> values);

  bool operator==(const OcclusionMap&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::int16_t> values_;
};

OcclusionMap build_occlusion_map(int width, int height,
                                 std::span<const InstanceObservation> observations);

/// An object cut-out positioned in image space.
struct PlacedObject {
  BitMask mask;          // image coordinates
  Image patch;           // colours; patch(0, 0) sits at (patch_left, patch_top)
  int patch_left = 0;
  int patch_top = 0;
  int bottom_y = 0;      // y_j, bottom-left origin

  Rgb color_at(int col, int row) const {
    return patch.at(col - patch_left, row - patch_top);
  }
};

/// Pixels of `object` that win against the scene: p in M_j and y_j < z~(p).
BitMask visible_pixels(const PlacedObject& object, const OcclusionMap& occlusion);

/// Draws the object's winning pixels over `base`.
Image composite_object(const Image& base, const PlacedObject& object,
                       const OcclusionMap& occlusion);

/// Little-endian u32 width, u32 height, then width*height i16 row-major.
std::vector<std::uint8_t> encode_occlusion_map(const OcclusionMap& map);
OcclusionMap decode_occlusion_map(std::span<const std::uint8_t> bytes);
void save_occlusion_map(const OcclusionMap& map, const std::filesystem::path& path);
OcclusionMap load_occlusion_map(const std::filesystem::path& path);

/// Black where never occluded; yellow through red as z~ increases.
Image visualize_occlusion(const OcclusionMap& map);

}  // namespace probe
