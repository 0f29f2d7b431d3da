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
#include <vector>

#include "probe/bitmask.hpp"
#include "probe/image.hpp"
#include "probe/occlusion.hpp"

namespace probe {

class LightingMap;

/// Exact per-pixel running sums of probe mean colours. Colours are held in
/// 16.16 fixed point so accumulation is associative and commutative.
class LightingAccumulator {
 public:
  LightingAccumulator() = default;
  LightingAccumulator(int width, int height);

  void add(const BitMask& mask, const Color3& mean_color);
  void add(const InstanceObservation& observation) {
    add(observation.mask, observation.mean_color);
  }
  void merge(const LightingAccumulator& other);
  LightingMap finalize() const;

  bool operator==(const LightingAccumulator&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::int64_t> sums_;  // 3 per pixel
  std::vector<std::uint32_t> counts_;
};

/// L(x, y): mean of the probe colours that covered each pixel. Only defined
/// where count > 0. L is relative; it is only ever used through ratios.
class LightingMap {
 public:
  LightingMap() = default;
  LightingMap(int width, int height, std::vector<float> sums,
              std::vector<std::uint32_t> counts);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<float>& sums() const { return sums_; }
  const std::vector<std::uint32_t>& counts() const { return counts_; }

  std::uint32_t count(int col, int row) const {
    return counts_[static_cast<std::size_t>(row) * width_ + col];
  }
  bool sampled(int col, int row) const { return count(col, row) > 0; }
  /// Undefined (zeros) where unsampled.
  Color3 value(int col, int row) const;

  std::int64_t sampled_pixels() const { return sampled_pixels_; }
  /// Mean of L over sampled pixels; zeros if nothing was sampled.
  const Color3& global_mean() const { return global_mean_; }
  /// Median luminance of L over sampled pixels; 0 if nothing was sampled.
  double median_luminance() const { return median_luminance_; }

  bool operator==(const LightingMap& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           sums_ == other.sums_ && counts_ == other.counts_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> sums_;
  std::vector<std::uint32_t> counts_;
  std::int64_t sampled_pixels_ = 0;
  Color3 global_mean_{};
  double median_luminance_ = 0.0;
};

LightingMap build_lighting_map(int width, int height,
                               std::span<const InstanceObservation> observations);

/// Mean of L over the sampled pixels under `mask`; the scene-global mean when
/// the mask covers no sampled pixel.
Color3 lighting_factor(const LightingMap& map, const BitMask& mask);

class LightingAnchor {
 public:
  /// Throws Error(kInvalidArgument) unless every channel is > 0.
  static LightingAnchor create(const Color3& reference);

  const Color3& reference() const { return reference_; }

 private:
  explicit LightingAnchor(const Color3& reference) : reference_(reference) {}
  Color3 reference_;
};

/// Scales each channel by target_c / anchor_c, clamped and rounded half up.
Image relight(const Image& sprite, const LightingAnchor& anchor,
              const Color3& target);

/// Little-endian u32 width, u32 height, f32 RGB sums (3 per pixel), u32 counts.
std::vector<std::uint8_t> encode_lighting_map(const LightingMap& map);
LightingMap decode_lighting_map(std::span<const std::uint8_t> bytes);
void save_lighting_map(const LightingMap& map, const std::filesystem::path& path);
LightingMap load_lighting_map(const std::filesystem::path& path);

/// L scaled so its largest sampled channel value maps to 255; black where
/// unsampled.
Image visualize_lighting(const LightingMap& map);

/// Diagnostic for the albedo/position independence assumption: spread of
/// probe mean luminance within each cell of a coarse grid (by contact point).
struct AlbedoCellStats {
  int cell_col = 0;
  int cell_row = 0;
  int samples = 0;
  double mean_luminance = 0.0;
  double variance = 0.0;
};

std::vector<AlbedoCellStats> albedo_variance_by_region(
    std::span<const InstanceObservation> observations, int width, int height,
    int grid);

}  // namespace probe
