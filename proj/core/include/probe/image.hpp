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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace probe {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

using Color3 = std::array<double, 3>;

/// Integer luminance approximation (r + 2g + b) / 4.
inline int luminance(Rgb c) { return (c.r + 2 * c.g + c.b) / 4; }

inline double luminance(const Color3& c) {
  return (c[0] + 2.0 * c[1] + c[2]) / 4.0;
}

/// Clamp to [0, 255] and round half up.
inline std::uint8_t to_u8(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(v + 0.5);
}

/// Interleaved 8-bit RGB raster, row-major with row 0 at the top.
///
/// Public APIs that speak in scene coordinates use a bottom-left origin
/// (y grows upward); conversion happens through `row_of` / `y_of`.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  std::uint8_t* data() { return pixels_.data(); }
  const std::uint8_t* data() const { return pixels_.data(); }
  std::span<std::uint8_t> bytes() { return pixels_; }
  std::span<const std::uint8_t> bytes() const { return pixels_; }

  std::uint8_t* row_ptr(int row) {
    return pixels_.data() + static_cast<std::size_t>(row) * width_ * 3;
  }
  const std::uint8_t* row_ptr(int row) const {
    return pixels_.data() + static_cast<std::size_t>(row) * width_ * 3;
  }

  Rgb at(int col, int row) const {
    const std::uint8_t* p = row_ptr(row) + col * 3;
    return {p[0], p[1], p[2]};
  }
  void set(int col, int row, Rgb c) {
    std::uint8_t* p = row_ptr(row) + col * 3;
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  bool in_bounds(int col, int row) const {
    return col >= 0 && row >= 0 && col < width_ && row < height_;
  }
  bool same_size(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  bool operator==(const Image&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// 8-bit RGBA raster, used only for cut-out sprites.
struct RgbaImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

struct Frame {
  int index = 0;
  Image image;
};

inline int row_of(int y, int height) { return height - 1 - y; }
inline int y_of(int row, int height) { return height - 1 - row; }

}  // namespace probe
