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
#include <span>
#include <vector>

namespace probe {

/// Horizontal run of foreground pixels on one raster row: [x0, x1).
struct Span {
  int row = 0;
  int x0 = 0;
  int x1 = 0;

  bool operator==(const Span&) const = default;
};

struct PixelBox {
  int col_min = 0;
  int row_min = 0;
  int col_max = -1;  // inclusive
  int row_max = -1;  // inclusive

  bool empty() const { return col_max < col_min || row_max < row_min; }
  int width() const { return empty() ? 0 : col_max - col_min + 1; }
  int height() const { return empty() ? 0 : row_max - row_min + 1; }
};

/// Binary mask over a width x height raster, stored as canonical row spans
/// (sorted by row then x, non-overlapping, non-touching). Two masks are equal
/// iff they cover the same pixel set.
class BitMask {
 public:
  BitMask() = default;
  BitMask(int width, int height) : width_(width), height_(height) {}

  /// Normalizes arbitrary (possibly overlapping, unsorted) spans; spans are
  /// clipped to the raster.
  static BitMask from_spans(int width, int height, std::vector<Span> spans);
  /// `dense` holds width * height bytes, nonzero = foreground.
  static BitMask from_dense(int width, int height,
                            std::span<const std::uint8_t> dense);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<Span>& spans() const { return spans_; }
  bool empty() const { return spans_.empty(); }
  std::int64_t area() const;
  bool contains(int col, int row) const;
  PixelBox bounds() const;

  std::vector<std::uint8_t> to_dense() const;

  template <typename F>
  void for_each_pixel(F&& f) const {
    for (const Span& s : spans_) {
      for (int x = s.x0; x < s.x1; ++x) f(x, s.row);
    }
  }

  /// Keeps only pixels for which `keep(col, row)` is true.
  template <typename F>
  BitMask filter(F&& keep) const {
    std::vector<Span> out;
    for (const Span& s : spans_) {
      int start = -1;
      for (int x = s.x0; x < s.x1; ++x) {
        if (keep(x, s.row)) {
          if (start < 0) start = x;
        } else if (start >= 0) {
          out.push_back({s.row, start, x});
          start = -1;
        }
      }
      if (start >= 0) out.push_back({s.row, start, s.x1});
    }
    BitMask m(width_, height_);
    m.spans_ = std::move(out);
    return m;
  }

  /// Shifts by (dcol, drow), clipping anything that leaves the raster.
  BitMask translated(int dcol, int drow) const;

  BitMask united(const BitMask& other) const;
  BitMask intersected(const BitMask& other) const;
  BitMask subtracted(const BitMask& other) const;
  std::int64_t intersection_area(const BitMask& other) const;

  bool operator==(const BitMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Span> spans_;
};

double iou(const BitMask& a, const BitMask& b);

/// COCO-style uncompressed RLE: alternating run lengths over the row-major
/// raster, starting with a background run (possibly zero).
std::vector<std::uint32_t> encode_rle(const BitMask& mask);
BitMask decode_mask(std::span<const std::uint32_t> runs, int width, int height);

}  // namespace probe
