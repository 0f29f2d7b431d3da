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

#include "probe/bitmask.hpp"

#include <algorithm>
#include <string>

#include "probe/error.hpp"

namespace probe {
namespace {

// Sorts, clips and merges spans into canonical form.
std::vector<Span> normalize(int width, int height, std::vector<Span> spans) {
  std::vector<Span> clipped;
  clipped.reserve(spans.size());
  for (Span s : spans) {
    if (s.row < 0 || s.row >= height) continue;
    s.x0 = std::max(s.x0, 0);
    s.x1 = std::min(s.x1, width);
    if (s.x1 > s.x0) clipped.push_back(s);
  }
  std::sort(clipped.begin(), clipped.end(), [](const Span& a, const Span& b) {
    return a.row != b.row ? a.row < b.row : a.x0 < b.x0;
  });
  std::vector<Span> out;
  out.reserve(clipped.size());
  for (const Span& s : clipped) {
    if (!out.empty() && out.back().row == s.row && s.x0 <= out.back().x1) {
      out.back().x1 = std::max(out.back().x1, s.x1);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

// Row-wise boolean combination of two canonical span lists.
template <typename Op>
std::vector<Span> combine(const std::vector<Span>& a, const std::vector<Span>& b,
                          Op op) {
  std::vector<Span> out;
  std::size_t ia = 0;
  std::size_t ib = 0;
  std::vector<int> edges;
  while (ia < a.size() || ib < b.size()) {
    int row;
    if (ia < a.size() && ib < b.size()) {
      row = std::min(a[ia].row, b[ib].row);
    } else if (ia < a.size()) {
      row = a[ia].row;
    } else {
      row = b[ib].row;
    }
    std::size_t ea = ia;
    while (ea < a.size() && a[ea].row == row) ++ea;
    std::size_t eb = ib;
    while (eb < b.size() && b[eb].row == row) ++eb;

    edges.clear();
    for (std::size_t i = ia; i < ea; ++i) {
      edges.push_back(a[i].x0);
      edges.push_back(a[i].x1);
    }
    for (std::size_t i = ib; i < eb; ++i) {
      edges.push_back(b[i].x0);
      edges.push_back(b[i].x1);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::size_t pa = ia;
    std::size_t pb = ib;
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
      const int lo = edges[k];
      const int hi = edges[k + 1];
      while (pa < ea && a[pa].x1 <= lo) ++pa;
      while (pb < eb && b[pb].x1 <= lo) ++pb;
      const bool in_a = pa < ea && a[pa].x0 <= lo;
      const bool in_b = pb < eb && b[pb].x0 <= lo;
      if (!op(in_a, in_b)) continue;
      if (!out.empty() && out.back().row == row && out.back().x1 == lo) {
        out.back().x1 = hi;
      } else {
        out.push_back({row, lo, hi});
      }
    }
    ia = ea;
    ib = eb;
  }
  return out;
}

void require_same_shape(const BitMask& a, const BitMask& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(ErrorCode::kInvalidArgument, "mask dimensions differ");
  }
}

}  // namespace

BitMask BitMask::from_spans(int width, int height, std::vector<Span> spans) {
  BitMask m(width, height);
  m.spans_ = normalize(width, height, std::move(spans));
  return m;
}

BitMask BitMask::from_dense(int width, int height,
                            std::span<const std::uint8_t> dense) {
  if (dense.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kInvalidArgument, "dense mask size mismatch");
  }
  BitMask m(width, height);
  for (int row = 0; row < height; ++row) {
    const std::uint8_t* p = dense.data() + static_cast<std::size_t>(row) * width;
    int x = 0;
    while (x < width) {
      while (x < width && p[x] == 0) ++x;
      if (x == width) break;
      const int start = x;
      while (x < width && p[x] != 0) ++x;
      m.spans_.push_back({row, start, x});
    }
  }
  return m;
}

std::int64_t BitMask::area() const {
  std::int64_t n = 0;
  for (const Span& s : spans_) n += s.x1 - s.x0;
  return n;
}

bool BitMask::contains(int col, int row) const {
  auto it = std::lower_bound(
      spans_.begin(), spans_.end(), Span{row, col + 1, 0},
      [](const Span& a, const Span& b) {
        return a.row != b.row ? a.row < b.row : a.x0 < b.x0;
      });
  if (it == spans_.begin()) return false;
  --it;
  return it->row == row && col >= it->x0 && col < it->x1;
}

PixelBox BitMask::bounds() const {
  PixelBox box;
  if (spans_.empty()) return box;
  box.row_min = spans_.front().row;
  box.row_max = spans_.back().row;
  box.col_min = spans_.front().x0;
  box.col_max = spans_.front().x1 - 1;
  for (const Span& s : spans_) {
    box.col_min = std::min(box.col_min, s.x0);
    box.col_max = std::max(box.col_max, s.x1 - 1);
  }
  return box;
}

std::vector<std::uint8_t> BitMask::to_dense() const {
  std::vector<std::uint8_t> dense(static_cast<std::size_t>(width_) * height_, 0);
  for (const Span& s : spans_) {
    std::fill(dense.begin() + static_cast<std::size_t>(s.row) * width_ + s.x0,
              dense.begin() + static_cast<std::size_t>(s.row) * width_ + s.x1,
              std::uint8_t{1});
  }
  return dense;
}

BitMask BitMask::translated(int dcol, int drow) const {
  std::vector<Span> moved;
  moved.reserve(spans_.size());
  for (const Span& s : spans_) {
    moved.push_back({s.row + drow, s.x0 + dcol, s.x1 + dcol});
  }
  return from_spans(width_, height_, std::move(moved));
}

BitMask BitMask::united(const BitMask& other) const {
  require_same_shape(*this, other);
  BitMask m(width_, height_);
  m.spans_ = combine(spans_, other.spans_, [](bool a, bool b) { return a || b; });
  return m;
}

BitMask BitMask::intersected(const BitMask& other) const {
  require_same_shape(*this, other);
  BitMask m(width_, height_);
  m.spans_ = combine(spans_, other.spans_, [](bool a, bool b) { return a && b; });
  return m;
}

BitMask BitMask::subtracted(const BitMask& other) const {
  require_same_shape(*this, other);
  BitMask m(width_, height_);
  m.spans_ = combine(spans_, other.spans_, [](bool a, bool b) { return a && !b; });
  return m;
}

std::int64_t BitMask::intersection_area(const BitMask& other) const {
  return intersected(other).area();
}

double iou(const BitMask& a, const BitMask& b) {
  const std::int64_t inter = a.intersection_area(b);
  const std::int64_t uni = a.area() + b.area() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::uint32_t> encode_rle(const BitMask& mask) {
  std::vector<std::uint32_t> runs;
  const std::uint64_t total =
      static_cast<std::uint64_t>(mask.width()) * mask.height();
  std::uint64_t cursor = 0;
  bool in_foreground = false;
  auto emit = [&](std::uint64_t until, bool foreground) {
    if (foreground != in_foreground) {
      runs.push_back(0);
      in_foreground = foreground;
    }
    if (runs.empty()) runs.push_back(0);
    runs.back() += static_cast<std::uint32_t>(until - cursor);
    cursor = until;
  };
  runs.push_back(0);
  for (const Span& s : mask.spans()) {
    const std::uint64_t start =
        static_cast<std::uint64_t>(s.row) * mask.width() + s.x0;
    const std::uint64_t end = start + (s.x1 - s.x0);
    if (start > cursor) emit(start, false);
    emit(end, true);
  }
  if (total > cursor) emit(total, false);
  return runs;
}

BitMask decode_mask(std::span<const std::uint32_t> runs, int width,
                    int height) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::kFormat, "rle: negative mask dimensions");
  }
  const std::uint64_t total = static_cast<std::uint64_t>(width) * height;
  std::uint64_t sum = 0;
  for (std::uint32_t r : runs) sum += r;
  if (sum != total) {
    throw Error(ErrorCode::kFormat,
                "rle: runs sum to " + std::to_string(sum) + ", expected " +
                    std::to_string(total));
  }
  std::vector<Span> spans;
  std::uint64_t cursor = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::uint64_t end = cursor + runs[i];
    if (i % 2 == 1) {
      std::uint64_t p = cursor;
      while (p < end) {
        const int row = static_cast<int>(p / width);
        const int x0 = static_cast<int>(p % width);
        const std::uint64_t row_end = static_cast<std::uint64_t>(row + 1) * width;
        const std::uint64_t stop = std::min(end, row_end);
        spans.push_back({row, x0, x0 + static_cast<int>(stop - p)});
        p = stop;
      }
    }
    cursor = end;
  }
  return BitMask::from_spans(width, height, std::move(spans));
}

}  // namespace probe
