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

#include "probe/lighting.hpp"

#include <algorithm>
#include <cmath>

#include "binary_io.hpp"
#include "probe/error.hpp"
#include "probe/png_io.hpp"

namespace probe {
namespace {

constexpr double kFixedOne = 65536.0;

}  // namespace

LightingAccumulator::LightingAccumulator(int width, int height)
    : width_(width),
      height_(height),
      sums_(static_cast<std::size_t>(width) * height * 3, 0),
      counts_(static_cast<std::size_t>(width) * height, 0) {}

void LightingAccumulator::add(const BitMask& mask, const Color3& mean_color) {
  if (mask.width() != width_ || mask.height() != height_) {
    throw Error(ErrorCode::kInvalidArgument, "lighting: mask size mismatch");
  }
  const std::int64_t q[3] = {std::llround(mean_color[0] * kFixedOne),
                             std::llround(mean_color[1] * kFixedOne),
                             std::llround(mean_color[2] * kFixedOne)};
  mask.for_each_pixel([&](int col, int row) {
    const std::size_t i = static_cast<std::size_t>(row) * width_ + col;
    sums_[i * 3 + 0] += q[0];
    sums_[i * 3 + 1] += q[1];
    sums_[i * 3 + 2] += q[2];
    ++counts_[i];
  });
}

void LightingAccumulator::merge(const LightingAccumulator& other) {
  if (other.width_ != width_ || other.height_ != height_) {
    throw Error(ErrorCode::kInvalidArgument, "lighting: size mismatch");
  }
  for (std::size_t i = 0; i < sums_.size(); ++i) sums_[i] += other.sums_[i];
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

LightingMap LightingAccumulator::finalize() const {
  std::vector<float> sums(sums_.size());
  for (std::size_t i = 0; i < sums_.size(); ++i) {
    sums[i] = static_cast<float>(static_cast<double>(sums_[i]) / kFixedOne);
  }
  return LightingMap(width_, height_, std::move(sums), counts_);
}

LightingMap::LightingMap(int width, int height, std::vector<float> sums,
                         std::vector<std::uint32_t> counts)
    : width_(width),
      height_(height),
      sums_(std::move(sums)),
      counts_(std::move(counts)) {
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (sums_.size() != n * 3 || counts_.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "lighting map: buffer size mismatch");
  }
  std::vector<double> lum;
  double acc[3] = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    if (counts_[i] == 0) continue;
    const double c = counts_[i];
    const Color3 v{sums_[i * 3] / c, sums_[i * 3 + 1] / c, sums_[i * 3 + 2] / c};
    acc[0] += v[0];
    acc[1] += v[1];
    acc[2] += v[2];
    lum.push_back(luminance(v));
  }
  sampled_pixels_ = static_cast<std::int64_t>(lum.size());
  if (!lum.empty()) {
    const double k = static_cast<double>(lum.size());
    global_mean_ = {acc[0] / k, acc[1] / k, acc[2] / k};
    const std::size_t mid = (lum.size() - 1) / 2;
    std::nth_element(lum.begin(), lum.begin() + mid, lum.end());
    median_luminance_ = lum[mid];
  }
}

Color3 LightingMap::value(int col, int row) const {
  const std::size_t i = static_cast<std::size_t>(row) * width_ + col;
  if (counts_[i] == 0) return {0.0, 0.0, 0.0};
  const double c = counts_[i];
  return {sums_[i * 3] / c, sums_[i * 3 + 1] / c, sums_[i * 3 + 2] / c};
}

LightingMap build_lighting_map(int width, int height,
                               std::span<const InstanceObservation> observations) {
  LightingAccumulator acc(width, height);
  for (const InstanceObservation& obs : observations) acc.add(obs);
  return acc.finalize();
}

Color3 lighting_factor(const LightingMap& map, const BitMask& mask) {
  double acc[3] = {0.0, 0.0, 0.0};
  std::int64_t n = 0;
  mask.for_each_pixel([&](int col, int row) {
    if (col < 0 || row < 0 || col >= map.width() || row >= map.height()) return;
    if (!map.sampled(col, row)) return;
    const Color3 v = map.value(col, row);
    acc[0] += v[0];
    acc[1] += v[1];
    acc[2] += v[2];
    ++n;
  });
  if (n == 0) return map.global_mean();
  return {acc[0] / n, acc[1] / n, acc[2] / n};
}

LightingAnchor LightingAnchor::create(const Color3& reference) {
  for (double c : reference) {
    if (!(c > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "lighting anchor channels must be positive");
    }
  }
  return LightingAnchor(reference);
}

Image relight(const Image& sprite, const LightingAnchor& anchor,
              const Color3& target) {
  const Color3& ref = anchor.reference();
  const double gain[3] = {target[0] / ref[0], target[1] / ref[1], target[2] / ref[2]};
  Image out = sprite;
  std::uint8_t* p = out.data();
  const std::size_t n = out.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) p[i * 3 + c] = to_u8(p[i * 3 + c] * gain[c]);
  }
  return out;
}

std::vector<std::uint8_t> encode_lighting_map(const LightingMap& map) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + map.sums().size() * 4 + map.counts().size() * 4);
  detail::put_u32(out, static_cast<std::uint32_t>(map.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(map.height()));
  for (float v : map.sums()) detail::put_f32(out, v);
  for (std::uint32_t c : map.counts()) detail::put_u32(out, c);
  return out;
}

LightingMap decode_lighting_map(std::span<const std::uint8_t> bytes) {
  detail::Reader in(bytes);
  const std::uint32_t width = in.u32();
  const std::uint32_t height = in.u32();
  if (width > 32767 || height > 32767) {
    throw Error(ErrorCode::kFormat, "lighting map: bad header");
  }
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<float> sums(n * 3);
  for (auto& v : sums) v = in.f32();
  std::vector<std::uint32_t> counts(n);
  for (auto& c : counts) c = in.u32();
  if (!in.done()) throw Error(ErrorCode::kFormat, "lighting map: trailing bytes");
  return LightingMap(static_cast<int>(width), static_cast<int>(height),
                     std::move(sums), std::move(counts));
}

void save_lighting_map(const LightingMap& map, const std::filesystem::path& path) {
  write_file_bytes(path, encode_lighting_map(map));
}

LightingMap load_lighting_map(const std::filesystem::path& path) {
  return decode_lighting_map(read_file_bytes(path));
}

Image visualize_lighting(const LightingMap& map) {
  Image out(map.width(), map.height());
  double peak = 0.0;
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      if (map.sampled(col, row)) {
        const Color3 v = map.value(col, row);
        peak = std::max({peak, v[0], v[1], v[2]});
      }
    }
  }
  if (peak <= 0.0) return out;
  const double k = 255.0 / peak;
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      if (!map.sampled(col, row)) continue;
      const Color3 v = map.value(col, row);
      out.set(col, row, {to_u8(v[0] * k), to_u8(v[1] * k), to_u8(v[2] * k)});
    }
  }
  return out;
}

std::vector<AlbedoCellStats> albedo_variance_by_region(
    std::span<const InstanceObservation> observations, int width, int height,
    int grid) {
  grid = std::max(grid, 1);
  std::vector<AlbedoCellStats> cells(static_cast<std::size_t>(grid) * grid);
  std::vector<double> sum(cells.size(), 0.0);
  std::vector<double> sum_sq(cells.size(), 0.0);
  for (int r = 0; r < grid; ++r) {
    for (int c = 0; c < grid; ++c) {
      cells[r * grid + c].cell_col = c;
      cells[r * grid + c].cell_row = r;
    }
  }
  for (const InstanceObservation& obs : observations) {
    const int c = std::clamp(static_cast<int>(obs.bottom_x * grid / width), 0, grid - 1);
    const int r = std::clamp(obs.bottom_y * grid / height, 0, grid - 1);
    const std::size_t k = static_cast<std::size_t>(r) * grid + c;
    const double lum = luminance(obs.mean_color);
    ++cells[k].samples;
    sum[k] += lum;
    sum_sq[k] += lum * lum;
  }
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (cells[k].samples == 0) continue;
    const double n = cells[k].samples;
    cells[k].mean_luminance = sum[k] / n;
    cells[k].variance = std::max(0.0, sum_sq[k] / n - cells[k].mean_luminance * cells[k].mean_luminance);
  }
  return cells;
}

}  // namespace probe
