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

#include "probe/occlusion.hpp"

#include <algorithm>
#include <cstdlib>

#include "binary_io.hpp"
#include "probe/error.hpp"
#include "probe/png_io.hpp"

namespace probe {

BitMask refine_mask(const BitMask& detection, const Image& frame,
                    const Image& plate, int tau) {
  if (!frame.same_size(plate) || detection.width() != frame.width() ||
      detection.height() != frame.height()) {
    throw Error(ErrorCode::kInvalidArgument, "refine_mask: dimensions disagree");
  }
  return detection.filter([&](int col, int row) {
    const std::uint8_t* f = frame.row_ptr(row) + col * 3;
    const std::uint8_t* p = plate.row_ptr(row) + col * 3;
    const int d = std::max({std::abs(f[0] - p[0]), std::abs(f[1] - p[1]),
                            std::abs(f[2] - p[2])});
    return d > tau;
  });
}

InstanceObservation describe(int frame_index, const std::string& class_name,
                             double confidence, BitMask refined,
                             const Image& frame) {
  if (refined.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "describe: empty mask");
  }
  InstanceObservation obs;
  obs.frame_index = frame_index;
  obs.class_name = class_name;
  obs.confidence = confidence;

  const int H = refined.height();
  const PixelBox box = refined.bounds();
  obs.bottom_y = y_of(box.row_max, H);
  obs.pixel_height = y_of(box.row_min, H) - obs.bottom_y + 1;

  int lo = refined.width();
  int hi = -1;
  for (const Span& s : refined.spans()) {
    if (s.row != box.row_max) continue;
    lo = std::min(lo, s.x0);
    hi = std::max(hi, s.x1 - 1);
  }
  obs.bottom_x = 0.5 * (lo + hi);

  std::uint64_t sum[3] = {0, 0, 0};
  refined.for_each_pixel([&](int col, int row) {
    const std::uint8_t* p = frame.row_ptr(row) + col * 3;
    sum[0] += p[0];
    sum[1] += p[1];
    sum[2] += p[2];
  });
  const double n = static_cast<double>(refined.area());
  obs.mean_color = {sum[0] / n, sum[1] / n, sum[2] / n};
  obs.mask = std::move(refined);
  return obs;
}

bool contact_hidden(const BitMask& mask, std::span<const BitMask> others, int band) {
  if (mask.empty()) return false;
  const int bottom = mask.bounds().row_max;
  int lo = mask.width();
  int hi = -1;
  for (const Span& s : mask.spans()) {
    if (s.row != bottom) continue;
    lo = std::min(lo, s.x0);
    hi = std::max(hi, s.x1 - 1);
  }
  for (const BitMask& other : others) {
    for (const Span& s : other.spans()) {
      if (s.row <= bottom || s.row > bottom + band) continue;
      if (s.x0 <= hi + 1 && s.x1 > lo - 1) return true;
    }
  }
  return false;
}

std::vector<InstanceObservation> observe_frame(
    int frame_index, const Image& frame,
    std::span<const RawDetection> detections, const Image& plate,
    const ObserveOptions& options) {
  std::vector<InstanceObservation> out;
  std::vector<BitMask> others;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const RawDetection& d = detections[i];
    BitMask refined = refine_mask(d.mask, frame, plate, options.tau);
    if (refined.area() < options.min_area) continue;
    if (options.drop_truncated && detections.size() > 1) {
      others.clear();
      for (std::size_t j = 0; j < detections.size(); ++j) {
        if (j != i) others.push_back(detections[j].mask);
      }
      if (contact_hidden(refined, others, options.truncation_band)) continue;
    }
    out.push_back(describe(frame_index, d.class_name, d.confidence,
                           std::move(refined), frame));
  }
  return out;
}

std::vector<InstanceObservation> observe(
    std::span<const Frame> frames,
    std::span<const std::vector<RawDetection>> detections,
    std::span<const Image> plates, const ObserveOptions& options) {
  if (frames.size() != detections.size() || frames.size() != plates.size()) {
    throw Error(ErrorCode::kInvalidArgument, "observe: inputs not aligned");
  }
  std::vector<InstanceObservation> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    auto obs = observe_frame(frames[i].index, frames[i].image, detections[i],
                             plates[i], options);
    std::move(obs.begin(), obs.end(), std::back_inserter(out));
  }
  return out;
}

OcclusionMap::OcclusionMap(int width, int height)
    : width_(width),
      height_(height),
      values_(static_cast<std::size_t>(width) * height, kNever) {
  if (width < 0 || height < 0 || height > 32767) {
    throw Error(ErrorCode::kInvalidArgument, "occlusion map: bad dimensions");
  }
}

void OcclusionMap::absorb(const BitMask& mask, int bottom_y) {
  if (mask.width() != width_ || mask.height() != height_) {
    throw Error(ErrorCode::kInvalidArgument, "occlusion map: mask size mismatch");
  }
  const auto y = static_cast<std::int16_t>(bottom_y);
  for (const Span& s : mask.spans()) {
    std::int16_t* row = values_.data() + static_cast<std::size_t>(s.row) * width_;
    for (int x = s.x0; x < s.x1; ++x) {
      if (y > row[x]) row[x] = y;
    }
  }
}

void OcclusionMap::absorb(const InstanceObservation& observation) {
  absorb(observation.mask, observation.bottom_y);
}

void OcclusionMap::merge(const OcclusionMap& other) {
  if (other.width_ != width_ || other.height_ != height_) {
    throw Error(ErrorCode::kInvalidArgument, "occlusion map: size mismatch");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    values_[i] = std::max(values_[i], other.values_[i]);
  }
}

OcclusionMap OcclusionMap::from_values(int width, int height,
                                       std::vector<std::int16_t> values) {
  if (values.size() != static_cast<std::size_t>(width) * height) {
    throw Error(ErrorCode::kFormat, "occlusion map: value count mismatch");
  }
  for (std::int16_t v : values) {
    if (v < kNever || v >= height) {
      throw Error(ErrorCode::kFormat, "occlusion map: value out of range");
    }
  }
  OcclusionMap map(width, height);
  map.values_ = std::move(values);
  return map;
}

OcclusionMap build_occlusion_map(int width, int height,
                                 std::span<const InstanceObservation> observations) {
  OcclusionMap map(width, height);
  for (const InstanceObservation& obs : observations) map.absorb(obs);
  return map;
}

BitMask visible_pixels(const PlacedObject& object, const OcclusionMap& occlusion) {
  const int y_j = object.bottom_y;
  return object.mask.filter(
      [&](int col, int row) { return y_j < occlusion.at(col, row); });
}

Image composite_object(const Image& base, const PlacedObject& object,
                       const OcclusionMap& occlusion) {
  Image out = base;
  visible_pixels(object, occlusion).for_each_pixel([&](int col, int row) {
    out.set(col, row, object.color_at(col, row));
  });
  return out;
}

std::vector<std::uint8_t> encode_occlusion_map(const OcclusionMap& map) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + map.values().size() * 2);
  detail::put_u32(out, static_cast<std::uint32_t>(map.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(map.height()));
  for (std::int16_t v : map.values()) detail::put_i16(out, v);
  return out;
}

OcclusionMap decode_occlusion_map(std::span<const std::uint8_t> bytes) {
  detail::Reader in(bytes);
  const int width = static_cast<int>(in.u32());
  const int height = static_cast<int>(in.u32());
  if (width < 0 || height < 0 || height > 32767 || width > 32767) {
    throw Error(ErrorCode::kFormat, "occlusion map: bad header");
  }
  std::vector<std::int16_t> values(static_cast<std::size_t>(width) * height);
  for (auto& v : values) v = in.i16();
  if (!in.done()) throw Error(ErrorCode::kFormat, "occlusion map: trailing bytes");
  return OcclusionMap::from_values(width, height, std::move(values));
}

void save_occlusion_map(const OcclusionMap& map, const std::filesystem::path& path) {
  write_file_bytes(path, encode_occlusion_map(map));
}

OcclusionMap load_occlusion_map(const std::filesystem::path& path) {
  return decode_occlusion_map(read_file_bytes(path));
}

Image visualize_occlusion(const OcclusionMap& map) {
  Image out(map.width(), map.height());
  const double span = std::max(1, map.height() - 1);
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      const int z = map.at(col, row);
      if (z < 0) continue;
      const double t = z / span;
      out.set(col, row, {255, to_u8(255.0 * (1.0 - t)), 0});
    }
  }
  return out;
}

}  // namespace probe
