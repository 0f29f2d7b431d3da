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

#include <filesystem>
#include <vector>

#include "probe/composer.hpp"
#include "probe/png_io.hpp"
#include "probe/synth.hpp"

namespace probe::testing {

/// 200x150 scene with one occluder, a shaded corner and dense probes.
inline synth::SynthConfig small_scene_config(int frames, std::uint64_t seed = 3) {
  synth::SynthConfig c;
  c.width = 200;
  c.height = 150;
  c.focal = 200.0;
  c.plane = {0.01, -0.2, 0.05};
  c.occluders.push_back({40, 20, 110, 45, 20, {96, 64, 40}});
  c.brightness.regions.push_back({150, 0, 200, 60, 0.5});
  synth::ProbeSchedule s;
  s.frames = frames;
  s.per_frame = 4;
  s.x_min = 10;
  s.x_max = 190;
  s.y_min = 5;
  s.y_max = 80;
  s.min_contrast = 80;
  s.seed = seed;
  c.sprites = synth::make_probe_tracks(c, s);
  c.seed = seed;
  return c;
}

/// Exports the scene and saves its products under `dir`/products.
inline void export_and_build(const synth::SynthConfig& config, int frames,
                             const std::filesystem::path& dir) {
  synth::export_scene(config, frames, dir);
  save_products(build_products(DiskDataset::open(dir)), dir / "products");
}

/// Opaque two-tone cut-out with a transparent margin.
inline std::vector<std::uint8_t> sprite_png(int w, int h) {
  RgbaImage rgba{w + 4, h + 4,
                 std::vector<std::uint8_t>(static_cast<std::size_t>(w + 4) * (h + 4) * 4, 0)};
  for (int r = 2; r < h + 2; ++r) {
    for (int c = 2; c < w + 2; ++c) {
      std::uint8_t* p = rgba.pixels.data() + (static_cast<std::size_t>(r) * (w + 4) + c) * 4;
      const bool top = r < h / 2 + 2;
      p[0] = top ? 220 : 30;
      p[1] = top ? 60 : 90;
      p[2] = top ? 40 : 200;
      p[3] = 255;
    }
  }
  return encode_png(rgba);
}

}  // namespace probe::testing
