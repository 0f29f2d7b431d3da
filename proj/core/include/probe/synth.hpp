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
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "probe/bitmask.hpp"
#include "probe/dataio.hpp"
#include "probe/image.hpp"

namespace probe::synth {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// World ground plane aX + bY + cZ = 1 in camera coordinates
/// (X right, Y up, Z forward; pinhole at the origin).
struct WorldPlane {
  double a = 0.0;
  double b = -0.2;
  double c = 0.05;
};

/// Image-space height law h = a'x + b'y + c' (bottom-left pixel coordinates).
struct HeightPlane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double height_at(double x, double y) const { return a * x + b * y + c; }
};

enum class Shape { kRectangle, kKeyhole };

/// Axis-aligned box standing on the ground. Covers bottom-left pixel coords
/// [x0, x1) x [y0, y1); `base_y` is its ground-contact row (its depth).
struct Occluder {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  int base_y = 0;
  Rgb color{90, 60, 40};
};

struct BrightnessRegion {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  double factor = 1.0;
};

/// Piecewise-constant illumination factor; later regions win, default 1.
/// Pixels with factor < 1 count as already shadowed.
struct BrightnessField {
  std::vector<BrightnessRegion> regions;

  double at(int x, int y) const;
};

/// Image-space cast-shadow direction: a caster pixel at height d above its
/// contact row lands at (x + k_x d, y_b + k_y d).
struct ShadowShear {
  double k_x = 0.8;
  double k_y = 0.1;
};

/// One object moving through the scene: `positions[i]` is its ground contact
/// point (world) at frame `first_frame + i`.
struct SpriteTrack {
  int first_frame = 0;
  std::vector<Vec3> positions;
  Rgb upper{200, 40, 40};
  Rgb lower{40, 40, 160};
  double height_multiplier = 1.0;
  Shape shape = Shape::kKeyhole;
  std::string class_name = "person";
  double confidence = 1.0;

  bool active(int t) const {
    return t >= first_frame &&
           t < first_frame + static_cast<int>(positions.size());
  }
};

struct SynthConfig {
  int width = 800;
  int height = 800;
  double focal = 800.0;
  WorldPlane plane;
  double person_height = 1.7;
  double aspect = 0.35;
  std::vector<Occluder> occluders;
  ShadowShear light_direction;
  double shadow_gain = 0.5;
  bool cast_shadows = true;
  BrightnessField brightness;
  Rgb ground{150, 140, 125};
  Rgb backdrop{110, 130, 160};
  int texture_amplitude = 6;
  std::vector<SpriteTrack> sprites;
  std::uint64_t seed = 1;
};

struct SpriteTruth {
  int track = 0;
  std::string class_name;
  double confidence = 1.0;
  double height_multiplier = 1.0;
  double foot_x = 0.0;        // continuous contact point, bottom-left coords
  double foot_y = 0.0;
  double pixel_height = 0.0;  // true (continuous) projected height
  int bottom_y = 0;           // lowest silhouette row, bottom-left coords
  double lighting_factor = 1.0;
  BitMask mask;               // full silhouette
  BitMask visible;            // silhouette after occlusion
  BitMask shadow;             // visible pixels darkened by this sprite's shadow
  Image patch;                // rendered colours over the mask bounds
  int patch_left = 0;         // raster column of patch(0, 0)
  int patch_top = 0;          // raster row of patch(0, 0)
};

struct GroundTruthFrame {
  int index = 0;
  Image image;
  std::vector<SpriteTruth> sprites;
  BitMask shadow_mask;        // all darkened pixels
};

HeightPlane image_plane(const SynthConfig& config);

/// Principal point in bottom-left pixel coordinates.
double principal_x(const SynthConfig& config);
double principal_y(const SynthConfig& config);

/// Ground point seen at bottom-left pixel (x, y); nullopt above the horizon.
std::optional<Vec3> ground_point_at(const SynthConfig& config, double x, double y);

/// Throws Error(kInvalidArgument) for tracks off the ground plane or behind
/// the camera, and for out-of-range gain/brightness values.
void validate(const SynthConfig& config);

Image render_background(const SynthConfig& config);

GroundTruthFrame render_frame(const SynthConfig& config, int t);

/// Converts a rendered frame's sprites into detector output (visible masks).
std::vector<RawDetection> detections_from_truth(const GroundTruthFrame& frame);

struct ProbeSchedule {
  int frames = 100;
  int first_frame = 0;
  int per_frame = 4;
  int lifetime = 1;
  // Contact points are drawn uniformly from this bottom-left pixel box.
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  double height_sigma = 0.05;
  /// Colours closer than this (max channel) to the ground colour are redrawn.
  int min_contrast = 0;
  std::vector<std::string> classes{"person"};
  std::uint64_t seed = 7;
};

/// Random tracks that teleport to a fresh contact point every frame, which
/// keeps temporal medians clean.
std::vector<SpriteTrack> make_probe_tracks(const SynthConfig& config,
                                           const ProbeSchedule& schedule);

/// Named scene recipes with probe tracks for `frames` frames:
///   street     800x800, bench occluder, shaded corner, shear shadows
///   occlusion  640x480, several occluders, dense probes, no shadows
///   lighting   640x480, right half at 0.4 brightness, no shadows
///   shadow     640x480, two casters per frame, uniform light
///   cloudy     640x480, no cast shadows at all
/// Throws kInvalidArgument for an unknown name.
SynthConfig preset(const std::string& name, int frames, std::uint64_t seed = 1);
std::vector<std::string> preset_names();

/// Writes frames/, masks/, scene.json and truth.json.
SceneManifest export_scene(const SynthConfig& config, int n_frames,
                           const std::filesystem::path& out_dir);

std::string truth_to_json(const SynthConfig& config, int n_frames);

/// Dataset that renders frames on demand.
class SynthDataset final : public Dataset {
 public:
  SynthDataset(SynthConfig config, int n_frames);

  const SceneManifest& manifest() const override { return manifest_; }
  Image frame(int index) const override;
  std::vector<RawDetection> detections(int index,
                                       double min_confidence) const override;
  GroundTruthFrame truth(int index) const;
  const SynthConfig& config() const { return config_; }

 private:
  SynthConfig config_;
  SceneManifest manifest_;
  mutable std::mutex mutex_;
  mutable std::optional<GroundTruthFrame> cached_;
};

}  // namespace probe::synth
