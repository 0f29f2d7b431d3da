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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "probe/background.hpp"
#include "probe/dataio.hpp"
#include "probe/error.hpp"
#include "probe/groundplane.hpp"
#include "probe/image.hpp"
#include "probe/lighting.hpp"
#include "probe/occlusion.hpp"
#include "probe/shadow.hpp"

namespace probe {

/// A failure (or fallback) of one pipeline stage during a build.
struct StageError {
  std::string stage;  // "groundplane", "shadow", ...
  ErrorCode code = ErrorCode::kIo;
  std::string message;

  bool operator==(const StageError&) const = default;
};

struct BuildOptions {
  ObserveOptions observe;
  /// Probe plate window in frames; 0 means one second of video.
  int probe_window = 0;
  int shadow_window = kShadowWindowFrames;
  /// Shadow evidence stops being collected once this many casters with a
  /// non-empty shadow have been seen.
  int max_shadow_observations = 200;
  ShadowEvidenceOptions evidence;
};

struct BuildStats {
  int training_frames = 0;
  int observations = 0;
  int person_samples = 0;
  int shadow_casters = 0;
  int shadow_observations = 0;  // casters with a non-empty shadow

  bool operator==(const BuildStats&) const = default;
};

/// Everything the compositor needs, derived from a scene's training split.
struct SceneProducts {
  SceneManifest manifest;
  Image background;
  OcclusionMap occlusion;
  LightingMap lighting;
  std::optional<PlaneModel> plane;
  ShadowModel shadow;
  BuildStats stats;
  std::vector<StageError> errors;
};

/// Observes the training split and fits every model. A failing plane fit is
/// recorded in `errors` and leaves `plane` empty; missing shadow evidence
/// falls back to the contact-shadow model.
SceneProducts build_products(const Dataset& dataset, const BuildOptions& options = {});

inline constexpr const char* kProductsFile = "probe_products.json";

/// Writes probe_products.json, background.png, occlusion.bin and lighting.bin.
void save_products(const SceneProducts& products, const std::filesystem::path& dir);
SceneProducts load_products(const std::filesystem::path& dir);
std::string products_to_json(const SceneProducts& products);

/// A cut-out cropped to its opaque pixels.
struct Sprite {
  Image pixels;
  BitMask mask;

  int width() const { return pixels.width(); }
  int height() const { return pixels.height(); }

  /// Alpha >= 128 is opaque. Throws kInvalidArgument if nothing is opaque.
  static Sprite from_rgba(const RgbaImage& rgba);
  static Sprite from_png(std::span<const std::uint8_t> png);
};

/// Bilinear resample to width x height. Colours are averaged over opaque
/// neighbours only; the mask is resampled as coverage and kept where >= 0.5.
Sprite resample_sprite(const Sprite& sprite, int width, int height);

struct StageToggles {
  bool scale = true;
  bool lighting = true;
  bool occlusion = true;
  bool shadow = true;
};

struct Placement {
  int id = 0;
  std::shared_ptr<const Sprite> sprite;
  double x = 0.0;  // bottom-middle, bottom-left origin
  double y = 0.0;
  double anchor_x = 0.0;
  double anchor_y = 0.0;
  double height_override = 1.0;
  double brightness = 1.0;
  /// Object height at the anchor in pixels.
  double reference_height = 0.0;
  /// L under the object at the anchor divided by `brightness`; empty when the
  /// scene has no lighting samples.
  std::optional<Color3> lighting_anchor;
};

/// Validates the position and captures the height and lighting anchors.
/// Throws kOffPlane when the plane predicts a non-positive height there and
/// kInvalidArgument for positions outside the image or bad factors.
Placement place(const SceneProducts& products, std::shared_ptr<const Sprite> sprite,
                double x, double y, double height_override = 1.0,
                double brightness = 1.0, int id = 0);

/// Same placement at a new position; anchors are unchanged.
Placement move(const SceneProducts& products, const Placement& placement, double x,
               double y);

/// Re-anchors at the current position with new user factors.
Placement adjust(const SceneProducts& products, const Placement& placement,
                 double height_override, double brightness);

/// Scaled and relit object at its current position, before occlusion.
PlacedObject realize(const SceneProducts& products, const Placement& placement,
                     const StageToggles& toggles = {});

struct StageTimings {
  double scale_ms = 0.0;
  double lighting_ms = 0.0;
  double occlusion_ms = 0.0;
  double shadow_ms = 0.0;
  double total_ms = 0.0;
};

struct CompositeResult {
  Image comp;   // scaled, relit, occlusion-composited; no shadows
  Image final_image;  // comp with shadows applied
  StageTimings timings;
};

/// Draws placements farthest first (largest bottom y, then by order given);
/// each pixel is drawn iff the occlusion test passes, so nearer objects land
/// on top. Shadows of all objects combine by per-pixel min gain and are
/// applied once; inserted objects never receive shadows.
CompositeResult render_composite(const SceneProducts& products,
                                 std::span<const Placement> placements,
                                 const StageToggles& toggles = {});

}  // namespace probe
