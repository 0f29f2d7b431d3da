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

#include <span>
#include <string_view>
#include <vector>

#include "probe/bitmask.hpp"
#include "probe/image.hpp"
#include "probe/lighting.hpp"
#include "probe/occlusion.hpp"

namespace probe {

struct ShadowEvidenceOptions {
  double radius_factor = 2.0;     // search radius in caster heights
  double darkening_cutoff = 0.85;  // luminance ratio below which a pixel is dark
  double chroma_tolerance = 0.15;
};

/// Shadow evidence around one caster. `search` is the region the caster's
/// shadow could be observed in: the disc around the contact point minus every
/// detection mask of the frame and the caster itself.
struct ShadowObservation {
  int frame_index = 0;
  BitMask caster;
  int bottom_y = 0;
  double bottom_x = 0.0;
  int caster_height = 0;
  BitMask search;
  BitMask shadow;
  std::vector<double> ratios;  // frame / plate luminance per shadow pixel
};

ShadowObservation extract_shadow_evidence(const Image& frame, const Image& plate,
                                          const InstanceObservation& caster,
                                          const BitMask& excluded,
                                          const ShadowEvidenceOptions& options = {});

enum class ShadowMode { kShear, kContact };

std::string_view to_string(ShadowMode mode);
ShadowMode shadow_mode_from_string(std::string_view text);

struct ShadowModel {
  ShadowMode mode = ShadowMode::kContact;
  double k_x = 0.0;
  double k_y = 0.0;
  double g = 0.85;
  /// Pixels whose L luminance is below cutoff * scene median are already in
  /// shadow and are not darkened again.
  double cutoff = 0.6;
  /// A shadow pixel s is hidden when z~(s) is known and s_y - z~(s) exceeds
  /// this fraction of the caster's pixel height.
  double occlusion_slack = 0.1;
  int observation_count = 0;
  double mean_iou = 0.0;
  double iou_std = 0.0;
  double coarse_k_x = 0.0;
  double coarse_k_y = 0.0;

  bool operator==(const ShadowModel&) const = default;
};

inline constexpr double kContactShadowGain = 0.85;

ShadowModel contact_shadow_model(double g = kContactShadowGain);

/// Image of every pixel of `mask` under the shear: a pixel at height d above
/// `bottom_y` covers rows bottom_y + r for integer r in [k_y(d - 1/2),
/// k_y(d + 1/2)) and columns [col - 1/2 + k_x d, col + 1/2 + k_x d).
BitMask shear_footprint(const BitMask& mask, int bottom_y, double k_x, double k_y);

/// The mask's bottom row dilated by `radius` pixels, minus the mask.
BitMask contact_footprint(const BitMask& mask, int radius = 3);

/// Footprint for the model's mode, excluding the caster's own pixels.
BitMask shadow_footprint(const ShadowModel& model, const BitMask& mask, int bottom_y);

/// Mean IoU over observations with a non-empty shadow, comparing the
/// predicted footprint restricted to each observation's search region.
class ShadowFitProblem {
 public:
  explicit ShadowFitProblem(std::span<const ShadowObservation> observations);
  ~ShadowFitProblem();
  ShadowFitProblem(ShadowFitProblem&&) noexcept;
  ShadowFitProblem& operator=(ShadowFitProblem&&) noexcept;

  int size() const;
  double mean_iou(double k_x, double k_y) const;
  std::vector<double> ious(double k_x, double k_y) const;

 private:
  struct Item;
  double iou_of(const Item& item, double k_x, double k_y,
                std::vector<Span>& scratch) const;

  std::vector<Item> items_;
  int height_ = 0;
};

struct ShadowFitOptions {
  int min_observations = 10;
};

/// Coarse search over k in [-3, 3] step 0.1, then a step 0.01 refinement
/// within +-0.1 of the coarse optimum. Ties go to the lexicographically
/// smallest (k_x, k_y). Throws kNoShadowEvidence when every shadow is empty
/// and kInsufficientData below `min_observations` non-empty ones.
ShadowModel fit_shadow_model(std::span<const ShadowObservation> observations,
                             const ShadowFitOptions& options = {});

/// Lower median of all darkening ratios; 0 when there are none.
double median_ratio(std::span<const ShadowObservation> observations);

/// I_final = G I_comp + B. B has three channels per pixel.
struct GainBias {
  int width = 0;
  int height = 0;
  std::vector<float> gain;
  std::vector<float> bias;

  static GainBias identity(int width, int height);
  float gain_at(int col, int row) const {
    return gain[static_cast<std::size_t>(row) * width + col];
  }
};

/// Lowers `gb.gain` to this caster's shadow gain wherever that is darker.
void add_shadow(GainBias& gb, const ShadowModel& model, const BitMask& mask,
                int bottom_y, const LightingMap& lighting,
                const OcclusionMap& occlusion);

GainBias synthesize_gain_bias(const ShadowModel& model, const BitMask& mask,
                              int bottom_y, const LightingMap& lighting,
                              const OcclusionMap& occlusion);

Image apply_gain_bias(const Image& composite, const GainBias& gb);

}  // namespace probe
