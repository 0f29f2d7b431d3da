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


#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "probe/error.hpp"
#include "probe/shadow.hpp"

namespace probe {
namespace {

using testing::code_of;

TEST(Shadow, ShearOfSinglePixel) {
  // One pixel 10 rows above the contact row of a 40x40 raster.
  const int H = 40;
  const BitMask m = BitMask::from_spans(40, H, {{row_of(15, H), 5, 6}, {row_of(5, H), 5, 6}});
  const BitMask f = shear_footprint(m, 5, 1.0, 0.5);
  // d = 10: rows y = 5 + [ceil(4.75), ceil(5.25)) = {10}; cols [ceil(14.5), ceil(15.5)) = {15}.
  EXPECT_TRUE(f.contains(15, row_of(10, H)));
  // d = 0: rows [ceil(-0.25), ceil(0.25)) = {0}.
  EXPECT_TRUE(f.contains(5, row_of(5, H)));
  EXPECT_EQ(f.area(), 2);
}

TEST(Shadow, ShearWithUnitSlopeIsGapless) {
  const int H = 30;
  const BitMask column = testing::rect_mask(30, H, 4, 10, 5, 20);
  const BitMask f = shear_footprint(column, y_of(19, H), 0.0, 1.0);
  EXPECT_EQ(f, column);
  const BitMask flipped = shear_footprint(column, y_of(19, H), 0.0, -1.0);
  EXPECT_EQ(flipped, testing::rect_mask(30, H, 4, 19, 5, 29));
}

TEST(Shadow, ContactFootprintSurroundsFeet) {
  const BitMask m = testing::rect_mask(20, 20, 8, 5, 11, 10);
  const BitMask f = contact_footprint(m, 2);
  EXPECT_FALSE(f.contains(9, 9));
  EXPECT_TRUE(f.contains(6, 9));
  EXPECT_TRUE(f.contains(12, 11));
  EXPECT_FALSE(f.contains(13, 11));
  EXPECT_EQ(f.area(), 7 * 5 - 3 * 3);
  EXPECT_TRUE(contact_footprint(BitMask(20, 20)).empty());
}

TEST(Shadow, FootprintExcludesCaster) {
  ShadowModel model;
  model.mode = ShadowMode::kShear;
  model.k_x = 0.2;
  model.k_y = 0.3;
  const BitMask m = testing::rect_mask(50, 50, 20, 10, 26, 40);
  EXPECT_EQ(shadow_footprint(model, m, y_of(39, 50)).intersection_area(m), 0);
}

TEST(Shadow, ModeNamesRoundTrip) {
  EXPECT_EQ(shadow_mode_from_string(to_string(ShadowMode::kShear)), ShadowMode::kShear);
  EXPECT_EQ(shadow_mode_from_string(to_string(ShadowMode::kContact)), ShadowMode::kContact);
  EXPECT_EQ(code_of([] { shadow_mode_from_string("soft"); }), ErrorCode::kFormat);
}

TEST(Shadow, EvidenceFindsDarkenedGround) {
  const int W = 60;
  const int H = 60;
  Image plate(W, H, {120, 100, 80});
  Image frame = plate;
  const BitMask caster_mask = testing::rect_mask(W, H, 20, 20, 24, 40);
  caster_mask.for_each_pixel([&](int c, int r) { frame.set(c, r, {0, 200, 0}); });
  for (int c = 24; c < 34; ++c) frame.set(c, 39, {60, 50, 40});
  frame.set(40, 39, {60, 80, 40});  // dark but wrong chroma
  InstanceObservation caster = describe(0, "person", 1.0, caster_mask, frame);
  const BitMask other = testing::rect_mask(W, H, 30, 35, 32, 40);
  const ShadowObservation obs = extract_shadow_evidence(frame, plate, caster, other);
  EXPECT_EQ(obs.shadow.area(), 8);
  EXPECT_FALSE(obs.shadow.contains(30, 39));
  EXPECT_FALSE(obs.shadow.contains(40, 39));
  EXPECT_EQ(obs.search.intersection_area(caster_mask), 0);
  ASSERT_EQ(obs.ratios.size(), 8u);
  EXPECT_NEAR(obs.ratios[0], 0.5, 0.01);
  EXPECT_EQ(obs.caster_height, 20);
}

ShadowObservation synthetic_observation(std::mt19937_64& rng, double kx, double ky) {
  const int W = 200;
  const int H = 200;
  std::uniform_int_distribution<int> pos(60, 120);
  std::uniform_int_distribution<int> tall(20, 40);
  const int col = pos(rng);
  const int bottom_row = pos(rng) + 40;
  const int h = tall(rng);
  const BitMask caster = testing::rect_mask(W, H, col, bottom_row - h + 1, col + 5, bottom_row + 1);
  const int bottom_y = y_of(bottom_row, H);
  ShadowObservation obs;
  obs.caster = caster;
  obs.bottom_y = bottom_y;
  obs.bottom_x = col + 2;
  obs.caster_height = h;
  obs.search = testing::rect_mask(W, H, 0, 0, W, H).subtracted(caster);
  obs.shadow = shear_footprint(caster, bottom_y, kx, ky).intersected(obs.search);
  obs.ratios.assign(static_cast<std::size_t>(obs.shadow.area()), 0.4);
  return obs;
}

TEST(Shadow, FitRecoversShearOnCleanEvidence) {
  std::mt19937_64 rng(17);
  std::vector<ShadowObservation> obs;
  for (int i = 0; i < 12; ++i) obs.push_back(synthetic_observation(rng, 0.73, 0.21));
  const ShadowModel m = fit_shadow_model(obs);
  EXPECT_EQ(m.mode, ShadowMode::kShear);
  EXPECT_NEAR(m.k_x, 0.73, 0.015);
  EXPECT_NEAR(m.k_y, 0.21, 0.015);
  EXPECT_GT(m.mean_iou, 0.95);
  EXPECT_NEAR(m.g, 0.4, 1e-12);
  EXPECT_EQ(m.observation_count, 12);
  EXPECT_NEAR(ShadowFitProblem(obs).mean_iou(0.73, 0.21), 1.0, 1e-12);
}

TEST(Shadow, FitRejectsMissingEvidence) {
  std::mt19937_64 rng(2);
  std::vector<ShadowObservation> obs;
  for (int i = 0; i < 4; ++i) obs.push_back(synthetic_observation(rng, 0.5, 0.1));
  EXPECT_EQ(code_of([&] { fit_shadow_model(obs); }), ErrorCode::kInsufficientData);
  for (auto& o : obs) o.shadow = BitMask(o.shadow.width(), o.shadow.height());
  EXPECT_EQ(code_of([&] { fit_shadow_model(obs); }), ErrorCode::kNoShadowEvidence);
  EXPECT_EQ(code_of([] { fit_shadow_model({}); }), ErrorCode::kNoShadowEvidence);
}

TEST(Shadow, MedianRatioIsLowerMedian) {
  std::vector<ShadowObservation> obs(2);
  obs[0].ratios = {0.7, 0.2};
  obs[1].ratios = {0.5, 0.4};
  EXPECT_DOUBLE_EQ(median_ratio(obs), 0.4);
  EXPECT_EQ(median_ratio({}), 0.0);
}

TEST(Shadow, GainIsCoreInsideAndFeatheredAtEdges) {
  const ShadowModel model = contact_shadow_model(0.5);
  const BitMask m = testing::rect_mask(30, 30, 10, 5, 20, 20);
  const GainBias gb = synthesize_gain_bias(model, m, y_of(19, 30), LightingMap(), OcclusionMap());
  EXPECT_FLOAT_EQ(gb.gain_at(8, 21), 0.5f);
  EXPECT_FLOAT_EQ(gb.gain_at(7, 21), 0.75f);
  EXPECT_FLOAT_EQ(gb.gain_at(15, 22), 0.75f);
  EXPECT_FLOAT_EQ(gb.gain_at(15, 19), 1.0f);
  EXPECT_FLOAT_EQ(gb.gain_at(0, 0), 1.0f);
}

TEST(Shadow, AlreadyDarkPixelsAreNotDarkenedAgain) {
  const int N = 30;
  LightingAccumulator acc(N, N);
  acc.add(testing::rect_mask(N, N, 0, 0, N, N), {200, 200, 200});
  acc.add(testing::rect_mask(N, N, 0, 0, 5, N), {0, 0, 0});
  acc.add(testing::rect_mask(N, N, 0, 0, 5, N), {0, 0, 0});
  const LightingMap light = acc.finalize();
  const ShadowModel model = contact_shadow_model(0.5);
  const BitMask m = testing::rect_mask(N, N, 6, 5, 12, 20);
  const GainBias gb = synthesize_gain_bias(model, m, y_of(19, N), light, OcclusionMap());
  EXPECT_FLOAT_EQ(gb.gain_at(3, 20), 1.0f);
  EXPECT_LT(gb.gain_at(8, 21), 1.0f);
}

TEST(Shadow, ShadowBehindOccluderIsHidden) {
  const int N = 40;
  ShadowModel model;
  model.mode = ShadowMode::kShear;
  model.k_x = 0.0;
  model.k_y = 2.0;
  model.g = 0.5;
  // Caster rows 20..29; its shadow falls on rows 10..19 (y 20..29).
  const BitMask m = testing::rect_mask(N, N, 10, 20, 12, 30);
  const int bottom_y = y_of(29, N);
  OcclusionMap occ(N, N);
  // Something standing just behind the caster covered rows 0..14.
  occ.absorb(testing::rect_mask(N, N, 10, 0, 12, 15), bottom_y + 1);
  // Row 15 was only covered by probes standing at its own depth.
  occ.absorb(testing::rect_mask(N, N, 10, 15, 12, 16), y_of(15, N));
  const GainBias gb = synthesize_gain_bias(model, m, bottom_y, LightingMap(), occ);
  EXPECT_FLOAT_EQ(gb.gain_at(10, 14), 1.0f);
  EXPECT_FLOAT_EQ(gb.gain_at(11, 12), 1.0f);
  EXPECT_FLOAT_EQ(gb.gain_at(10, 15), 0.75f);
  EXPECT_FLOAT_EQ(gb.gain_at(10, 17), 0.75f);
  EXPECT_FLOAT_EQ(gb.gain_at(10, 25), 1.0f);
}

TEST(Shadow, OverlappingShadowsTakeTheDarkerGain) {
  const BitMask a = testing::rect_mask(30, 30, 5, 10, 10, 20);
  const BitMask b = testing::rect_mask(30, 30, 7, 10, 12, 20);
  GainBias gb = GainBias::identity(30, 30);
  add_shadow(gb, contact_shadow_model(0.5), a, y_of(19, 30), LightingMap(), OcclusionMap());
  const GainBias once = gb;
  add_shadow(gb, contact_shadow_model(0.5), a, y_of(19, 30), LightingMap(), OcclusionMap());
  EXPECT_EQ(gb.gain, once.gain);
  add_shadow(gb, contact_shadow_model(0.5), b, y_of(19, 30), LightingMap(), OcclusionMap());
  for (std::size_t i = 0; i < gb.gain.size(); ++i) {
    EXPECT_LE(gb.gain[i], once.gain[i]);
    EXPECT_GE(gb.gain[i], 0.5f);
  }
}

TEST(Shadow, ApplyGainBias) {
  GainBias gb = GainBias::identity(2, 1);
  gb.gain[1] = 0.5f;
  gb.bias[0] = 10.0f;
  Image img(2, 1, {100, 100, 100});
  const Image out = apply_gain_bias(img, gb);
  EXPECT_EQ(out.at(0, 0), (Rgb{110, 100, 100}));
  EXPECT_EQ(out.at(1, 0), (Rgb{50, 50, 50}));
  EXPECT_EQ(apply_gain_bias(img, GainBias::identity(2, 1)), img);
  EXPECT_EQ(code_of([&] { apply_gain_bias(img, GainBias::identity(1, 1)); }),
            ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace probe
