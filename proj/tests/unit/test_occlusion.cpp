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
#include "probe/occlusion.hpp"

namespace probe {
namespace {

using testing::code_of;

TEST(Occlusion, RefineKeepsOnlyChangedPixels) {
  Image plate(4, 1, {100, 100, 100});
  Image frame = plate;
  frame.set(0, 0, {131, 100, 100});
  frame.set(1, 0, {130, 100, 100});
  frame.set(2, 0, {100, 60, 100});
  frame.set(3, 0, {200, 200, 200});
  const BitMask det = testing::rect_mask(4, 1, 0, 0, 3, 1);
  const BitMask refined = refine_mask(det, frame, plate, 30);
  EXPECT_TRUE(refined.contains(0, 0));
  EXPECT_FALSE(refined.contains(1, 0));
  EXPECT_TRUE(refined.contains(2, 0));
  EXPECT_FALSE(refined.contains(3, 0));
}

TEST(Occlusion, RefineRejectsMismatchedSizes) {
  EXPECT_EQ(code_of([] {
              refine_mask(BitMask(4, 4), Image(4, 4), Image(4, 3), 30);
            }),
            ErrorCode::kInvalidArgument);
}

TEST(Occlusion, DescribeMeasuresBottomAndHeight) {
  // rows 2..5 of an 8-row raster, columns 3..6 on the lowest row.
  std::vector<Span> spans{{2, 4, 5}, {3, 4, 5}, {4, 4, 6}, {5, 3, 7}};
  BitMask m = BitMask::from_spans(10, 8, spans);
  Image frame(10, 8, {10, 20, 30});
  const InstanceObservation obs = describe(7, "person", 0.8, m, frame);
  EXPECT_EQ(obs.frame_index, 7);
  EXPECT_EQ(obs.bottom_y, 2);
  EXPECT_EQ(obs.pixel_height, 4);
  EXPECT_DOUBLE_EQ(obs.bottom_x, 4.5);
  EXPECT_DOUBLE_EQ(obs.mean_color[1], 20.0);
  EXPECT_EQ(code_of([&] { describe(0, "person", 1, BitMask(10, 8), frame); }),
            ErrorCode::kInvalidArgument);
}

TEST(Occlusion, ObserveDropsSmallMasks) {
  Image plate(20, 20, {50, 50, 50});
  Image frame = plate;
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 10; ++c) frame.set(c, r, {200, 0, 0});
  std::vector<RawDetection> dets{
      {0, "person", 0.9, testing::rect_mask(20, 20, 0, 0, 10, 10)},
      {0, "car", 0.9, testing::rect_mask(20, 20, 5, 5, 12, 12)}};
  ObserveOptions opts;
  opts.min_area = 30;
  opts.drop_truncated = false;
  const auto obs = observe_frame(0, frame, dets, plate, opts);
  ASSERT_EQ(obs.size(), 1u);
  EXPECT_EQ(obs[0].class_name, "person");
  EXPECT_EQ(obs[0].mask.area(), 100);
}

TEST(Occlusion, ContactHiddenLooksJustBelowTheBottomRow) {
  const BitMask person = testing::rect_mask(30, 30, 10, 5, 16, 15);  // bottom row 14
  const std::vector<BitMask> below{testing::rect_mask(30, 30, 12, 15, 20, 25)};
  const std::vector<BitMask> diagonal{testing::rect_mask(30, 30, 16, 15, 20, 25)};
  const std::vector<BitMask> apart{testing::rect_mask(30, 30, 17, 15, 20, 25)};
  const std::vector<BitMask> lower{testing::rect_mask(30, 30, 10, 17, 16, 25)};
  const std::vector<BitMask> above{testing::rect_mask(30, 30, 10, 0, 16, 6)};
  EXPECT_TRUE(contact_hidden(person, below, 2));
  EXPECT_TRUE(contact_hidden(person, diagonal, 2));
  EXPECT_FALSE(contact_hidden(person, apart, 2));
  EXPECT_FALSE(contact_hidden(person, lower, 2));
  EXPECT_TRUE(contact_hidden(person, lower, 3));
  EXPECT_FALSE(contact_hidden(person, above, 2));
  EXPECT_FALSE(contact_hidden(BitMask(30, 30), below, 2));
}

TEST(Occlusion, ObserveDropsInstancesWithHiddenFeet) {
  Image plate(40, 40, {50, 50, 50});
  Image frame = plate;
  // A far person whose legs are covered by a nearer one standing in front.
  const BitMask far_visible = testing::rect_mask(40, 40, 10, 2, 16, 20);
  const BitMask near_person = testing::rect_mask(40, 40, 8, 20, 18, 38);
  far_visible.for_each_pixel([&](int c, int r) { frame.set(c, r, {200, 0, 0}); });
  near_person.for_each_pixel([&](int c, int r) { frame.set(c, r, {0, 0, 200}); });
  const std::vector<RawDetection> dets{{0, "person", 0.9, far_visible},
                                       {0, "person", 0.9, near_person}};
  const auto obs = observe_frame(0, frame, dets, plate);
  ASSERT_EQ(obs.size(), 1u);
  EXPECT_EQ(obs[0].bottom_y, 40 - 1 - 37);

  ObserveOptions keep;
  keep.drop_truncated = false;
  EXPECT_EQ(observe_frame(0, frame, dets, plate, keep).size(), 2u);
}

TEST(Occlusion, MapIsPerPixelMaxOfBottoms) {
  std::mt19937_64 rng(11);
  const int W = 17;
  const int H = 13;
  std::vector<int> oracle(W * H, OcclusionMap::kNever);
  OcclusionMap map(W, H);
  for (int k = 0; k < 40; ++k) {
    const BitMask m = testing::random_mask(rng, W, H, 0.2);
    const int y = static_cast<int>(rng() % H);
    map.absorb(m, y);
    m.for_each_pixel([&](int c, int r) {
      oracle[r * W + c] = std::max(oracle[r * W + c], y);
    });
  }
  for (int r = 0; r < H; ++r)
    for (int c = 0; c < W; ++c) EXPECT_EQ(map.at(c, r), oracle[r * W + c]);
}

TEST(Occlusion, NeverObservedPixelsHideObjects) {
  OcclusionMap map(4, 4);
  PlacedObject obj;
  obj.mask = testing::rect_mask(4, 4, 0, 0, 4, 4);
  obj.patch = Image(4, 4, {9, 9, 9});
  obj.bottom_y = 0;
  EXPECT_TRUE(visible_pixels(obj, map).empty());
}

TEST(Occlusion, ObjectHiddenBehindCloserOccluder) {
  // Probes standing at y=2 covered the top half. A nearer object (y=1) shows
  // there; one at y=2 or farther does not.
  OcclusionMap map(4, 4);
  map.absorb(testing::rect_mask(4, 4, 0, 0, 4, 2), 2);
  PlacedObject obj;
  obj.mask = testing::rect_mask(4, 4, 0, 0, 4, 4);
  obj.patch = Image(4, 4, {9, 9, 9});
  obj.bottom_y = 1;
  EXPECT_EQ(visible_pixels(obj, map).area(), 8);
  EXPECT_EQ(visible_pixels(obj, map), testing::rect_mask(4, 4, 0, 0, 4, 2));
  obj.bottom_y = 2;
  EXPECT_TRUE(visible_pixels(obj, map).empty());
}

TEST(Occlusion, CompositeOnlyTouchesVisiblePixels) {
  OcclusionMap map(3, 1);
  map.absorb(testing::rect_mask(3, 1, 0, 0, 1, 1), 0);
  PlacedObject obj;
  obj.mask = testing::rect_mask(3, 1, 0, 0, 2, 1);
  obj.patch = Image(2, 1, {1, 2, 3});
  obj.bottom_y = -1;
  const Image out = composite_object(Image(3, 1, {7, 7, 7}), obj, map);
  EXPECT_EQ(out.at(0, 0), (Rgb{1, 2, 3}));
  EXPECT_EQ(out.at(1, 0), (Rgb{7, 7, 7}));
  EXPECT_EQ(out.at(2, 0), (Rgb{7, 7, 7}));
}

TEST(Occlusion, MergeEqualsJointBuild) {
  std::mt19937_64 rng(5);
  OcclusionMap a(9, 9);
  OcclusionMap b(9, 9);
  OcclusionMap all(9, 9);
  for (int k = 0; k < 10; ++k) {
    const BitMask m = testing::random_mask(rng, 9, 9);
    const int y = static_cast<int>(rng() % 9);
    (k % 2 ? a : b).absorb(m, y);
    all.absorb(m, y);
  }
  a.merge(b);
  EXPECT_EQ(a, all);
}

TEST(Occlusion, BinaryRoundTripAndCorruption) {
  std::mt19937_64 rng(8);
  OcclusionMap map(6, 5);
  map.absorb(testing::random_mask(rng, 6, 5), 3);
  const auto bytes = encode_occlusion_map(map);
  EXPECT_EQ(decode_occlusion_map(bytes), map);

  auto truncated = bytes;
  truncated.pop_back();
  EXPECT_EQ(code_of([&] { decode_occlusion_map(truncated); }), ErrorCode::kFormat);
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_EQ(code_of([&] { decode_occlusion_map(trailing); }), ErrorCode::kFormat);
  auto out_of_range = bytes;
  out_of_range[8] = 0x40;  // first value 0x..40 >= height
  out_of_range[9] = 0x00;
  EXPECT_EQ(code_of([&] { decode_occlusion_map(out_of_range); }), ErrorCode::kFormat);

  const auto dir = testing::temp_dir("occ_io");
  save_occlusion_map(map, dir / "occ.bin");
  EXPECT_EQ(load_occlusion_map(dir / "occ.bin"), map);
}

TEST(Occlusion, VisualizationMarksUnobservedBlack) {
  OcclusionMap map(2, 2);
  map.absorb(testing::rect_mask(2, 2, 0, 0, 1, 1), 1);
  const Image viz = visualize_occlusion(map);
  EXPECT_EQ(viz.at(1, 1), (Rgb{0, 0, 0}));
  EXPECT_EQ(viz.at(0, 0).r, 255);
}

}  // namespace
}  // namespace probe
