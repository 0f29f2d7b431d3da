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
#include "probe/bitmask.hpp"
#include "probe/error.hpp"

namespace probe {
namespace {

TEST(DecodeMask, SingleBackgroundRunIsEmpty) {
  const std::vector<std::uint32_t> runs{7 * 5};
  const BitMask m = decode_mask(runs, 7, 5);
  EXPECT_TRUE(m.empty());
  EXPECT_EQ(m.width(), 7);
  EXPECT_EQ(m.height(), 5);
}

TEST(DecodeMask, LeadingZeroRunIsAllForeground) {
  const std::vector<std::uint32_t> runs{0, 7 * 5};
  const BitMask m = decode_mask(runs, 7, 5);
  EXPECT_EQ(m.area(), 35);
}

TEST(DecodeMask, RunSumMismatchIsFormatError) {
  const std::vector<std::uint32_t> runs{3, 4};
  try {
    decode_mask(runs, 4, 4);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
  }
}

TEST(DecodeMask, RunsWrapAcrossRows) {
  // 4x3 raster: background 3, foreground 3 (row 0 col 3, row 1 cols 0-1).
  const std::vector<std::uint32_t> runs{3, 3, 6};
  const BitMask m = decode_mask(runs, 4, 3);
  EXPECT_TRUE(m.contains(3, 0));
  EXPECT_TRUE(m.contains(0, 1));
  EXPECT_TRUE(m.contains(1, 1));
  EXPECT_FALSE(m.contains(2, 1));
  EXPECT_EQ(m.area(), 3);
}

TEST(EncodeRle, Random16x16MatchesDenseBitmap) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const BitMask m = testing::random_mask(rng, 16, 16, 0.4);
    const std::vector<std::uint8_t> dense = m.to_dense();
    const BitMask back = decode_mask(encode_rle(m), 16, 16);
    EXPECT_EQ(back.to_dense(), dense);
  }
}

TEST(BitMask, FromSpansNormalizesAndClips) {
  const BitMask m = BitMask::from_spans(10, 4, {{1, 5, 8}, {1, 2, 6}, {0, -3, 2}, {9, 0, 3}});
  ASSERT_EQ(m.spans().size(), 2u);
  EXPECT_EQ(m.spans()[0], (Span{0, 0, 2}));
  EXPECT_EQ(m.spans()[1], (Span{1, 2, 8}));
}

TEST(BitMask, SetOperationsMatchDenseOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const BitMask a = testing::random_mask(rng, 23, 17, 0.5);
    const BitMask b = testing::random_mask(rng, 23, 17, 0.5);
    const auto da = a.to_dense();
    const auto db = b.to_dense();
    std::vector<std::uint8_t> u(da.size()), i(da.size()), s(da.size());
    std::int64_t inter = 0;
    for (std::size_t k = 0; k < da.size(); ++k) {
      u[k] = da[k] || db[k];
      i[k] = da[k] && db[k];
      s[k] = da[k] && !db[k];
      inter += i[k];
    }
    EXPECT_EQ(a.united(b).to_dense(), u);
    EXPECT_EQ(a.intersected(b).to_dense(), i);
    EXPECT_EQ(a.subtracted(b).to_dense(), s);
    EXPECT_EQ(a.intersection_area(b), inter);
  }
}

TEST(BitMask, BoundsAndContains) {
  const BitMask m = testing::rect_mask(20, 20, 3, 4, 9, 12);
  const PixelBox box = m.bounds();
  EXPECT_EQ(box.col_min, 3);
  EXPECT_EQ(box.row_min, 4);
  EXPECT_EQ(box.col_max, 8);
  EXPECT_EQ(box.row_max, 11);
  EXPECT_TRUE(m.contains(8, 11));
  EXPECT_FALSE(m.contains(9, 11));
  EXPECT_EQ(m.area(), 6 * 8);
}

TEST(BitMask, TranslatedClipsAtBorder) {
  const BitMask m = testing::rect_mask(10, 10, 6, 6, 10, 10);
  const BitMask t = m.translated(2, 2);
  EXPECT_EQ(t.area(), 2 * 2);
  EXPECT_TRUE(t.contains(9, 9));
}

TEST(Iou, KnownValues) {
  const BitMask a = testing::rect_mask(10, 10, 0, 0, 4, 4);
  const BitMask b = testing::rect_mask(10, 10, 2, 0, 6, 4);
  EXPECT_DOUBLE_EQ(iou(a, b), 8.0 / 24.0);
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
}

}  // namespace
}  // namespace probe
