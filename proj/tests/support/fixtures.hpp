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
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "probe/bitmask.hpp"
#include "probe/error.hpp"
#include "probe/image.hpp"

namespace probe::testing {

inline BitMask random_mask(std::mt19937_64& rng, int width, int height,
                           double density = 0.3) {
  std::bernoulli_distribution on(density);
  std::vector<std::uint8_t> dense(static_cast<std::size_t>(width) * height);
  for (auto& v : dense) v = on(rng);
  return BitMask::from_dense(width, height, dense);
}

inline BitMask rect_mask(int width, int height, int col0, int row0, int col1, int row1) {
  std::vector<Span> spans;
  for (int row = row0; row < row1; ++row) spans.push_back({row, col0, col1});
  return BitMask::from_spans(width, height, std::move(spans));
}

inline Image random_image(std::mt19937_64& rng, int width, int height) {
  Image img(width, height);
  std::uniform_int_distribution<int> byte(0, 255);
  for (auto& v : img.bytes()) v = static_cast<std::uint8_t>(byte(rng));
  return img;
}

/// Runs `f` and returns the code of the probe::Error it throws.
inline ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kIo;
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / ("probe_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace probe::testing
