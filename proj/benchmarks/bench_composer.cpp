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


#include <benchmark/benchmark.h>

#include <memory>

#include "probe/composer.hpp"
#include "probe/synth.hpp"

namespace {

using namespace probe;

SceneProducts street_products() {
  const int frames = 40;
  return build_products(synth::SynthDataset(synth::preset("street", frames, 1), frames));
}

std::shared_ptr<const Sprite> block_sprite(int w, int h) {
  RgbaImage rgba{w, h, {}};
  for (int i = 0; i < w * h; ++i) rgba.pixels.insert(rgba.pixels.end(), {200, 80, 60, 255});
  return std::make_shared<const Sprite>(Sprite::from_rgba(rgba));
}

void BM_RenderComposite(benchmark::State& state) {
  static const SceneProducts products = street_products();
  const auto sprite = block_sprite(40, 120);
  std::vector<Placement> placements;
  for (int i = 0; i < state.range(0); ++i) {
    placements.push_back(place(products, sprite, 100.0 + 80.0 * i, 40.0 + 25.0 * i));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_composite(products, placements));
  }
}
BENCHMARK(BM_RenderComposite)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
