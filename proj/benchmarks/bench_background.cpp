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

#include "probe/background.hpp"
#include "probe/synth.hpp"

namespace {

using namespace probe;

void BM_MedianPlate(benchmark::State& state) {
  const int window = static_cast<int>(state.range(0));
  const synth::SynthConfig c = synth::preset("street", window, 1);
  std::vector<Image> frames;
  for (int t = 0; t < window; ++t) frames.push_back(synth::render_frame(c, t).image);
  for (auto _ : state) {
    benchmark::DoNotOptimize(median_image(frames));
  }
  state.SetItemsProcessed(state.iterations() * c.width * c.height);
}
BENCHMARK(BM_MedianPlate)->Arg(5)->Arg(15)->Arg(31)->Unit(benchmark::kMillisecond);

}  // namespace
