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

#include "probe/composer.hpp"
#include "probe/synth.hpp"

namespace {

using namespace probe;

std::vector<ShadowObservation> shadow_evidence(int count) {
  const synth::SynthConfig c = synth::preset("shadow", count, 1);
  const Image plate = synth::render_background(c);
  std::vector<ShadowObservation> out;
  for (int t = 0; t < count; ++t) {
    const synth::GroundTruthFrame f = synth::render_frame(c, t);
    BitMask excluded(c.width, c.height);
    for (const auto& s : f.sprites) excluded = excluded.united(s.visible);
    for (const auto& s : f.sprites) {
      if (s.visible.empty()) continue;
      const InstanceObservation o = describe(t, s.class_name, 1.0, s.visible, f.image);
      out.push_back(extract_shadow_evidence(f.image, plate, o, excluded));
    }
  }
  return out;
}

void BM_ShadowFit(benchmark::State& state) {
  const auto evidence = shadow_evidence(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_shadow_model(evidence));
  }
  state.counters["observations"] = static_cast<double>(evidence.size());
}
BENCHMARK(BM_ShadowFit)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_SynthesizeGainBias(benchmark::State& state) {
  const int frames = 40;
  static const SceneProducts products =
      build_products(synth::SynthDataset(synth::preset("shadow", frames, 1), frames));
  const synth::SynthConfig c = synth::preset("shadow", 1, 1);
  const synth::SpriteTruth s = synth::render_frame(c, 0).sprites.at(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize_gain_bias(products.shadow, s.mask, s.bottom_y,
                                                  products.lighting, products.occlusion));
  }
}
BENCHMARK(BM_SynthesizeGainBias)->Unit(benchmark::kMicrosecond);

}  // namespace
