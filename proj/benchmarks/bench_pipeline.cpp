// Copyright 2026 The AAD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "aad/evaluation.hpp"
#include "aad/features.hpp"
#include "aad/models.hpp"
#include "aad/synthgen.hpp"

namespace {

const aad::AudioClip& pump_clip() {
  static const aad::AudioClip clip =
      aad::gen_clip(aad::default_spec(aad::MachineType::kPump, 6, 0), 0, aad::Label::kNormal);
  return clip;
}

const aad::FeatureBatch& pump_batch() {
  static const aad::FeatureBatch batch = [] {
    const aad::LogMelSpectrogram spec =
        aad::extract_log_mel(pump_clip(), aad::MachineType::kPump, false);
    return aad::make_feature_batch(spec, "bench");
  }();
  return batch;
}

void BM_StftPower(benchmark::State& state) {
  const aad::AudioClip& clip = pump_clip();
  for (auto _ : state) {
    benchmark::DoNotOptimize(aad::stft_power(clip.channel(0)));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StftPower)->Unit(benchmark::kMillisecond);

void BM_ExtractLogMel(benchmark::State& state) {
  const aad::AudioClip& clip = pump_clip();
  for (auto _ : state) {
    benchmark::DoNotOptimize(aad::extract_log_mel(clip, aad::MachineType::kPump, false));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ExtractLogMel)->Unit(benchmark::kMillisecond);

void BM_ValvePreprocess(benchmark::State& state) {
  const aad::AudioClip clip =
      aad::gen_clip(aad::default_spec(aad::MachineType::kValve, 6, 0), 0, aad::Label::kNormal);
  for (auto _ : state) {
    benchmark::DoNotOptimize(aad::preprocess_valve(clip.channel(0), clip.sample_rate));
  }
}
BENCHMARK(BM_ValvePreprocess)->Unit(benchmark::kMillisecond);

// One full clip: 309 reconstruction errors.
void BM_AeClipScore(benchmark::State& state) {
  const aad::DenseAeModel model = aad::build_dense_ae(1);
  const aad::FeatureBatch& batch = pump_batch();
  for (auto _ : state) {
    benchmark::DoNotOptimize(aad::ae_clip_score(model.params, batch.ae_vectors));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.ae_vectors.rows));
}
BENCHMARK(BM_AeClipScore)->Unit(benchmark::kMicrosecond);

// One full clip: 5 windows of 64x64.
void BM_SvddClipScore(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const aad::DeepSvddModel model = aad::build_svdd_net(dim, 1);
  const std::vector<double> center(dim, 0.1);
  const aad::FeatureBatch& batch = pump_batch();
  for (auto _ : state) {
    benchmark::DoNotOptimize(aad::svdd_clip_score(model.params, batch.svdd_windows, center));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.svdd_windows.n_windows));
}
BENCHMARK(BM_SvddClipScore)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_Auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> scores(n);
  std::vector<aad::Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = i % 5 == 0 ? aad::Label::kAnomalous : aad::Label::kNormal;
    scores[i] = g(rng) + (labels[i] == aad::Label::kAnomalous ? 1.0 : 0.0);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(aad::auc(scores, labels));
  }
  state.SetComplexityN(static_cast<benchmark::IterationCount>(n));
}
BENCHMARK(BM_Auc)->RangeMultiplier(10)->Range(100, 100000)->Complexity(benchmark::oNLogN);

}  // namespace

BENCHMARK_MAIN();
