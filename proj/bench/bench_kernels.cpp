// bench/bench_kernels.cpp

// Copyright 2026  The Phaseline Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// OpenMP kernels against their serial references.  The thread count is the
// benchmark argument; "Reference" cases are single-threaded by construction.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>
#include <vector>

#include "phaseline/nn.hpp"
#include "phaseline/reference.hpp"
#include "phaseline/spectral.hpp"

namespace {

using namespace phaseline;

std::vector<double> noise(std::size_t n) {
  std::mt19937_64 engine(1);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = dist(engine);
  return x;
}

std::vector<float> features(std::size_t channels, std::size_t bins) {
  std::mt19937_64 engine(2);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> x(channels * bins);
  for (float& v : x) v = dist(engine);
  return x;
}

void BM_Stft(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  const auto x = noise(10 * 22050);
  const auto config = StftConfig::hann(1024, 256, 1024);
  for (auto _ : state) benchmark::DoNotOptimize(stft(x, config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_Stft)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime();

void BM_StftReference(benchmark::State& state) {
  // The direct sum is O(L M) per frame; a short signal keeps it tractable.
  const auto x = noise(22050 / 4);
  const auto config = StftConfig::hann(1024, 256, 1024);
  for (auto _ : state) benchmark::DoNotOptimize(reference::stftDirect(x, config));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_StftReference)->Unit(benchmark::kMillisecond);

void BM_Istft(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  const auto spec = stft(noise(10 * 22050), StftConfig::hann(1024, 256, 1024));
  for (auto _ : state) benchmark::DoNotOptimize(istft(spec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(spec.signalLength));
}
BENCHMARK(BM_Istft)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime();

const nn::LayerSpec& gatedLayer() {
  static const nn::ConvNetModel model = nn::ConvNetModel::random(nn::Head::Bpd, 3);
  return model.layers()[1];
}

void BM_GatedLayer(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  const auto in = features(64, 513);
  for (auto _ : state) benchmark::DoNotOptimize(nn::applyLayer(gatedLayer(), in, 513));
}
BENCHMARK(BM_GatedLayer)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime();

void BM_GatedLayerReference(benchmark::State& state) {
  const auto in = features(64, 513);
  for (auto _ : state) benchmark::DoNotOptimize(reference::applyLayerNaive(gatedLayer(), in, 513));
}
BENCHMARK(BM_GatedLayerReference);

void BM_Forward(benchmark::State& state) {
  omp_set_num_threads(static_cast<int>(state.range(0)));
  const auto model = nn::ConvNetModel::random(nn::Head::Bpd, 4);
  nn::FeatureFrame f{513, 4, features(4, 513)};
  for (auto _ : state) benchmark::DoNotOptimize(nn::forward(model, f));
}
BENCHMARK(BM_Forward)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->UseRealTime();

void BM_ForwardReference(benchmark::State& state) {
  const auto model = nn::ConvNetModel::random(nn::Head::Bpd, 4);
  nn::FeatureFrame f{513, 4, features(4, 513)};
  for (auto _ : state) benchmark::DoNotOptimize(reference::forwardNaive(model, f));
}
BENCHMARK(BM_ForwardReference);

}  // namespace

BENCHMARK_MAIN();
