// Copyright 2026 The MC-CNN Authors
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

#include <random>

#include "mccnn/experiments.hpp"
#include "mccnn/heatmap.hpp"
#include "mccnn/model.hpp"
#include "mccnn/ops.hpp"
#include "mccnn/training.hpp"

namespace {

using namespace mccnn;

Tensor random_tensor(Shape shape, std::uint64_t seed, bool grad = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> values(shape_numel(shape));
  for (auto& v : values) v = n(rng);
  return Tensor(std::move(shape), std::move(values), grad);
}

// Args: input channels, output channels, spatial size, stride.
void BM_Conv2dForward(benchmark::State& state) {
  const auto cin = static_cast<std::size_t>(state.range(0));
  const auto cout = static_cast<std::size_t>(state.range(1));
  const auto size = static_cast<std::size_t>(state.range(2));
  const auto stride = static_cast<std::size_t>(state.range(3));
  const Tensor x = random_tensor({cin, size, size}, 1);
  const Tensor k = random_tensor({cout, cin, 3, 3}, 2);
  const Tensor b = random_tensor({cout}, 3);
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, k, b, stride, 1));
}
BENCHMARK(BM_Conv2dForward)->Args({9, 8, 32, 1})->Args({8, 16, 16, 2})->Args({32, 64, 4, 2})->Args({64, 128, 2, 2});

void BM_Conv2dBackward(benchmark::State& state) {
  const auto cin = static_cast<std::size_t>(state.range(0));
  const auto cout = static_cast<std::size_t>(state.range(1));
  const auto size = static_cast<std::size_t>(state.range(2));
  Tensor x = random_tensor({cin, size, size}, 1, true);
  Tensor k = random_tensor({cout, cin, 3, 3}, 2, true);
  Tensor b = random_tensor({cout}, 3, true);
  for (auto _ : state) {
    sum(conv2d(x, k, b, 1, 1)).backward();
    benchmark::DoNotOptimize(k.grad().data());
  }
}
BENCHMARK(BM_Conv2dBackward)->Args({9, 8, 32})->Args({16, 16, 8});

void BM_RenderHeatmap(benchmark::State& state) {
  const auto grid = static_cast<std::size_t>(state.range(0));
  const auto stimuli = make_stimulus_set(1);
  const auto profile = sample_cohort(0, 1, CohortConfig{}, 2).front();
  const auto session = simulate_session(profile, stimuli);
  const auto options = HeatmapOptions::for_grid(grid, grid);
  for (auto _ : state) benchmark::DoNotOptimize(render_stack(session, options));
}
BENCHMARK(BM_RenderHeatmap)->Arg(32)->Arg(64)->Arg(128);

void BM_ExtractFeatures(benchmark::State& state) {
  const Model model{ModelConfig{}};
  const Tensor x = random_tensor({9, 32, 32}, 4);
  NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(extract_features(x, model));
}
BENCHMARK(BM_ExtractFeatures);

// One epoch over a small cohort: forward, backward and update for every
// mini-batch.
void BM_TrainEpoch(benchmark::State& state) {
  BenchmarkConfig cfg;
  cfg.n_ad = 8;
  cfg.n_normal = 14;
  cfg.references = 6;
  const auto bench = build_benchmark(cfg, SplitRatios{1.0, 0.0, 0.0}, SplitMode::kSubject, 5);
  Hyperparams hyper;
  hyper.epochs = 1;
  for (auto _ : state) {
    Model model{ModelConfig{}};
    benchmark::DoNotOptimize(train(model, bench.split, hyper));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(bench.split.train.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
