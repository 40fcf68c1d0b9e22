/* Copyright 2026 The vclass Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <benchmark/benchmark.h>

#include "vclass/autodiff.hpp"
#include "vclass/eval.hpp"
#include "vclass/trainer.hpp"

namespace {

using vc::ad::Tensor;

std::vector<double> noise(vc::Rng& rng, std::size_t n) { return vc::standard_normal(rng, n); }

void BM_MatmulForward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  vc::Rng rng(1);
  const Tensor a = Tensor::matrix(n, n, noise(rng, n * n));
  const Tensor b = Tensor::matrix(n, n, noise(rng, n * n));
  for (auto _ : state) benchmark::DoNotOptimize(vc::ad::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_MatmulForward)->Arg(64)->Arg(128)->Arg(256);

void BM_MatmulBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  vc::Rng rng(2);
  Tensor a = Tensor::matrix(n, n, noise(rng, n * n), true);
  const Tensor b = Tensor::matrix(n, n, noise(rng, n * n), true);
  for (auto _ : state) {
    a.zero_grad();
    vc::ad::backward(vc::ad::sum(vc::ad::matmul(a, b)));
  }
}
BENCHMARK(BM_MatmulBackward)->Arg(64)->Arg(128);

// One optimiser step of the 784-256-128-8 MLP on a batch of 64.
void BM_TrainStep(benchmark::State& state) {
  const auto objective = static_cast<vc::Objective>(state.range(0));
  vc::TrainConfig config;
  config.objective = objective;
  vc::TrainState st = vc::TrainState::init(config, 784, 10);
  vc::Rng rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> xs(64 * 784);
  for (double& v : xs) v = unit(rng);
  vc::Batch batch{Tensor::matrix(64, 784, xs), {}};
  for (std::size_t i = 0; i < 64; ++i) batch.ys.push_back(i % 10);
  for (auto _ : state) benchmark::DoNotOptimize(vc::train_step(st, batch));
  state.SetLabel(std::string(vc::to_string(objective)));
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Fgsm(benchmark::State& state) {
  vc::Rng rng(4);
  const vc::VcModel model = vc::VcModel::create({}, rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> xs(256 * 784);
  for (double& v : xs) v = unit(rng);
  const Tensor x = Tensor::matrix(256, 784, xs);
  std::vector<std::size_t> ys(256);
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = i % 10;
  for (auto _ : state) benchmark::DoNotOptimize(vc::fgsm(model, x, ys, 0.1));
}
BENCHMARK(BM_Fgsm)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
