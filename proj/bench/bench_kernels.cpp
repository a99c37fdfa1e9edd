// Copyright 2026 The HCFSLN Authors.
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

// Serial reference vs OpenMP kernels at encoder-sized shapes.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hcfsln/kernels.hpp"

namespace {

namespace k = hcfsln::kernels;

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

template <auto Gemm>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n * n, 1);
  const auto b = random_vector(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    Gemm(a, b, c, n, n, n, false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Gemm<k::serial::gemm>)->Name("gemm/serial")->Arg(32)->Arg(64)->Arg(128);
BENCHMARK(BM_Gemm<k::omp::gemm>)->Name("gemm/omp")->Arg(32)->Arg(64)->Arg(128);

template <auto Conv>
void BM_Conv1d(benchmark::State& state) {
  const std::size_t len = 120;
  const auto ch = static_cast<std::size_t>(state.range(0));
  const std::size_t width = 5;
  const auto x = random_vector(len * ch, 3);
  const auto w = random_vector(width * ch * ch, 4);
  const auto bias = random_vector(ch, 5);
  std::vector<double> out(len * ch);
  for (auto _ : state) {
    Conv(x, w, bias, out, len, ch, ch, width);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(2 * len * ch * ch * width));
}
BENCHMARK(BM_Conv1d<k::serial::conv1d>)->Name("conv1d/serial")->Arg(32)->Arg(64);
BENCHMARK(BM_Conv1d<k::omp::conv1d>)->Name("conv1d/omp")->Arg(32)->Arg(64);

template <auto Softmax>
void BM_Softmax(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto src = random_vector(n * n, 6);
  std::vector<double> x(src.size());
  for (auto _ : state) {
    x = src;
    Softmax(x, n, n);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_Softmax<k::serial::softmax_rows>)->Name("softmax/serial")->Arg(120);
BENCHMARK(BM_Softmax<k::omp::softmax_rows>)->Name("softmax/omp")->Arg(120);

}  // namespace

BENCHMARK_MAIN();
