// Parallel kernels against their serial references.
#include <benchmark/benchmark.h>

#include <vector>

#include "songlm/kernels.hpp"
#include "songlm/rng.hpp"

namespace k = songlm::kernels;

namespace {

std::vector<float> random_vec(std::size_t n, std::uint64_t seed) {
  songlm::Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

template <bool Parallel>
void BM_gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
  std::vector<float> c(n * n);
  for (auto _ : state) {
    if constexpr (Parallel) k::gemm(false, false, n, n, n, a.data(), b.data(), c.data(), false);
    else k::gemm_serial(false, false, n, n, n, a.data(), b.data(), c.data(), false);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * 2 * n * n * n));
}

template <bool Parallel>
void BM_softmax(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0)), cols = static_cast<std::size_t>(state.range(1));
  auto x = random_vec(rows * cols, 3);
  std::vector<float> y(rows * cols);
  for (auto _ : state) {
    if constexpr (Parallel) k::softmax_rows(x.data(), y.data(), rows, cols);
    else k::softmax_rows_serial(x.data(), y.data(), rows, cols);
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Parallel>
void BM_layernorm(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0)), cols = static_cast<std::size_t>(state.range(1));
  auto x = random_vec(rows * cols, 4), g = random_vec(cols, 5), b = random_vec(cols, 6);
  std::vector<float> y(rows * cols), xhat(rows * cols), inv(rows);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::layer_norm_rows(x.data(), g.data(), b.data(), y.data(), xhat.data(), inv.data(), rows, cols, 1e-5);
    else
      k::layer_norm_rows_serial(x.data(), g.data(), b.data(), y.data(), xhat.data(), inv.data(), rows, cols, 1e-5);
    benchmark::DoNotOptimize(y.data());
  }
}

}  // namespace

BENCHMARK(BM_gemm<true>)->Name("gemm/omp")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_gemm<false>)->Name("gemm/serial")->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_softmax<true>)->Name("softmax/omp")->Args({256, 256})->Args({1024, 1024});
BENCHMARK(BM_softmax<false>)->Name("softmax/serial")->Args({256, 256})->Args({1024, 1024});
BENCHMARK(BM_layernorm<true>)->Name("layernorm/omp")->Args({256, 384})->Args({2048, 768});
BENCHMARK(BM_layernorm<false>)->Name("layernorm/serial")->Args({256, 384})->Args({2048, 768});

BENCHMARK_MAIN();
