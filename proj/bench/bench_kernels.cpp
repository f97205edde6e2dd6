#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fundmatch/kernels.hpp"
#include "fundmatch/parallel.hpp"

namespace {

using fundmatch::kernels::MatrixView;

struct Data {
  std::vector<double> left, right, out;
  std::size_t rows, cols, dim;
};

Data make(std::size_t rows, std::size_t cols, std::size_t dim) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  Data d{std::vector<double>(rows * dim), std::vector<double>(cols * dim), std::vector<double>(rows * cols), rows, cols,
         dim};
  for (auto& x : d.left) x = g(rng);
  for (auto& x : d.right) x = g(rng);
  return d;
}

template <void (*Kernel)(MatrixView, MatrixView, std::span<double>)>
void run(benchmark::State& state) {
  auto d = make(static_cast<std::size_t>(state.range(0)), 300, 768);
  if (state.range(1) > 0) fundmatch::parallel::set_max_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    Kernel({d.left.data(), d.rows, d.dim}, {d.right.data(), d.cols, d.dim}, d.out);
    benchmark::DoNotOptimize(d.out.data());
  }
  fundmatch::parallel::set_max_threads(0);
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(d.rows * d.cols));
}

}  // namespace

BENCHMARK(run<fundmatch::kernels::cosine_matrix_serial>)->Name("cosine_serial")->Args({2000, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(run<fundmatch::kernels::cosine_matrix_omp>)
    ->Name("cosine_omp")
    ->Args({2000, 1})
    ->Args({2000, 2})
    ->Args({2000, 4})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
