// Serial reference vs OpenMP kernels at candidate-scoring sizes.
// Run: ./build/bench/bench_kernels --benchmark_counters_tabular=true

#include <benchmark/benchmark.h>

#include <random>

#include "tkgc/kernels.hpp"

using namespace tkgc;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.flat()) v = u(gen);
  return m;
}

// range(0) = candidate rows, range(1) = embedding size, range(2) = threads (0 = serial)
void BM_ProjectRows(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const int threads = static_cast<int>(state.range(2));
  const Matrix x = random_matrix(n, d, 1);
  const Matrix w = random_matrix(d, 2 * d, 2);
  Matrix out(n, d);
  kernels::ThreadScope scope(std::max(1, threads));
  for (auto _ : state) {
    if (threads == 0) kernels::serial::project_rows(x, w, 0, out);
    else kernels::omp::project_rows(x, w, 0, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * d * d));
}

void BM_Matvec(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const int threads = static_cast<int>(state.range(2));
  const Matrix m = random_matrix(n, d, 3);
  const Matrix q = random_matrix(1, d, 4);
  Vector out(n);
  kernels::ThreadScope scope(std::max(1, threads));
  for (auto _ : state) {
    if (threads == 0) kernels::serial::matvec(m, q.row(0), out);
    else kernels::omp::matvec(m, q.row(0), out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * d));
}

// range(0) = batch, range(1) = candidates, range(2) = threads
void BM_AccumulateOuter(benchmark::State& state) {
  const auto b = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const int threads = static_cast<int>(state.range(2));
  const std::size_t d = 200;
  const Matrix a = random_matrix(b, n, 5);
  const Matrix c = random_matrix(b, d, 6);
  Matrix out(n, d);
  kernels::ThreadScope scope(std::max(1, threads));
  for (auto _ : state) {
    if (threads == 0) kernels::serial::accumulate_outer(a, c, out);
    else kernels::omp::accumulate_outer(a, c, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_AccumulateAtB(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const int threads = static_cast<int>(state.range(2));
  const Matrix a = random_matrix(n, d, 7);
  const Matrix b = random_matrix(n, d, 8);
  Matrix out(d, d);
  kernels::ThreadScope scope(std::max(1, threads));
  for (auto _ : state) {
    if (threads == 0) kernels::serial::accumulate_at_b(a, b, out, 0);
    else kernels::omp::accumulate_at_b(a, b, out, 0);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_AccumulateAW(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const int threads = static_cast<int>(state.range(2));
  const Matrix a = random_matrix(n, d, 9);
  const Matrix w = random_matrix(d, d, 10);
  Matrix out(n, d);
  kernels::ThreadScope scope(std::max(1, threads));
  for (auto _ : state) {
    if (threads == 0) kernels::serial::accumulate_a_w(a, w, out);
    else kernels::omp::accumulate_a_w(a, w, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_RankCounts(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const int threads = static_cast<int>(state.range(2));
  const Matrix s = random_matrix(1, n, 11);
  std::vector<unsigned char> skip(n, 0);
  for (std::size_t i = 0; i < n; i += 17) skip[i] = 1;
  kernels::ThreadScope scope(std::max(1, threads));
  for (auto _ : state) {
    std::size_t g = 0, t = 0;
    if (threads == 0) kernels::serial::rank_counts(s.row(0), n / 2, skip, g, t);
    else kernels::omp::rank_counts(s.row(0), n / 2, skip, g, t);
    benchmark::DoNotOptimize(g);
    benchmark::DoNotOptimize(t);
  }
}

// ICEWS14-sized entity table (7128) at d = 300 and ICEWS05-15 (10488) at d = 200.
void Sizes(benchmark::internal::Benchmark* b) {
  for (const auto& [n, d] : {std::pair<int, int>{7128, 300}, {10488, 200}}) {
    for (int t : {0, 1, 2, 4}) b->Args({n, d, t});
  }
  b->ArgNames({"rows", "d", "threads"});
  b->Unit(benchmark::kMillisecond);
  b->UseRealTime();
}

void BatchSizes(benchmark::internal::Benchmark* b) {
  for (int t : {0, 1, 2, 4}) b->Args({256, 7128, t});
  b->ArgNames({"batch", "rows", "threads"});
  b->Unit(benchmark::kMillisecond);
  b->UseRealTime();
}

}  // namespace

BENCHMARK(BM_ProjectRows)->Apply(Sizes);
BENCHMARK(BM_Matvec)->Apply(Sizes);
BENCHMARK(BM_AccumulateOuter)->Apply(BatchSizes);
BENCHMARK(BM_AccumulateAtB)->Apply(Sizes);
BENCHMARK(BM_AccumulateAW)->Apply(Sizes);
BENCHMARK(BM_RankCounts)->Apply(Sizes);

BENCHMARK_MAIN();
