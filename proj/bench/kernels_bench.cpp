// Serial reference vs OpenMP row-block kernels on tall n x p operands, plus a
// full Cayley step at the same sizes.

#include <benchmark/benchmark.h>

#include "gstiefel/cayley.hpp"
#include "gstiefel/kernels.hpp"
#include "gstiefel/problems.hpp"

namespace {

using namespace gstiefel;

// range(0) = rows, range(1) = kernel thread count (ignored by serial kernels).
struct Operands {
  Matrix a, x, y;
  Operands(Index n, Index p, bool square) {
    Rng rng(7);
    if (square) a = gaussian_matrix(n, n, rng);
    x = gaussian_matrix(n, p, rng);
    y = gaussian_matrix(n, p, rng);
  }
};

class Threads {
 public:
  explicit Threads(int n) : saved_(kernels::num_threads()) { kernels::set_num_threads(n); }
  ~Threads() { kernels::set_num_threads(saved_); }

 private:
  int saved_;
};

template <Matrix (*F)(const Matrix&, const Matrix&)>
void BM_Multiply(benchmark::State& state) {
  const Operands ops(state.range(0), 10, true);
  const Threads threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(F(ops.a, ops.x));
}

template <Matrix (*F)(const Matrix&, const Matrix&)>
void BM_TransposeMultiply(benchmark::State& state) {
  const Operands ops(state.range(0), 10, false);
  const Threads threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(F(ops.x, ops.y));
}

template <double (*F)(const Matrix&, const Matrix&)>
void BM_TraceInner(benchmark::State& state) {
  const Operands ops(state.range(0), 10, false);
  const Threads threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(F(ops.x, ops.y));
}

void BM_CayleyStep(benchmark::State& state) {
  const Index n = state.range(0);
  const auto strategy = static_cast<RetractionStrategy>(state.range(1));
  const GevpInstance inst = generate_gevp_instance(GevpKind::DiagA, n, 5, 1);
  const MetricContext ctx(inst.m);
  Rng rng(3);
  const ManifoldPoint x = random_point(ctx, 5, rng);
  const TangentVector z = random_tangent(ctx, x, rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(CayleyStep(ctx, x, z, 0.5, strategy).point());
}

}  // namespace

BENCHMARK(BM_Multiply<kernels::serial::multiply>)->Args({512, 1})->Args({2048, 1});
BENCHMARK(BM_Multiply<kernels::parallel::multiply>)
    ->ArgsProduct({{512, 2048}, {1, 2, 4}});
BENCHMARK(BM_TransposeMultiply<kernels::serial::transpose_multiply>)
    ->Args({4096, 1})->Args({65536, 1});
BENCHMARK(BM_TransposeMultiply<kernels::parallel::transpose_multiply>)
    ->ArgsProduct({{4096, 65536}, {1, 2, 4}});
BENCHMARK(BM_TraceInner<kernels::serial::trace_inner>)->Args({4096, 1})->Args({65536, 1});
BENCHMARK(BM_TraceInner<kernels::parallel::trace_inner>)
    ->ArgsProduct({{4096, 65536}, {1, 2, 4}});
BENCHMARK(BM_CayleyStep)
    ->Args({500, static_cast<int>(RetractionStrategy::LowRank)})
    ->Args({500, static_cast<int>(RetractionStrategy::Full)});

BENCHMARK_MAIN();
