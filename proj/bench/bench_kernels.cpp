#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "andnmf/kernels.hpp"
#include "andnmf/linalg.hpp"

namespace {

namespace kr = andnmf::kernels::reference;
namespace kp = andnmf::kernels::parallel;

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::srand(seed);
  return Eigen::MatrixXd::Random(rows, cols);
}

// Shapes follow one AND iteration at desk scale: pinv (D x W) times Y (W x n).
void BM_DecodeReference(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd p = random_matrix(20, 200, 1), y = random_matrix(200, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kr::threshold(kr::multiply(p, y), 0.1));
  state.SetItemsProcessed(state.iterations() * n);
}

void BM_DecodeParallel(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd p = random_matrix(20, 200, 1), y = random_matrix(200, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(kp::threshold(kp::multiply(p, y), 0.1));
  state.SetItemsProcessed(state.iterations() * n);
}

// Y Z^T, the per-stage moment.
void BM_MomentReference(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd y = random_matrix(200, n, 3), z = random_matrix(20, n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kr::multiply_transposed(y, z));
}

void BM_MomentParallel(benchmark::State& state) {
  const auto n = state.range(0);
  const Eigen::MatrixXd y = random_matrix(200, n, 3), z = random_matrix(20, n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(kp::multiply_transposed(y, z));
}

void BM_CorrelationReference(benchmark::State& state) {
  const auto d = state.range(0);
  const Eigen::MatrixXd t = random_matrix(200, d, 5), e = random_matrix(200, d, 6);
  for (auto _ : state) benchmark::DoNotOptimize(kr::correlation_matches(t, e));
}

void BM_CorrelationParallel(benchmark::State& state) {
  const auto d = state.range(0);
  const Eigen::MatrixXd t = random_matrix(200, d, 5), e = random_matrix(200, d, 6);
  for (auto _ : state) benchmark::DoNotOptimize(kp::correlation_matches(t, e));
}

void BM_PseudoInverse(benchmark::State& state) {
  const Eigen::MatrixXd a = random_matrix(200, state.range(0), 7);
  for (auto _ : state) benchmark::DoNotOptimize(andnmf::dense::pseudo_inverse(a, andnmf::kDefaultPinvTolerance));
}

}  // namespace

BENCHMARK(BM_DecodeReference)->Arg(2000)->Arg(5000);
BENCHMARK(BM_DecodeParallel)->Arg(2000)->Arg(5000);
BENCHMARK(BM_MomentReference)->Arg(2000)->Arg(5000);
BENCHMARK(BM_MomentParallel)->Arg(2000)->Arg(5000);
BENCHMARK(BM_CorrelationReference)->Arg(20)->Arg(100);
BENCHMARK(BM_CorrelationParallel)->Arg(20)->Arg(100);
BENCHMARK(BM_PseudoInverse)->Arg(20)->Arg(100);

BENCHMARK_MAIN();
