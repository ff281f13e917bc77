// Serial reference kernels vs the OpenMP kernels on training-sized shapes,
// plus one full iteration of FixMatch and FlexMatch.

#include <random>

#include <benchmark/benchmark.h>

#include "flexssl/config.hpp"
#include "flexssl/harness.hpp"
#include "flexssl/kernels.hpp"
#include "flexssl/trainer.hpp"

namespace {

using flexssl::Matrix;
namespace kernels = flexssl::kernels;

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.values()) v = d(rng);
  return m;
}

// Rows of a FixMatch unlabeled batch (7 * 64) through a 64-wide hidden layer.
constexpr std::size_t kRows = 448;
constexpr std::size_t kWidth = 64;

template <bool Parallel>
void BM_Affine(benchmark::State& state) {
  kernels::set_threads(static_cast<int>(state.range(0)));
  const Matrix a = random_matrix(kRows, kWidth, 1), w = random_matrix(kWidth, kWidth, 2);
  const std::vector<double> bias(kWidth, 0.1);
  Matrix out(kRows, kWidth);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::affine(a, w, bias, out);
    } else {
      kernels::serial::affine(a, w, bias, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  kernels::set_threads(1);
}

template <bool Parallel>
void BM_MatmulTN(benchmark::State& state) {
  kernels::set_threads(static_cast<int>(state.range(0)));
  const Matrix a = random_matrix(kRows, kWidth, 1), d = random_matrix(kRows, kWidth, 3);
  Matrix out(kWidth, kWidth);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::matmul_tn(a, d, out);
    } else {
      kernels::serial::matmul_tn(a, d, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  kernels::set_threads(1);
}

template <bool Parallel>
void BM_MatmulNT(benchmark::State& state) {
  kernels::set_threads(static_cast<int>(state.range(0)));
  const Matrix d = random_matrix(kRows, kWidth, 3), w = random_matrix(kWidth, kWidth, 2);
  Matrix out(kRows, kWidth);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::matmul_nt(d, w, out);
    } else {
      kernels::serial::matmul_nt(d, w, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  kernels::set_threads(1);
}

template <bool Parallel>
void BM_Softmax(benchmark::State& state) {
  kernels::set_threads(static_cast<int>(state.range(0)));
  const Matrix z = random_matrix(kRows, 10, 4);
  Matrix out(kRows, 10);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::softmax_rows(z, out);
    } else {
      kernels::serial::softmax_rows(z, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  kernels::set_threads(1);
}

BENCHMARK(BM_Affine<false>)->Arg(1);
BENCHMARK(BM_Affine<true>)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(BM_MatmulTN<false>)->Arg(1);
BENCHMARK(BM_MatmulTN<true>)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(BM_MatmulNT<false>)->Arg(1);
BENCHMARK(BM_MatmulNT<true>)->Arg(1)->Arg(2)->Arg(4);
BENCHMARK(BM_Softmax<false>)->Arg(1);
BENCHMARK(BM_Softmax<true>)->Arg(1)->Arg(2)->Arg(4);

void BM_TrainIteration(benchmark::State& state, const char* variant) {
  const flexssl::harness::ExperimentPlan plan;
  const auto pool = flexssl::harness::build_pool(plan.dataset);
  const auto data = flexssl::harness::build_split(plan.dataset, pool, 4, 1);
  auto cfg = plan.config_for(variant, 1);
  cfg.iterations = 200;
  for (auto _ : state) benchmark::DoNotOptimize(flexssl::trainer::train(cfg, data).checkpoints.size());
  state.SetItemsProcessed(state.iterations() * cfg.iterations);
}

BENCHMARK_CAPTURE(BM_TrainIteration, fixmatch, "fixmatch")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TrainIteration, flexmatch, "flexmatch")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
