#include <benchmark/benchmark.h>

#include <random>

#include "midec/evaluation.hpp"
#include "midec/riemann.hpp"

namespace {

Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(n, 4 * n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  Eigen::MatrixXd c = a * a.transpose() / (4.0 * n);
  return c + 0.05 * Eigen::MatrixXd::Identity(n, n);
}

void BM_AirmDistance(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(state.range(0));
  const auto a = random_spd(n, rng);
  const auto b = random_spd(n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(midec::airm_distance(a, b));
  }
}
BENCHMARK(BM_AirmDistance)->Arg(8)->Arg(22)->Arg(32);

void BM_FrechetMean(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::vector<Eigen::MatrixXd> samples;
  for (int i = 0; i < static_cast<int>(state.range(0)); ++i) {
    samples.push_back(random_spd(22, rng));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(midec::frechet_mean(samples, 1e-8, 50));
  }
}
BENCHMARK(BM_FrechetMean)->Arg(10)->Arg(50)->Arg(100);

void BM_SlidingCovariances(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd signal(22, state.range(0));
  for (Eigen::Index i = 0; i < signal.size(); ++i) signal.data()[i] = normal(rng);
  for (auto _ : state) {
    auto covs = midec::sliding_covariances(signal, 512, 32, 0.05);
    benchmark::DoNotOptimize(covs);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SlidingCovariances)->Range(1 << 14, 1 << 17);

}  // namespace
