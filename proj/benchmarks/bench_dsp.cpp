#include <benchmark/benchmark.h>

#include <random>

#include "midec/dsp.hpp"

namespace {

Eigen::MatrixXd random_block(int channels, int samples, unsigned seed = 42) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd m(channels, samples);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

void BM_DesignButterworth(benchmark::State& state) {
  for (auto _ : state) {
    auto f = midec::design_butterworth(static_cast<int>(state.range(0)),
                                       midec::FilterKind::Bandpass, {0.1, 45.0}, 512);
    benchmark::DoNotOptimize(f);
  }
}
BENCHMARK(BM_DesignButterworth)->Arg(2)->Arg(4)->Arg(8);

void BM_FilterCausal(benchmark::State& state) {
  const auto filter =
      midec::design_butterworth(2, midec::FilterKind::Bandpass, {8.0, 30.0}, 512);
  const auto block = random_block(22, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto fs = midec::make_filter_state(filter, 22);
    auto out = midec::filter_causal(filter, fs, block);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 22);
}
BENCHMARK(BM_FilterCausal)->Range(4096, 1 << 17);

void BM_FilterZeroPhase(benchmark::State& state) {
  const auto filter =
      midec::design_butterworth(4, midec::FilterKind::Bandpass, {0.1, 45.0}, 512);
  const auto block = random_block(22, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto out = midec::filter_zero_phase(filter, block);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * 22);
}
BENCHMARK(BM_FilterZeroPhase)->Range(4096, 1 << 17);

void BM_WelchPsd(benchmark::State& state) {
  const auto block = random_block(22, 256);
  for (auto _ : state) {
    auto psd = midec::welch_psd(block, 0.5, 512, 1.0);
    benchmark::DoNotOptimize(psd);
  }
}
BENCHMARK(BM_WelchPsd);

}  // namespace
