#include <benchmark/benchmark.h>

#include "kadlab/bitgain.hpp"
#include "kadlab/bounds.hpp"
#include "kadlab/closest_law.hpp"
#include "kadlab/markov.hpp"

namespace {

void BM_BitGainDiverse(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kadlab::bitgain_diverse(4, k));
}
BENCHMARK(BM_BitGainDiverse)->Arg(8)->Arg(128);

void BM_ClosestLaw(benchmark::State& state) {
  kadlab::LawQuery query;
  query.b = 128;
  query.n = 10000;
  query.d = 120;
  query.l = 3;
  query.k = 10;
  query.gamma = 2;
  const auto scheme = state.range(0) == 0 ? kadlab::Scheme::Standard : kadlab::Scheme::DiversityMax;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kadlab::closest_law(scheme, kadlab::LawFormula::Exact, query));
  }
}
BENCHMARK(BM_ClosestLaw)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_KadModel(benchmark::State& state) {
  const auto profile = kadlab::kad_profile();
  for (auto _ : state) {
    benchmark::DoNotOptimize(kadlab::hop_count_cdf(profile, state.range(0), kadlab::Scheme::Standard));
  }
}
BENCHMARK(BM_KadModel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_BoundCurve(benchmark::State& state) {
  const auto profile = kadlab::kad_profile();
  const auto grid = kadlab::log_spaced_grid(1e3, 4e6, 60);
  for (auto _ : state) benchmark::DoNotOptimize(kadlab::bound_curve(profile, grid));
}
BENCHMARK(BM_BoundCurve)->Unit(benchmark::kMillisecond);

}  // namespace
