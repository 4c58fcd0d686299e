#include <memory>
#include <random>

#include <benchmark/benchmark.h>

#include "kadlab/lookup.hpp"
#include "kadlab/simulator.hpp"

namespace {

kadlab::Scheme scheme_of(const benchmark::State& state) {
  return state.range(0) == 0 ? kadlab::Scheme::Standard : kadlab::Scheme::DiversityMax;
}

void BM_TableBuild(benchmark::State& state) {
  auto profile = std::make_shared<const kadlab::SystemProfile>(kadlab::kad_profile());
  std::uint64_t seed = 1;
  for (auto _ : state) {
    kadlab::StaticNetwork net(profile, 10000, scheme_of(state), seed++);
    benchmark::DoNotOptimize(net.table(0).size());
  }
}
BENCHMARK(BM_TableBuild)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_StrictLookup(benchmark::State& state) {
  auto profile = std::make_shared<const kadlab::SystemProfile>(kadlab::mdht_profile());
  kadlab::StaticNetwork net(profile, 10000, scheme_of(state), 7);
  std::mt19937_64 rng(3);
  const kadlab::LookupConfig config;
  for (auto _ : state) {
    const auto origin = rng() % net.size();
    benchmark::DoNotOptimize(kadlab::lookup(net.table(origin), kadlab::NodeId::random(160, rng), net, config));
  }
}
BENCHMARK(BM_StrictLookup)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

}  // namespace
