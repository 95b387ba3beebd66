#include <benchmark/benchmark.h>

#include <cmath>

#include "kreinscale/bessel.hpp"
#include "kreinscale/eigen.hpp"
#include "kreinscale/levy.hpp"
#include "kreinscale/measure.hpp"
#include "kreinscale/simulate.hpp"
#include "kreinscale/verify.hpp"

using namespace krein;

namespace {

JumpMeasureSpec twelve_jump() { return JumpMeasureSpec::piecewise_power(1.0, 1.25, 1.0, 2.0); }

// theta in thousandths
void BM_GSequence(benchmark::State& state) {
  const auto m = StringSpec::power(state.range(0) / 1000.0);
  const QuadratureOptions q;
  for (auto _ : state) {
    SampledString s(m, string_grid(m, 1.0, q));
    auto seq = compute_G_sequence(s, 4, m.value(1.0));
    benchmark::DoNotOptimize(seq.G[4].data());
  }
}
BENCHMARK(BM_GSequence)->Arg(400)->Arg(600)->Arg(750)->Unit(benchmark::kMicrosecond);

void BM_SingularityIndex(benchmark::State& state) {
  const auto m = StringSpec::power(0.75);
  for (auto _ : state) benchmark::DoNotOptimize(d_of_m(m, 8).d);
}
BENCHMARK(BM_SingularityIndex)->Unit(benchmark::kMicrosecond);

void BM_EigenProfile(benchmark::State& state) {
  const auto m = state.range(0) == 0 ? StringSpec::lebesgue(1.0) : StringSpec::power(0.6);
  for (auto _ : state) {
    const EigenProfile p(m, 1.0);
    benchmark::DoNotOptimize(p.c());
  }
  state.SetLabel(state.range(0) == 0 ? "lebesgue" : "power 0.6");
}
BENCHMARK(BM_EigenProfile)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Chi(benchmark::State& state) {
  const auto m = StringSpec::power(0.5);
  const auto j = twelve_jump();
  for (auto _ : state) benchmark::DoNotOptimize(chi(m, j, 1.0));
}
BENCHMARK(BM_Chi)->Unit(benchmark::kMillisecond);

// gamma = 10^range
void BM_FluctExponent(benchmark::State& state) {
  const auto fam = bessel_family({});
  const double gamma = std::pow(10.0, static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fluct_exponent(fam, gamma, 1.0));
}
BENCHMARK(BM_FluctExponent)->DenseRange(4, 8, 2)->Unit(benchmark::kMillisecond);

void BM_NOfGamma(benchmark::State& state) {
  const auto m = natural_scale_string(BesselDriftSpec::from_alpha(3.5));
  const auto j = example_jump_measure(3.5, 0.25, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(N_of_gamma(m, j, 1e6));
}
BENCHMARK(BM_NOfGamma)->Unit(benchmark::kMillisecond);

void BM_BesselString(benchmark::State& state) {
  for (auto _ : state) {
    const auto m = natural_scale_string(BesselDriftSpec::from_alpha(3.5, 2.0));
    benchmark::DoNotOptimize(m.value(10.0));
  }
}
BENCHMARK(BM_BesselString)->Unit(benchmark::kMillisecond);

// 0: exact law, 1: Euler
void BM_T0(benchmark::State& state) {
  const auto m = StringSpec::power(0.5);
  SimConfig cfg;
  cfg.scheme = state.range(0) == 0 ? T0Scheme::exact : T0Scheme::euler;
  cfg.dt = 4e-3;
  const T0Sampler sampler(m, cfg);
  auto rng = replicate_stream(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sampler(1.0, rng));
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(to_string(cfg.scheme));
}
BENCHMARK(BM_T0)->Arg(0)->Arg(1);

void BM_EtaExperiment(benchmark::State& state) {
  SimConfig cfg;
  cfg.replicates = 16;
  cfg.horizon = 1e3;
  cfg.workers = static_cast<int>(state.range(0));
  const auto m = StringSpec::power(0.5);
  const auto j = twelve_jump();
  for (auto _ : state) benchmark::DoNotOptimize(eta_experiment(m, j, cfg).stats.mean);
}
BENCHMARK(BM_EtaExperiment)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_VerifySweep(benchmark::State& state) {
  const auto fam = bessel_family({});
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(fam, {}).verdict());
}
BENCHMARK(BM_VerifySweep)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
