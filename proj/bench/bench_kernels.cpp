// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <memory>

#include "hkcg/brownian.hpp"
#include "hkcg/sampler.hpp"

namespace {

using namespace hkcg;

CovarianceSpec make_spec(int d, int p_axis, int max_mode) {
  auto basis = std::make_shared<const SpectralBasis>(TorusGrid(d, p_axis), max_mode);
  return CovarianceSpec(2, basis, std::make_shared<const LieBasis>(2));
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void BM_Synthesize(benchmark::State& state) {
  const CovarianceSpec spec = make_spec(2, 64, 16);
  RngStream stream(1, 0);
  const std::vector<double> coeffs = draw_coefficients(spec, 0.01, stream);
  AlgebraField out(spec.grid(), spec.lie().dim());
  for (auto _ : state) {
    synthesize(spec, coeffs, out, exec_of(state));
    benchmark::DoNotOptimize(out.at(0)[0]);
  }
}

void BM_Step(benchmark::State& state) {
  const CovarianceSpec spec = make_spec(2, 128, 8);
  RngStream stream(2, 0);
  const AlgebraField incr = sample_increment(spec, 0.01, stream);
  FieldState g = initial_state(spec.grid(), 2);
  for (auto _ : state) {
    step_inplace(g, incr, 0.01, spec.lie(), exec_of(state));
    benchmark::DoNotOptimize(g.data().data());
  }
}

void BM_Ensemble(benchmark::State& state) {
  const SdeConfig cfg{make_spec(1, 64, 16), 64, 1.0, 3};
  for (auto _ : state) {
    const auto fields = sample_ensemble_fields(cfg, 32, exec_of(state));
    benchmark::DoNotOptimize(fields.data());
  }
}

}  // namespace

BENCHMARK(BM_Synthesize)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Step)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Ensemble)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
