// Hot paths: potential jets, phase jets and brackets, collocation solves,
// integrators, and scalar reconstruction.

#include <benchmark/benchmark.h>
#include <nlohmann/json.hpp>

#include "qfi/catalog.hpp"
#include "qfi/discovery.hpp"
#include "qfi/potentials.hpp"
#include "qfi/sampling.hpp"

using namespace qfi;

namespace {

void BM_PotentialJet(benchmark::State& st) {
  const auto spec = make_potential("V274");
  double x = 0.7;
  for (auto _ : st) {
    benchmark::DoNotOptimize(spec.jet(x, 1.3));
    x += 1e-9;
  }
}
BENCHMARK(BM_PotentialJet);

void BM_EvaluateFI(benchmark::State& st) {
  const auto e = instantiate("Vs4");
  const State s{0.2, 1.1, 0.4, 0.3, -0.5};
  for (auto _ : st)
    for (const auto& fi : e.fis) benchmark::DoNotOptimize(evaluate_fi(fi, s));
}
BENCHMARK(BM_EvaluateFI);

void BM_PoissonBracket(benchmark::State& st) {
  const auto e = instantiate("V3a");
  const State s{0.2, 1.1, 0.4, 0.3, -0.5};
  for (auto _ : st) benchmark::DoNotOptimize(poisson_bracket(e.fi("Q41"), e.fi("Q43"), s));
}
BENCHMARK(BM_PoissonBracket);

void BM_Integrate(benchmark::State& st) {
  const auto e = instantiate("Vs1");
  const auto integrator = st.range(0) == 0 ? Integrator::Verlet : Integrator::RK4;
  for (auto _ : st) benchmark::DoNotOptimize(integrate(e.potential, e.reference_ics, 1e-3, 10000, integrator));
  st.SetItemsProcessed(st.iterations() * 10000);
}
BENCHMARK(BM_Integrate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_NullspaceBD(benchmark::State& st) {
  const auto spec = make_potential("Vs1");
  for (auto _ : st) benchmark::DoNotOptimize(nullspace_solve(bd_operator(), spec));
}
BENCHMARK(BM_NullspaceBD)->Unit(benchmark::kMicrosecond);

void BM_Integral3Scan(benchmark::State& st) {
  const auto spec = make_potential("V3b", {{"k", 1.0}});
  for (auto _ : st) benchmark::DoNotOptimize(integral3_scan(spec));
}
BENCHMARK(BM_Integral3Scan)->Unit(benchmark::kMillisecond);

void BM_ScalarReconstruction(benchmark::State& st) {
  const auto spec = make_potential("V24");
  const ScalarReconstruction g({0, 0, 1, 0, 0, 0}, spec, Vec2{-1, 0.5});
  for (auto _ : st) benchmark::DoNotOptimize(g.value(1.2, -0.4));
}
BENCHMARK(BM_ScalarReconstruction)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
