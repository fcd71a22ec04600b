#include <benchmark/benchmark.h>

#include "arlequin/objective.hpp"
#include "arlequin/oracle.hpp"
#include "arlequin/solver.hpp"

using namespace arlequin;

static void BM_Discretization(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  for (auto _ : state) {
    clear_enrichment_cache();
    benchmark::DoNotOptimize(Discretization::create(DomainSpec{}, 0.5, m));
  }
  state.SetLabel("m=" + std::to_string(m));
}
BENCHMARK(BM_Discretization)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_CoupledSetup(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto disc = Discretization::create(DomainSpec{}, 0.5, m);
  const double eps = 5.0 / m;
  for (auto _ : state) {
    const CoupledProblem p(disc, coefficient_zoo("smooth_trig"), eps, {1});
    benchmark::DoNotOptimize(p.solve(Matrix2::Identity() * 1.9, 1));
  }
}
BENCHMARK(BM_CoupledSetup)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_EvalJ(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto disc = Discretization::create(DomainSpec{}, 0.5, m);
  const CoupledProblem p(disc, coefficient_zoo("smooth_trig"), 5.0 / m, {1});
  double k = 1.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_J(p, k, 1, true));
    k = k < 2.5 ? k + 0.01 : 1.5;
  }
}
BENCHMARK(BM_EvalJ)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_Oracle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto field = coefficient_zoo("smooth_trig");
  for (auto _ : state) benchmark::DoNotOptimize(homogenized_tensor(field, n));
}
BENCHMARK(BM_Oracle)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
