// Microbenchmarks for the hot paths: Green table lookups, equilibrium
// solves, cross-terms, escape sampling, and the variational ratio.

#include <benchmark/benchmark.h>

#include <vector>

#include "rwcap/capacity.hpp"
#include "rwcap/crossterm.hpp"
#include "rwcap/gn.hpp"
#include "rwcap/green.hpp"
#include "rwcap/rng.hpp"
#include "rwcap/walk.hpp"

using namespace rwcap;

namespace {

GreenTable& bench_table() {
  static GreenTable table;
  return table;
}

void BM_GreenLookupWarm(benchmark::State& state) {
  GreenTable& table = bench_table();
  CounterRng rng(1, 0);
  std::vector<Point> pts;
  for (int i = 0; i < 4096; ++i) {
    Point p;
    for (int d = 0; d < 4; ++d)
      p[d] = static_cast<int>(rng.next_below(41)) - 20;
    pts.push_back(p);
    table.green(p);  // warm the cache
  }
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(table.green(pts[i++ & 4095]));
  }
}
BENCHMARK(BM_GreenLookupWarm);

void BM_GreenSeriesOrigin(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(green_d_series(kOrigin, 2000).value);
  }
}
BENCHMARK(BM_GreenSeriesOrigin);

void BM_HeatKernelEval(benchmark::State& state) {
  HeatKernelEvaluator ev;
  Point z{3, 2, 1, 0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(ev.green(z));
  }
}
BENCHMARK(BM_HeatKernelEval);

void BM_EquilibriumSolve(benchmark::State& state) {
  GreenTable& table = bench_table();
  size_t n = static_cast<size_t>(state.range(0));
  WalkPath w = sample_walk(n, 7, 0);
  PointSet A = range_of(w, 1, n);
  for (auto _ : state) {
    EquilibriumSolution es(A, table);
    benchmark::DoNotOptimize(es.capacity());
  }
  state.SetLabel(std::to_string(A.size()) + " pts");
}
BENCHMARK(BM_EquilibriumSolve)->Arg(64)->Arg(256)->Arg(1024);

void BM_CrossTermReport(benchmark::State& state) {
  GreenTable& table = bench_table();
  PointSet A = range_of(sample_walk(40, 3, 0), 1, 40);
  PointSet B = range_of(sample_walk(40, 3, 1), 1, 40);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cross_term_report(A, B, table).residual);
  }
}
BENCHMARK(BM_CrossTermReport);

void BM_McEscape(benchmark::State& state) {
  PointSet A = range_of(sample_walk(64, 5, 0), 1, 64);
  McEscapeContext ctx(A);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ctx.run(Point{9, 0, 0, 0}, 1000, 11, 0).estimate);
  }
}
BENCHMARK(BM_McEscape);

void BM_GnRatioGradient(benchmark::State& state) {
  RadialProfile f = RadialProfile::log_grid(static_cast<int>(state.range(0)));
  for (size_t i = 0; i < f.radii.size(); ++i) {
    double r = f.radii[i];
    f.values[i] = r < 30.0 ? std::exp(-r * r) : 0.0;
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(gn_ratio_gradient(f).front());
  }
}
BENCHMARK(BM_GnRatioGradient)->Arg(200)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
