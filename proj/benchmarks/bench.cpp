#include <benchmark/benchmark.h>

#include "balans/analysis.hpp"

using namespace balans;

namespace {

void BM_expr_value(benchmark::State& state) {
  Expr e = Expr::parse("u*(1-u)*exp(-t)+0.1*sin(2*pi*x)");
  double acc = 0.0;
  for (auto _ : state) {
    acc += e.value(0.3, 0.5, 0.25);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_expr_value);

void BM_expr_jet(benchmark::State& state) {
  Expr e = Expr::parse("u*(1-u)*exp(-t)+0.1*sin(2*pi*x)");
  for (auto _ : state) {
    Jet2 j = e.jet(0.3, 0.5, 0.25);
    benchmark::DoNotOptimize(j);
  }
}
BENCHMARK(BM_expr_jet);

void BM_convection_step(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  Ibvp p = catalog_problem("burgers-smooth");
  Grid g = build_grid(p, cells, std::nullopt, 1.0);
  DiscreteData d = discretize(p, g, 3);
  for (auto _ : state) {
    std::vector<double> out = convection_step(d.u0, 0.5, 0.5, 0.0, g, p.flux);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * cells);
}
BENCHMARK(BM_convection_step)->Arg(100)->Arg(1000)->Arg(10000);

void BM_full_solve(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  Ibvp p = catalog_problem("burgers-riemann");
  Grid g = build_grid(p, cells, std::nullopt, 1.0);
  DiscreteData d = discretize(p, g, 3);
  for (auto _ : state) {
    DiscreteSolution sol = run(p, g, d, false);
    benchmark::DoNotOptimize(sol.cells.data());
  }
}
BENCHMARK(BM_full_solve)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_entropy_audit(benchmark::State& state) {
  Ibvp p = catalog_problem("burgers-riemann");
  Grid g = build_grid(p, 50, std::nullopt, 1.0);
  DiscreteSolution sol = run(p, g, discretize(p, g, 3), true);
  std::vector<double> ks = default_k_samples(sol, 21);
  for (auto _ : state) {
    EntropyReport rep = entropy_residuals(sol, p, ks);
    benchmark::DoNotOptimize(rep.worst_plus);
  }
}
BENCHMARK(BM_entropy_audit)->Unit(benchmark::kMillisecond);

void BM_envelopes(benchmark::State& state) {
  Ibvp p = catalog_problem("decay");
  Grid g = build_grid(p, 100, std::nullopt, 1.0);
  DiscreteSolution sol = run(p, g, discretize(p, g, 3), false);
  for (auto _ : state) {
    Envelopes env = envelopes_at(p, sol, sol.steps, 13);
    benchmark::DoNotOptimize(env.Cxt);
  }
}
BENCHMARK(BM_envelopes)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
