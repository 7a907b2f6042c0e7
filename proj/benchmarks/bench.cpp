#include <benchmark/benchmark.h>

#include <complex>

#include <rrmap/cgo2d.hpp>
#include <rrmap/domain.hpp>
#include <rrmap/experiments.hpp>
#include <rrmap/forward.hpp>
#include <rrmap/impedance.hpp>
#include <rrmap/potentials.hpp>

namespace {

using namespace rrmap;

PotentialSpec bump() {
  PotentialSpec s;
  s.family = PotentialFamily::gaussian_bump;
  s.centers = {{0.45, 0.55}};
  s.amplitudes = {1.0};
  s.widths = {0.12};
  s.margin = 0.24;
  return s;
}

void BM_robin_solve(benchmark::State& state) {
  Grid g = build_grid(static_cast<int>(state.range(0)));
  GridFunction v = make_potential(g, bump());
  BoundaryTrace f = standard_boundary_data(g, 7u)[1];
  for (auto _ : state) {
    SolveReport rep = robin_solve(g, {v, -1.0, 0.9}, f);
    benchmark::DoNotOptimize(rep.solution.values.data());
  }
}
BENCHMARK(BM_robin_solve)->Arg(16)->Arg(32)->Arg(64);

void BM_assemble_map(benchmark::State& state) {
  Grid g = build_grid(static_cast<int>(state.range(0)));
  GridFunction v = make_potential(g, bump());
  for (auto _ : state) {
    BoundaryOperator M = assemble_map(g, {v, -1.0, 0.9});
    benchmark::DoNotOptimize(M.K.data());
  }
}
BENCHMARK(BM_assemble_map)->Arg(16)->Arg(32)->Arg(64);

void BM_cauchy_T(benchmark::State& state) {
  Grid g = build_grid(static_cast<int>(state.range(0)));
  GridFunction u = make_potential(g, bump());
  for (auto _ : state) {
    GridFunction t = cauchy_T(g, u);
    benchmark::DoNotOptimize(t.values.data());
  }
}
BENCHMARK(BM_cauchy_T)->Arg(64)->Arg(128)->Arg(256);

void BM_mu_solve(benchmark::State& state) {
  Grid g = build_grid(static_cast<int>(state.range(0)));
  GridFunction v = make_potential(g, bump());
  CgoParams p;
  p.z0 = Complex(0.5, 0.5);
  p.lambda = Complex(40.0, 0.0);
  for (auto _ : state) {
    CgoSolution sol = mu_solve(g, v, p);
    benchmark::DoNotOptimize(sol.mu.values.data());
  }
}
BENCHMARK(BM_mu_solve)->Arg(32)->Arg(64);

} // namespace

BENCHMARK_MAIN();
