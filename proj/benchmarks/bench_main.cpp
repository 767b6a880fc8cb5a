#include <benchmark/benchmark.h>

#include <random>

#include "posgain/numkernel.hpp"
#include "posgain/posnorm.hpp"
#include "posgain/rnn.hpp"

using namespace posgain;

namespace {

StateSpace bench_system(int n, int nw, int nz, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  auto fill = [&](int r, int c) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = g(rng);
    return m;
  };
  Matrix a = fill(n, n);
  a = a.scaled(0.8 / spectral_norm(a));
  return StateSpace{a, fill(n, nw), fill(nz, n), fill(nz, nw)};
}

void BM_SymEig(benchmark::State& state) {
  int d = static_cast<int>(state.range(0));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  Matrix r(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r(i, j) = g(rng);
  SymMatrix s{r.transpose() * r};
  for (auto _ : state) benchmark::DoNotOptimize(sym_eig(s));
}
BENCHMARK(BM_SymEig)->Arg(10)->Arg(30)->Arg(60);

void BM_Lift(benchmark::State& state) {
  StateSpace sys = bench_system(4, 1, 1, 11);
  int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lift(sys, order));
}
BENCHMARK(BM_Lift)->Arg(5)->Arg(10)->Arg(20);

void BM_GainLmiProbe(benchmark::State& state) {
  StateSpace sys = bench_system(4, 1, 1, 11);
  int order = static_cast<int>(state.range(0));
  StateSpace lifted = lifted_to_statespace(lift(sys, order));
  double gamma = 2.0 * hinf_norm(sys, 1e-3);
  for (auto _ : state) {
    SolveResult res = solve(build_gain_lmi(lifted, gamma, true));
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_GainLmiProbe)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_LowerBoundRelaxation(benchmark::State& state) {
  StateSpace sys = bench_system(4, 1, 1, 11);
  int order = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lower_bound_pos(sys, order, 1e-4));
}
BENCHMARK(BM_LowerBoundRelaxation)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_SsgSolve(benchmark::State& state) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  int n = 6;
  Matrix win(n, n), wout(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      win(i, j) = 0.2 * g(rng);
      wout(i, j) = 0.2 * g(rng);
    }
  RnnModel rnn(Matrix(n, n), win, wout);
  for (auto _ : state) {
    SolveResult res = solve(ssg_lmi(rnn, true));
    benchmark::DoNotOptimize(res);
  }
}
BENCHMARK(BM_SsgSolve)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
  StateSpace sys = bench_system(8, 3, 3, 17);
  Signal w = Signal::random_nonneg(3, 1000, 5);
  for (auto _ : state) benchmark::DoNotOptimize(simulate(sys, w, 1000));
}
BENCHMARK(BM_Simulate);

}  // namespace

BENCHMARK_MAIN();
