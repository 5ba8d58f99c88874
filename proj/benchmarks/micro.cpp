#include <benchmark/benchmark.h>

#include <random>

#include "a3dmm/accel.hpp"
#include "a3dmm/extrapolate.hpp"
#include "a3dmm/problems.hpp"
#include "a3dmm/prox.hpp"

using namespace a3dmm;

namespace {

VectorXd gaussian(Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

}  // namespace

static void BM_SoftThreshold(benchmark::State& state) {
  const Index n = state.range(0);
  ProxOracle l1 = oracles::l1(n, 0.1);
  const VectorXd w = gaussian(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(l1.evaluate(w, 1.0));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SoftThreshold)->Range(64, 1 << 16);

static void BM_NuclearProx(benchmark::State& state) {
  const Index side = state.range(0);
  ProxOracle nuc = oracles::nuclear(side, side, 0.5);
  const VectorXd w = gaussian(side * side, 2);
  for (auto _ : state) benchmark::DoNotOptimize(nuc.evaluate(w, 1.0));
}
BENCHMARK(BM_NuclearProx)->Arg(16)->Arg(32)->Arg(64);

static void BM_FitAndExtrapolate(benchmark::State& state) {
  const int q = static_cast<int>(state.range(0));
  const Index n = 2048;
  DiffWindow w(n, q + 1);
  for (int j = 0; j <= q; ++j) w.push(gaussian(n, 10 + j));
  const VectorXd z = gaussian(n, 3);
  for (auto _ : state) {
    CompanionFit fit = fit_coefficients(w, q);
    benchmark::DoNotOptimize(extrapolate_finite(z, w, fit, 100));
  }
}
BENCHMARK(BM_FitAndExtrapolate)->DenseRange(2, 10, 4);

static void BM_AdmmStepLasso(benchmark::State& state) {
  ProblemInstance inst = make_lasso(state.range(0), 4 * state.range(0),
                                    state.range(0) / 5, 0.1, 1);
  IterateState s = IterateState::initial(inst.problem);
  for (auto _ : state) {
    s = admm_step(inst.problem, s, inst.default_gamma);
    benchmark::DoNotOptimize(s.z.data());
  }
}
BENCHMARK(BM_AdmmStepLasso)->Arg(64)->Arg(256);

static void BM_A3dmmLassoDesk(benchmark::State& state) {
  ProblemInstance inst = make_lasso();
  SolverConfig c;
  c.gamma = inst.default_gamma;
  c.max_iter = 200;
  c.tol = 0.0;
  ExtrapConfig e;
  RunOptions o;
  o.keep_trace = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_a3dmm(inst.problem, c, e, o));
}
BENCHMARK(BM_A3dmmLassoDesk)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
