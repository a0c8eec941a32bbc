// Serial vs OpenMP quadrature, and the incremental arrival kernel vs the
// generic transform it replaces inside the engine.

#include <map>
#include <random>

#include <benchmark/benchmark.h>

#include "dralloc/arrival_kernel.hpp"
#include "dralloc/engine.hpp"
#include "dralloc/instance.hpp"
#include "dralloc/transform.hpp"

using namespace dralloc;

namespace {

struct Fixture {
  Instance inst;
  Vec x;
};

const Fixture& fixture(std::size_t n) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Fixture f{generate("random_mixture", {.n = n, .m = n}, 1), {}};
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  f.x.resize(f.inst.dim());
  for (double& v : f.x) v = u(rng);
  return cache.emplace(n, std::move(f)).first->second;
}

void BM_UGradSerial(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  const UTransform T(f.inst.valuation, {static_cast<std::size_t>(state.range(1)), 1e-6});
  for (auto _ : state) benchmark::DoNotOptimize(u_grad_serial(T, f.x));
}

void BM_UGradParallel(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  const UTransform T(f.inst.valuation, {static_cast<std::size_t>(state.range(1)), 1e-6});
  for (auto _ : state) benchmark::DoNotOptimize(u_grad(T, f.x));
}

void BM_FhatUpperSerial(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  const UTransform T(f.inst.valuation, {257, 1e-6});
  for (auto _ : state) benchmark::DoNotOptimize(fhat_upper_at_ugrad_serial(T, f.x));
}

void BM_FhatUpperParallel(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  const UTransform T(f.inst.valuation, {257, 1e-6});
  for (auto _ : state) benchmark::DoNotOptimize(fhat_upper_at_ugrad(T, f.x));
}

// One engine step on the last arrival: the generic path re-evaluates the
// whole restricted tree, the kernel only the subtrees touching A_j.
void BM_StepGeneric(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  const UTransform T(f.inst.valuation, {257, 1e-6});
  for (auto _ : state) benchmark::DoNotOptimize(u_grad(T, f.x));
}

void BM_StepKernel(benchmark::State& state) {
  const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
  const auto& options = f.inst.arrivals.back().options;
  ArrivalKernel k(f.inst.valuation, options, f.x, {257, 1e-6});
  Vec g;
  for (auto _ : state) {
    k.u_grad(g);
    benchmark::DoNotOptimize(g.data());
  }
}

void BM_RunOnline(benchmark::State& state) {
  const Instance inst = generate("triangular", {.n = static_cast<std::size_t>(state.range(0))}, 0);
  const bool parallel = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_online(inst, {.delta = 1e-2, .parallel = parallel}).report.primal);
}

}  // namespace

BENCHMARK(BM_UGradSerial)->ArgsProduct({{10, 40}, {129, 257, 1025}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_UGradParallel)->ArgsProduct({{10, 40}, {129, 257, 1025}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FhatUpperSerial)->Arg(10)->Arg(40)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FhatUpperParallel)->Arg(10)->Arg(40)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_StepGeneric)->Arg(10)->Arg(40)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_StepKernel)->Arg(10)->Arg(40)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RunOnline)->ArgsProduct({{20, 50}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
