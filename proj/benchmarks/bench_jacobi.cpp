#include <benchmark/benchmark.h>

#include <random>

#include "stenfuse/exec.hpp"

namespace {

using namespace stenfuse;

Patches random_rhs(const GridLayout& layout) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Patches rho = make_interior(layout);
  for (auto& p : rho)
    for (auto& v : p.values()) v = u(rng);
  return rho;
}

void solve(benchmark::State& state, Backend backend) {
  const GridLayout layout(static_cast<int>(state.range(0)), 4);
  const int iters = 20;
  const auto cfg = ProblemConfig::standard(layout, iters);
  const auto program = build_fused_program(cfg);
  const Patches phi0 = make_ghosted(layout);
  const Patches rho = random_rhs(layout);
  for (auto _ : state) {
    Solution s = backend == Backend::Fused ? run_fused(cfg, program, phi0, rho) : run_reference(cfg, phi0, rho);
    benchmark::DoNotOptimize(s.report.residuals.back());
  }
  const auto points = static_cast<std::int64_t>(layout.extent()) * layout.extent() * iters;
  state.SetItemsProcessed(state.iterations() * points);
}

void BM_Reference(benchmark::State& state) { solve(state, Backend::Reference); }
void BM_Fused(benchmark::State& state) { solve(state, Backend::Fused); }

// One box, one sweep: the specialized fused loop against the instruction interpreter.
void patch_sweep(benchmark::State& state, bool specialize) {
  const auto n = static_cast<int>(state.range(0));
  const GridLayout layout(n, 1);
  const auto program = build_fused_program(ProblemConfig::standard(layout, 1));
  const auto m = static_cast<std::size_t>(layout.m());
  std::vector<double> x(m * m), rho(static_cast<std::size_t>(n) * n), out(m * m);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : x) v = u(rng);
  for (auto& v : rho) v = u(rng);
  for (auto _ : state) {
    double acc = 0.0;
    sigma::run_fused_patch(program, x, rho, out, acc, specialize);
    benchmark::DoNotOptimize(acc);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

void BM_PatchSpecialized(benchmark::State& state) { patch_sweep(state, true); }
void BM_PatchInterpreted(benchmark::State& state) { patch_sweep(state, false); }

}  // namespace

BENCHMARK(BM_Reference)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fused)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PatchSpecialized)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PatchInterpreted)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
