#include <benchmark/benchmark.h>

#include <vector>

#include "locodl/algorithms.hpp"
#include "locodl/compressors.hpp"
#include "locodl/harness.hpp"

using namespace locodl;

namespace {

Vector probe(std::size_t d) {
  RandomStream rng(1);
  Vector x(d);
  for (auto& v : x) v = rng.normal();
  return x;
}

void BM_Compress(benchmark::State& state, CompressorKind kind) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const CompressorSpec spec{kind, d, 2};
  const Vector x = probe(d);
  RandomStream rng(2);
  Vector out;
  for (auto _ : state) {
    compress_into(spec, x, rng, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_CAPTURE(BM_Compress, rand_k, CompressorKind::rand_k)->RangeMultiplier(8)->Range(16, 8192);
BENCHMARK_CAPTURE(BM_Compress, natural, CompressorKind::natural)->RangeMultiplier(8)->Range(16, 8192);
BENCHMARK_CAPTURE(BM_Compress, rand_k_natural, CompressorKind::rand_k_natural)->RangeMultiplier(8)->Range(16, 8192);
BENCHMARK_CAPTURE(BM_Compress, l1_selection, CompressorKind::l1_selection)->RangeMultiplier(8)->Range(16, 8192);

// LoCoDL step on a synthetic logistic problem, n clients of 20 rows in d = 50
void BM_LocodlStep(benchmark::State& state) {
  ProblemSource source;
  source.kind = SourceKind::synthetic_logistic;
  source.dim = 50;
  const auto n = static_cast<std::size_t>(state.range(0));
  const BuiltProblem built = build_problem(source, n, 1e3, 1);
  const CompressorSpec spec = CompressorSpec::rand_k(50, 2);
  const std::vector<CompressorSpec> specs(n, spec);
  const AlgoParams params = default_params(built.problem->smoothness(), built.problem->strong_convexity(), spec, n);
  LoCoDLState s = LoCoDLState::zeros(n, 50);
  RunStreams streams(3, n);
  LoCoDLWorkspace ws;
  for (auto _ : state) {
    locodl_step(s, *built.problem, specs, params, streams, ws);
    benchmark::DoNotOptimize(s.y.data());
  }
}
BENCHMARK(BM_LocodlStep)->Arg(5)->Arg(25)->Arg(100);

void BM_DianaStep(benchmark::State& state) {
  ProblemSource source;
  source.kind = SourceKind::synthetic_logistic;
  source.dim = 50;
  const auto n = static_cast<std::size_t>(state.range(0));
  const BuiltProblem built = build_problem(source, n, 1e3, 1);
  const CompressorSpec spec = CompressorSpec::rand_k(50, 2);
  const std::vector<CompressorSpec> specs(n, spec);
  const DianaParams params = diana_default_params(*built.problem, spec);
  DianaState s = DianaState::zeros(n, 50);
  RunStreams streams(3, n);
  DianaWorkspace ws;
  for (auto _ : state) {
    diana_step(s, *built.problem, specs, params, streams, ws);
    benchmark::DoNotOptimize(s.x.data());
  }
}
BENCHMARK(BM_DianaStep)->Arg(5)->Arg(25)->Arg(100);

void BM_Lyapunov(benchmark::State& state) {
  ProblemSource source;
  source.dim = 10;
  const BuiltProblem built = build_problem(source, 20, 100.0, 1);
  const AlgoParams params = default_params(built.problem->smoothness(), built.problem->strong_convexity(),
                                           CompressorSpec::rand_k(10, 1), 20);
  const LoCoDLState s = LoCoDLState::zeros(20, 10);
  for (auto _ : state) benchmark::DoNotOptimize(lyapunov(s, built.reference, params));
}
BENCHMARK(BM_Lyapunov);

}  // namespace

BENCHMARK_MAIN();
