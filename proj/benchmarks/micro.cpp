#include <benchmark/benchmark.h>

#include "ttune/executor.hpp"
#include "ttune/problem.hpp"
#include "ttune/search.hpp"
#include "ttune/tuner.hpp"

using namespace ttune;

static void bm_merge_indices(benchmark::State& state) {
  const TransposeProblem p = make_problem({6, 5, 4, 3, 2, 1}, {4, 5, 6, 4, 5, 6});
  for (auto _ : state) benchmark::DoNotOptimize(merge_indices(p));
}
BENCHMARK(bm_merge_indices);

static void bm_build_candidates(benchmark::State& state) {
  const NormalizedProblem n = merge_indices(make_problem({2, 1}, {512, 512}));
  SearchConfig cfg;
  cfg.max_implementations = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(build_candidates(n, cfg));
}
BENCHMARK(bm_build_candidates)->Arg(-1)->Arg(200)->Arg(10);

static void bm_plan_parse(benchmark::State& state) {
  const std::string text = "order=3,1,2;bA=32;bB=16;d=4;ss=1;w=8";
  for (auto _ : state) benchmark::DoNotOptimize(CandidatePlan::parse(text));
}
BENCHMARK(bm_plan_parse);

static void bm_reference_transpose(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const TransposeProblem p = make_problem({2, 1}, {n, n});
  TensorBuffer a = make_buffer_a(p);
  TensorBuffer b = make_buffer_b(p);
  fill_buffer(a, 1);
  for (auto _ : state) reference_transpose(p, a, b);
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * 2 * n * n * 4);
}
BENCHMARK(bm_reference_transpose)->Arg(256)->Arg(1024);

static void bm_execute_plan(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const TransposeProblem p = make_problem({2, 1}, {n, n});
  const CandidatePlan plan{{2, 1}, 16, 16, 2, false, 8};
  TensorBuffer a = make_buffer_a(p);
  TensorBuffer b = make_buffer_b(p);
  fill_buffer(a, 1);
  for (auto _ : state) execute_plan(p, plan, a, b);
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * 2 * n * n * 4);
}
BENCHMARK(bm_execute_plan)->Arg(256)->Arg(1024);

static void bm_micro_tile(benchmark::State& state) {
  const int w = static_cast<int>(state.range(0));
  std::vector<float> src(static_cast<std::size_t>(w * w * 4));
  std::vector<float> dst(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) src[i] = static_cast<float>(i);
  for (auto _ : state) {
    micro_tile_transpose(w, src.data(), 2 * w, dst.data(), 2 * w, 1.0, 0.0, 1);
    benchmark::DoNotOptimize(dst.data());
  }
}
BENCHMARK(bm_micro_tile)->Arg(4)->Arg(8)->Arg(16);

BENCHMARK_MAIN();
