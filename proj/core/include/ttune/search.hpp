#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ttune/plan.hpp"
#include "ttune/problem.hpp"

namespace ttune {

struct ScoredPlan {
  CandidatePlan plan;
  double cost = 0.0;  // sum of the rank indices that produced the plan
};

struct CandidateQueue {
  std::int64_t capacity = -1;  // -1: unbounded
  std::vector<ScoredPlan> entries;  // ascending cost, deterministic tie-break
};

struct SearchConfig {
  int micro_width = 0;  // 0: derive from element kinds
  int cacheline_bytes = 64;
  std::int64_t max_implementations = 200;  // -1: exhaustive
  std::optional<std::vector<std::pair<std::int64_t, std::int64_t>>> blockings;
  std::optional<std::vector<int>> prefetch_distances;
  bool allow_streaming_stores = true;
};

// vector-register elements per kind: real32 8, real64 4, complex64 4, complex128 2
int default_micro_width(ElementKind k);
int default_micro_width(ElementKind a, ElementKind b);  // min of the two

// {w,2w,3w,4w} x {w,2w,3w,4w}, block_a major; a user override replaces the
// grid and must contain positive multiples of w
std::vector<std::pair<std::int64_t, std::int64_t>> enumerate_blockings(
    int w, const std::optional<std::vector<std::pair<std::int64_t, std::int64_t>>>& override =
               std::nullopt);

// stable order: blockings where both extents are whole cachelines first, then
// by ascending remainder of the blocked extents modulo the block
std::vector<std::pair<std::int64_t, std::int64_t>> rank_blockings(
    const NormalizedProblem& problem, int w, std::int64_t cacheline_elements,
    std::vector<std::pair<std::int64_t, std::int64_t>> candidates);

// smaller is better: innermost positions weigh most, small strides win
double score_loop_order(const std::vector<int>& order, const TransposeProblem& problem);

// all d! orders when limit < 0, otherwise the `limit` best under
// (score, B-index sequence, order) ascending
std::vector<std::vector<int>> enumerate_loop_orders(const NormalizedProblem& problem,
                                                    std::int64_t limit = -1);

// default 0..8; 0 disables prefetching
std::vector<int> enumerate_prefetch_distances(const std::optional<std::vector<int>>& override =
                                                  std::nullopt);

// cross product of ranked blockings, loop orders, distances and streaming
// options, kept sorted by combined rank cost and truncated to
// max_implementations
CandidateQueue build_candidates(const NormalizedProblem& problem, const SearchConfig& config);

}  // namespace ttune
