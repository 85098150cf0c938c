#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ttune/problem.hpp"
#include "ttune/search.hpp"
#include "ttune/tuner.hpp"

namespace ttune {

enum class PermCategory { stride1, inverse, general };
enum class SizeConfig { balanced, skew_a, skew_b };

std::string perm_category_name(PermCategory c);
std::string size_config_name(SizeConfig c);

struct BenchmarkCase {
  std::string id;
  TransposeProblem problem;
  PermCategory category = PermCategory::general;
  SizeConfig config = SizeConfig::balanced;
};

// 57 synthetic cases: one 2D permutation, three 3D, five each for 4D/5D/6D,
// every one non-mergeable, times three extent shapes per permutation
// (balanced, large extent on A's first index, large extent on B's first
// index), each within 10% of the byte volume; alpha = beta = 1
std::vector<BenchmarkCase> build_benchmark(std::int64_t volume_bytes, ElementKind kind,
                                           std::uint64_t seed);

struct BenchmarkRow {
  BenchmarkCase item;
  double ref_gibs = 0.0;
  double tuned_gibs = 0.0;
  double speedup = 0.0;
  CandidatePlan plan;
};

// per case: reference nest bandwidth, autotuned bandwidth, their ratio, and
// the winning plan; rows in case order
std::vector<BenchmarkRow> run_benchmark(const std::vector<BenchmarkCase>& cases,
                                        const SearchConfig& search, const TimingProtocol& protocol,
                                        std::uint64_t seed = 42);

// one line per case, key=value fields separated by ';'
std::string benchmark_case_line(const BenchmarkCase& item);
void write_benchmark_manifest(std::ostream& os, const std::vector<BenchmarkCase>& cases);

void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows);

}  // namespace ttune
