#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ttune/executor.hpp"
#include "ttune/search.hpp"

namespace ttune {

struct TimingProtocol {
  int warmups = 3;
  int repetitions = 5;
  int threads = 1;
};

struct MeasurementRecord {
  CandidatePlan plan;
  double heuristic_cost = 0.0;
  std::vector<double> trial_seconds;
  double best_seconds = 0.0;
  double bandwidth_gibs = 0.0;
};

// bytes moved divided by 2^30 and by the runtime: A is read, B is written,
// and B is also read when beta != 0
double bandwidth_gibs(const TransposeProblem& p, double seconds);

// warmups then timed repetitions on the given buffers; best repetition wins
MeasurementRecord measure_candidate(const TransposeProblem& p, const CandidatePlan& plan,
                                    const TensorBuffer& a, TensorBuffer& b,
                                    const TimingProtocol& protocol);

// index of the winning record: highest bandwidth, ties to the record with the
// lower heuristic cost, then the lexicographically smaller plan
std::size_t select_solution(const std::vector<MeasurementRecord>& records);

// best bandwidth among candidates at prefetch distance d relative to the best
// bandwidth overall; throws when no record ran at d
double efficiency(int d, const std::vector<MeasurementRecord>& records);

struct SolutionEntry {
  std::string problem_key;
  std::string hardware_key;
  CandidatePlan plan;
  double bandwidth_gibs = 0.0;
  std::string timestamp;  // ISO 8601 UTC
};

// append-only tab-separated file; concurrent access serialized with flock;
// the newest entry for a key pair wins
class SolutionCache {
 public:
  explicit SolutionCache(std::filesystem::path file) : file_(std::move(file)) {}

  const std::filesystem::path& file() const { return file_; }
  std::optional<SolutionEntry> lookup(const std::string& problem_key,
                                      const std::string& hardware_key) const;
  void store(const SolutionEntry& entry);

 private:
  std::filesystem::path file_;
};

std::string default_hardware_key(int threads, int micro_width);
std::string iso8601_utc_now();

struct TuneResult {
  std::vector<MeasurementRecord> records;  // queue order
  std::size_t best = 0;
};

// measures every queued candidate on seeded buffers; B is restored from a
// pristine copy before each candidate when beta != 0
TuneResult tune(const NormalizedProblem& problem, const CandidateQueue& queue,
                const TimingProtocol& protocol, std::uint64_t seed = 42);

// deterministic cross-platform fill with values in [1, 2)
void fill_buffer(TensorBuffer& buffer, std::uint64_t seed);

}  // namespace ttune
