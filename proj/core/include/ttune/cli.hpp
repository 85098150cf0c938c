#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ttune {

struct CliConfig {
  std::vector<int> perm;
  std::vector<std::int64_t> size;
  std::string data_type = "s";
  double alpha = 1.0;
  double beta = 0.0;
  std::vector<std::int64_t> lda;
  std::vector<std::int64_t> ldb;
  std::vector<int> prefetch_distances;  // empty: default candidate set
  bool no_streaming_stores = false;
  std::vector<std::string> blockings;  // "HxW" entries, empty: default grid
  std::int64_t max_implementations = 200;
  int threads = 0;  // 0: all hardware threads
  std::string cache_file = "ttune.cache";
  std::string hardware_key;    // empty: derived from host and protocol
  std::string emit_basename;   // empty: no source emission
  bool benchmark = false;
  std::int64_t volume_mib = 200;
  std::string manifest_file;  // benchmark mode: also write the case manifest here
  std::uint64_t seed = 42;
  int warmups = 3;
  int reps = 5;
  bool json = false;
};

struct CliParse {
  CliConfig config;
  int exit_code = -1;  // -1: proceed to run_pipeline, otherwise exit with this
};

CliParse parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// merge, cache lookup, candidate search, measurement, selection, cache store,
// optional emission; benchmark mode runs the 57-case suite instead.
// 0 success, 1 usage error, 2 runtime error
int run_pipeline(const CliConfig& config, std::ostream& out, std::ostream& err);

}  // namespace ttune
