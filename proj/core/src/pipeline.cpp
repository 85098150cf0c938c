#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "ttune/benchmark.hpp"
#include "ttune/cli.hpp"
#include "ttune/emit.hpp"
#include "ttune/executor.hpp"
#include "ttune/search.hpp"
#include "ttune/tuner.hpp"

namespace ttune {

namespace {

std::pair<ElementKind, ElementKind> parse_kinds(const std::string& code) {
  if (code.empty()) throw std::invalid_argument("dataType: empty");
  const auto a = kind_from_code(code[0]);
  const auto b = code.size() > 1 ? kind_from_code(code[1]) : a;
  if (!a || !b || code.size() > 2)
    throw std::invalid_argument("dataType: unknown code '" + code + "'");
  return {*a, *b};
}

std::vector<std::pair<std::int64_t, std::int64_t>> parse_blockings(
    const std::vector<std::string>& items) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (const auto& s : items) {
    const auto sep = s.find('x');
    std::size_t used_h = 0, used_w = 0;
    std::int64_t h = 0, w = 0;
    bool ok = sep != std::string::npos && sep > 0 && sep + 1 < s.size();
    if (ok) {
      try {
        h = std::stoll(s.substr(0, sep), &used_h);
        w = std::stoll(s.substr(sep + 1), &used_w);
      } catch (const std::exception&) {
        ok = false;
      }
      ok = ok && used_h == sep && used_w == s.size() - sep - 1 && h > 0 && w > 0;
    }
    if (!ok) throw std::invalid_argument("blockings: '" + s + "' is not <H>x<W>");
    out.emplace_back(h, w);
  }
  return out;
}

int resolved_threads(const CliConfig& c) {
  if (c.threads > 0) return c.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

SearchConfig search_config(const CliConfig& c) {
  SearchConfig search;
  search.max_implementations = c.max_implementations;
  if (!c.prefetch_distances.empty()) search.prefetch_distances = c.prefetch_distances;
  if (!c.blockings.empty()) search.blockings = parse_blockings(c.blockings);
  search.allow_streaming_stores = !c.no_streaming_stores;
  return search;
}

int run_benchmark_mode(const CliConfig& c, std::ostream& out) {
  const auto kinds = parse_kinds(c.data_type);
  const auto cases = build_benchmark(c.volume_mib << 20, kinds.first, c.seed);
  if (!c.manifest_file.empty()) {
    std::ofstream mf(c.manifest_file);
    if (!mf) throw std::runtime_error("cannot write " + c.manifest_file);
    write_benchmark_manifest(mf, cases);
  }
  const TimingProtocol protocol{c.warmups, c.reps, resolved_threads(c)};
  const auto rows = run_benchmark(cases, search_config(c), protocol, c.seed);
  if (c.json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& row : rows) {
      arr.push_back({{"caseId", row.item.id},
                     {"dim", row.item.problem.rank()},
                     {"perm", row.item.problem.perm.map},
                     {"sizes", row.item.problem.sizes},
                     {"category", perm_category_name(row.item.category)},
                     {"config", size_config_name(row.item.config)},
                     {"refGiBs", row.ref_gibs},
                     {"tunedGiBs", row.tuned_gibs},
                     {"speedup", row.speedup},
                     {"plan", row.plan.serialize()}});
    }
    out << arr.dump(2) << "\n";
  } else {
    write_benchmark_csv(out, rows);
  }
  return 0;
}

int run_single(const CliConfig& c, std::ostream& out, std::ostream& err) {
  const auto kinds = parse_kinds(c.data_type);
  const TransposeProblem problem =
      make_problem(c.perm, c.size, kinds.first, kinds.second, c.alpha, c.beta, c.lda, c.ldb);
  if (problem.beta != 0.0 && !c.no_streaming_stores)
    err << "note: beta != 0 disables streaming stores\n";

  const int threads = resolved_threads(c);
  const TimingProtocol protocol{c.warmups, c.reps, threads};
  const NormalizedProblem norm = merge_indices(problem);
  const SearchConfig search = search_config(c);
  const int width = search.micro_width > 0 ? search.micro_width
                                           : default_micro_width(kinds.first, kinds.second);
  const std::string problem_key = canonical_key(problem);
  const std::string hardware_key =
      c.hardware_key.empty() ? default_hardware_key(threads, width) : c.hardware_key;

  SolutionCache cache(c.cache_file);
  const auto hit = cache.lookup(problem_key, hardware_key);

  CandidatePlan plan;
  double bandwidth = 0.0, best_seconds = 0.0;
  std::vector<double> trial_seconds;
  std::size_t measured = 0;
  if (hit) {
    plan = hit->plan;
    bandwidth = hit->bandwidth_gibs;
  } else {
    const CandidateQueue queue = build_candidates(norm, search);
    const TuneResult tuned = tune(norm, queue, protocol, c.seed);
    const MeasurementRecord& winner = tuned.records[tuned.best];
    plan = winner.plan;
    bandwidth = winner.bandwidth_gibs;
    best_seconds = winner.best_seconds;
    trial_seconds = winner.trial_seconds;
    measured = tuned.records.size();
    cache.store({problem_key, hardware_key, plan, bandwidth, iso8601_utc_now()});
  }

  std::optional<EmittedFiles> files;
  if (!c.emit_basename.empty()) {
    const std::string stem = std::filesystem::path(c.emit_basename).filename().string();
    const EmittedKernel kernel = emit_source(norm, plan, stem);
    files = write_kernel_files(kernel, c.emit_basename);
  }

  if (c.json) {
    nlohmann::json j{{"problemKey", problem_key},
                     {"hardwareKey", hardware_key},
                     {"cacheHit", hit.has_value()},
                     {"cacheFile", c.cache_file},
                     {"threads", threads},
                     {"mergedPerm", norm.problem.perm.map},
                     {"mergedSize", norm.problem.sizes},
                     {"measuredCandidates", measured},
                     {"plan",
                      {{"serialized", plan.serialize()},
                       {"order", plan.loop_order},
                       {"blockA", plan.block_a},
                       {"blockB", plan.block_b},
                       {"prefetchDistance", plan.prefetch_distance},
                       {"streamingStores", plan.streaming_stores},
                       {"microWidth", plan.micro_width}}},
                     {"bandwidthGiBs", bandwidth},
                     {"bestSeconds", best_seconds},
                     {"trialSeconds", trial_seconds}};
    if (files)
      j["emitted"] = {{"source", files->source.string()}, {"header", files->header.string()}};
    out << j.dump(2) << "\n";
  } else {
    out << "problem: " << problem_key << "\n";
    out << "merged: " << canonical_key(norm.problem) << "\n";
    out << "hardware: " << hardware_key << "\n";
    out << "cache: " << (hit ? "hit" : "miss") << " (" << c.cache_file << ")\n";
    out << "candidates measured: " << measured << "\n";
    out << "solution: " << plan.serialize() << "\n";
    char bw[64];
    std::snprintf(bw, sizeof bw, "%.6g", bandwidth);
    out << "bandwidth: " << bw << " GiB/s\n";
    if (files)
      out << "emitted: " << files->source.string() << " " << files->header.string() << "\n";
  }
  return 0;
}

}  // namespace

int run_pipeline(const CliConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.benchmark) return run_benchmark_mode(config, out);
    return run_single(config, out, err);
  } catch (const std::invalid_argument& e) {
    err << "ttune: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "ttune: error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace ttune
