#include "ttune/cli.hpp"

#include <ostream>

#include "CLI11.hpp"

namespace ttune {

namespace {
const char* kUsage =
    "usage: ttune --perm=<p1,p2,...> --size=<n1,n2,...> [options], or ttune --benchmark\n";
}

CliParse parse_args(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliParse result;
  CliConfig& c = result.config;
  CLI::App app{"autotuned out-of-place tensor transposition: B = alpha * A^perm + beta * B"};
  app.add_option("--perm", c.perm, "1-based target position of each source index")
      ->delimiter(',');
  app.add_option("--size", c.size, "extent of each source index")->delimiter(',');
  app.add_option("--dataType", c.data_type, "element kinds of A and B")
      ->check(CLI::IsMember({"s", "d", "c", "z", "sd", "ds", "cz", "zc"}))
      ->capture_default_str();
  app.add_option("--alpha", c.alpha, "scale on A")->capture_default_str();
  app.add_option("--beta", c.beta, "scale on the prior B")->capture_default_str();
  app.add_option("--lda", c.lda, "leading extents of A")->delimiter(',');
  app.add_option("--ldb", c.ldb, "leading extents of B")->delimiter(',');
  app.add_option("--prefetchDistances", c.prefetch_distances,
                 "candidate software prefetch distances")
      ->delimiter(',');
  app.add_flag("--no-streaming-stores", c.no_streaming_stores, "never propose streaming stores");
  app.add_option("--blockings", c.blockings, "candidate macro tiles, each <H>x<W>")
      ->delimiter(',');
  app.add_option("--maxImplementations", c.max_implementations,
                 "candidate budget, -1 for exhaustive")
      ->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads (default: all hardware threads)");
  app.add_option("--cacheFile", c.cache_file, "solution cache path")
      ->envname("TTUNE_CACHE")
      ->capture_default_str();
  app.add_option("--hardwareKey", c.hardware_key,
                 "cache key naming this machine (default: derived)");
  app.add_option("--emit", c.emit_basename, "write <basename> source and header for the winner");
  app.add_flag("--benchmark", c.benchmark, "run the 57-case suite and print CSV");
  app.add_option("--volume", c.volume_mib, "benchmark tensor volume in MiB")
      ->capture_default_str();
  app.add_option("--manifest", c.manifest_file,
                 "benchmark mode: also write the case manifest to this file");
  app.add_option("--seed", c.seed, "seed for data fills and benchmark construction")
      ->capture_default_str();
  app.add_option("--warmups", c.warmups, "untimed runs per candidate")->capture_default_str();
  app.add_option("--reps", c.reps, "timed runs per candidate")->capture_default_str();
  app.add_flag("--json", c.json, "machine-readable result on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    result.exit_code = 0;
    return result;
  } catch (const CLI::ParseError& e) {
    err << "ttune: " << e.what() << "\n" << kUsage;
    result.exit_code = 1;
    return result;
  }
  if (!c.benchmark && (c.perm.empty() || c.size.empty())) {
    err << "ttune: --perm and --size are required\n" << kUsage;
    result.exit_code = 1;
  }
  return result;
}

}  // namespace ttune
