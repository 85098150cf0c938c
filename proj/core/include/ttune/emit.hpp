#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ttune/plan.hpp"
#include "ttune/problem.hpp"

namespace ttune {

// named text templates with {placeholder} substitution; the emitter assembles
// kernels from these so output flavors stay data, not code
struct EmitDialect {
  std::string name;
  std::string source_extension;
  std::string header_extension;
  std::map<std::string, std::string> slots;
};

const EmitDialect& emit_dialect(const std::string& name);  // throws on unknown names
std::vector<std::string> emit_dialect_names();

struct EmittedKernel {
  std::string entry_symbol;
  std::string include_name;  // header file name referenced by the source
  std::string source_text;
  std::string header_text;
  std::string source_extension;
  std::string header_extension;
};

// standalone source for one plan on one normalized problem: header include,
// extent and stride constants, parallel blocked main nest, unrolled micro
// kernel, scalar remainder loops, optional prefetch and streaming hints
EmittedKernel emit_source(const NormalizedProblem& problem, const CandidatePlan& plan,
                          const EmitDialect& dialect, const std::string& basename = "");
EmittedKernel emit_source(const NormalizedProblem& problem, const CandidatePlan& plan,
                          const std::string& basename = "");

struct EmittedFiles {
  std::filesystem::path source;
  std::filesystem::path header;
};

// writes <base>.<src_ext> and <base>.<hdr_ext> next to each other
EmittedFiles write_kernel_files(const EmittedKernel& kernel, const std::filesystem::path& base);

}  // namespace ttune
