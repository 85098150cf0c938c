#include <stdexcept>
#include <dlfcn.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "ttune/emit.hpp"
#include "ttune/executor.hpp"
#include "ttune/tuner.hpp"

using namespace ttune;

namespace {

std::filesystem::path work_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "ttune_test" / "emit";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), ("missing file: " + path.string()));
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool have(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

bool have_tool(const std::string& cmd) {
  return std::system((cmd + " --version > /dev/null 2>&1").c_str()) == 0;
}

// builds the emitted kernel as a shared object, loads it, and checks the
// output bytes against execute_plan on identically filled buffers
template <class TA, class TB, class TW>
void compile_and_check(const TransposeProblem& p, const CandidatePlan& plan,
                       const std::string& dialect_name, const std::string& tag) {
  const std::string compiler = dialect_name == "c-plain" ? "cc -std=c99" : "c++ -std=c++17";
  if (!have_tool(dialect_name == "c-plain" ? "cc" : "c++")) {
    MESSAGE(("compiler unavailable; skipping compile check " + tag));
    return;
  }
  const NormalizedProblem n = merge_indices(p);
  REQUIRE(n.problem.sizes == p.sizes);  // cases here must survive merging unchanged

  const EmittedKernel kernel = emit_source(n, plan, emit_dialect(dialect_name), tag);
  const auto dir = work_dir();
  const EmittedFiles files = write_kernel_files(kernel, dir / tag);
  const auto lib = dir / ("lib" + tag + ".so");
  std::ostringstream cmd;
  cmd << compiler << " -O2 -ffp-contract=off -fPIC -shared -I " << dir << " -o " << lib << " "
      << files.source << " 2> " << (dir / (tag + ".log"));
  REQUIRE_MESSAGE(std::system(cmd.str().c_str()) == 0,
                  ("compile failed: " + read_file(dir / (tag + ".log"))));

  void* handle = dlopen(lib.c_str(), RTLD_NOW);
  REQUIRE_MESSAGE(handle != nullptr, dlerror());
  using Fn = void (*)(const TA*, TB*, TW, TW);
  Fn fn = reinterpret_cast<Fn>(dlsym(handle, kernel.entry_symbol.c_str()));
  REQUIRE_MESSAGE(fn != nullptr, ("entry symbol not found: " + kernel.entry_symbol));

  TensorBuffer a = make_buffer_a(p);
  fill_buffer(a, 11);
  TensorBuffer b_exec = make_buffer_b(p);
  fill_buffer(b_exec, 29);
  TensorBuffer b_kern = b_exec;
  execute_plan(p, plan, a, b_exec, 1);
  fn(a.as<TA>(), b_kern.as<TB>(), static_cast<TW>(p.alpha), static_cast<TW>(p.beta));
  dlclose(handle);
  CHECK_MESSAGE(tsup::same_bytes(b_exec, b_kern), ("kernel bytes differ: " + tag));
}

}  // namespace

TEST_CASE("dialect registry") {
  const EmitDialect& omp = emit_dialect("c-omp");
  CHECK(omp.name == "c-omp");
  CHECK(omp.source_extension == "cpp");
  CHECK(omp.header_extension == "h");
  const EmitDialect& plain = emit_dialect("c-plain");
  CHECK(plain.source_extension == "c");
  CHECK(plain.slots.at("parallel_for").empty());
  CHECK(emit_dialect_names() == std::vector<std::string>{"c-omp", "c-plain"});
  CHECK_THROWS_WITH_AS((void)emit_dialect("fortran"), "emit: unknown dialect 'fortran'",
                       std::invalid_argument);
}

TEST_CASE("entry symbols name the problem") {
  const NormalizedProblem n = merge_indices(make_problem({2, 1}, {200, 200}));
  const EmittedKernel k = emit_source(n, {{2, 1}, 16, 16, 0, false, 8});
  CHECK(k.entry_symbol == "transpose_21_200x200_ss");
  CHECK(k.include_name == "transpose_21_200x200_ss.h");

  const NormalizedProblem m = merge_indices(
      make_problem({3, 2, 1}, {5, 6, 7}, ElementKind::real64, ElementKind::real64));
  CHECK(emit_source(m, {{1, 2, 3}, 4, 4, 0, false, 4}).entry_symbol ==
        "transpose_321_5x6x7_dd");

  std::vector<int> rev(10);
  for (int i = 0; i < 10; ++i) rev[static_cast<std::size_t>(i)] = 10 - i;
  const NormalizedProblem wide =
      merge_indices(make_problem(rev, std::vector<std::int64_t>(10, 2)));
  std::vector<int> order(10);
  for (int i = 0; i < 10; ++i) order[static_cast<std::size_t>(i)] = i + 1;
  const EmittedKernel wk = emit_source(wide, {order, 2, 2, 0, false, 2});
  CHECK(wk.entry_symbol == "transpose_10_9_8_7_6_5_4_3_2_1_2x2x2x2x2x2x2x2x2x2_ss");

  const NormalizedProblem named = merge_indices(make_problem({2, 1}, {8, 8}));
  const EmittedKernel bk = emit_source(named, {{2, 1}, 8, 8, 0, false, 8}, "mykernel");
  CHECK(bk.include_name == "mykernel.h");
  CHECK(have(bk.source_text, "#include \"mykernel.h\""));
  CHECK(have(bk.header_text, "#ifndef TTUNE_MYKERNEL_H"));
}

TEST_CASE("emitted text structure") {
  const NormalizedProblem n = merge_indices(
      make_problem({2, 1}, {50, 42}, ElementKind::real32, ElementKind::real64));
  const CandidatePlan plan{{2, 1}, 16, 8, 3, true, 4};
  const EmittedKernel k = emit_source(n, plan, "k");
  CHECK(have(k.header_text, "void transpose_21_50x42_sd(const float* A, double* B, double "
                            "alpha, double beta);"));
  CHECK(have(k.header_text, "extern \"C\""));
  CHECK(have(k.source_text, "plan: " + plan.serialize()));
  CHECK(have(k.source_text, "problem: " + canonical_key(n.problem)));
  CHECK(have(k.source_text, "__builtin_prefetch"));
  CHECK(have(k.source_text, "#pragma vector nontemporal"));
  CHECK(have(k.source_text, "#pragma omp parallel"));
  CHECK(have(k.source_text, "/* main loops */"));
  CHECK(have(k.source_text, "/* remainder loops */"));

  const CandidatePlan quiet{{2, 1}, 16, 8, 0, false, 4};
  const EmittedKernel q = emit_source(n, quiet, "k");
  CHECK(!have(q.source_text, "__builtin_prefetch"));
  CHECK(!have(q.source_text, "#pragma vector nontemporal"));

  const EmittedKernel plain = emit_source(n, quiet, emit_dialect("c-plain"), "k");
  CHECK(!have(plain.source_text, "#pragma omp"));
  CHECK(plain.source_extension == "c");
}

TEST_CASE("emit rejects invalid requests") {
  const NormalizedProblem n = merge_indices(make_problem({2, 1}, {16, 16}));
  CHECK_THROWS_WITH_AS((void)emit_source(n, {{1}, 8, 8, 0, false, 8}),
                       "emit: loop order does not cover the problem's indices",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS((void)emit_source(n, {{1, 2}, 0, 8, 0, false, 8}),
                       "emit: plan extents must be >= 1", std::invalid_argument);
  CHECK_THROWS_WITH_AS((void)emit_source(n, {{1, 2}, 8, 8, -2, false, 8}),
                       "emit: negative prefetch distance", std::invalid_argument);
  CHECK_THROWS_WITH_AS((void)emit_source(n, {{1, 2}, 12, 8, 0, false, 8}),
                       "emit: blocks must be multiples of the micro width",
                       std::invalid_argument);
  const NormalizedProblem c1 = merge_indices(make_problem({1, 3, 2}, {4, 5, 6}));
  CHECK_THROWS_WITH_AS((void)emit_source(c1, {{1, 2, 3}, 8, 8, 2, false, 8}),
                       "emit: prefetch distance requires a transposed stride-1 index",
                       std::invalid_argument);
  const NormalizedProblem nz = merge_indices(
      make_problem({2, 1}, {16, 16}, ElementKind::real32, ElementKind::real32, 1.0, 2.0));
  CHECK_THROWS_WITH_AS((void)emit_source(nz, {{1, 2}, 8, 8, 0, true, 8}),
                       "emit: streaming stores require beta == 0", std::invalid_argument);
}

TEST_CASE("kernel files land next to each other") {
  const NormalizedProblem n = merge_indices(make_problem({2, 1}, {8, 8}));
  const EmittedKernel k = emit_source(n, {{2, 1}, 8, 8, 0, false, 8}, "pair");
  const auto base = work_dir() / "nested" / "pair";
  const EmittedFiles files = write_kernel_files(k, base);
  CHECK(files.source == work_dir() / "nested" / "pair.cpp");
  CHECK(files.header == work_dir() / "nested" / "pair.h");
  CHECK(read_file(files.source) == k.source_text);
  CHECK(read_file(files.header) == k.header_text);
}

TEST_CASE("golden kernels stay stable") {
  const std::filesystem::path dir = TTUNE_GOLDEN_DIR;
  {
    const NormalizedProblem n = merge_indices(make_problem(
        {3, 2, 1}, {48, 7, 32}, ElementKind::real32, ElementKind::real32, 2.0, 1.0));
    const EmittedKernel k = emit_source(n, {{1, 2, 3}, 32, 16, 0, false, 8}, "g1");
    CHECK(k.source_text == read_file(dir / "g1.cpp"));
    CHECK(k.header_text == read_file(dir / "g1.h"));
  }
  {
    const NormalizedProblem n = merge_indices(
        make_problem({2, 1}, {17, 19}, ElementKind::real64, ElementKind::real64));
    const EmittedKernel k = emit_source(n, {{2, 1}, 8, 4, 5, true, 4}, "g2");
    CHECK(k.source_text == read_file(dir / "g2.cpp"));
    CHECK(k.header_text == read_file(dir / "g2.h"));
  }
  {
    const NormalizedProblem n = merge_indices(make_problem(
        {1, 3, 2}, {16, 7, 9}, ElementKind::real32, ElementKind::real32, 2.0, 1.0));
    const EmittedKernel k = emit_source(n, {{2, 3, 1}, 4, 4, 0, false, 8}, "g3");
    CHECK(k.source_text == read_file(dir / "g3.cpp"));
    CHECK(k.header_text == read_file(dir / "g3.h"));
  }
}

TEST_CASE("emitted kernels compute the same bytes as the executor") {
  compile_and_check<float, float, float>(
      make_problem({2, 1}, {41, 23}, ElementKind::real32, ElementKind::real32, 1.5, 0.0,
                   {44, 23}, {25, 41}),
      {{1, 2}, 16, 8, 3, true, 8}, "c-omp", "kss");
  compile_and_check<float, double, double>(
      make_problem({3, 1, 2}, {19, 5, 7}, ElementKind::real32, ElementKind::real64, 2.0, 3.0,
                   {19, 6, 7}, {}),
      {{3, 1, 2}, 8, 8, 1, false, 4}, "c-omp", "ksd");
  compile_and_check<double, float, double>(
      make_problem({2, 1}, {33, 12}, ElementKind::real64, ElementKind::real32, 0.5, 1.0),
      {{2, 1}, 8, 12, 0, false, 4}, "c-omp", "kds");
  compile_and_check<double, double, double>(
      make_problem({2, 1}, {21, 10}, ElementKind::complex128, ElementKind::complex128, 2.0,
                   1.5),
      {{1, 2}, 4, 4, 2, false, 2}, "c-omp", "kzz");
  compile_and_check<float, float, float>(
      make_problem({1, 3, 2}, {13, 6, 10}, ElementKind::real32, ElementKind::real32, 1.5, 0.5,
                   {14, 6, 10}, {13, 11, 6}),
      {{2, 3, 1}, 4, 8, 0, false, 8}, "c-omp", "kc1");
  compile_and_check<float, float, float>(
      make_problem({1}, {2311}, ElementKind::complex64, ElementKind::complex64, 2.0, 3.0),
      {{1}, 8, 8, 0, false, 4}, "c-omp", "k1d");
  compile_and_check<float, float, float>(
      make_problem({2, 1}, {26, 18}, ElementKind::real32, ElementKind::real32, 2.0, 0.0),
      {{1, 2}, 16, 16, 4, true, 8}, "c-plain", "kpl");
}
