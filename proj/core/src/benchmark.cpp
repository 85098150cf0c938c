#include "ttune/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ttune/executor.hpp"

namespace ttune {

namespace {

std::uint64_t draw_below(std::mt19937_64& eng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = eng();
  while (v >= limit) v = eng();
  return v % n;
}

bool has_mergeable_pair(const std::vector<int>& perm) {
  for (std::size_t a = 0; a + 1 < perm.size(); ++a)
    if (perm[a + 1] == perm[a] + 1) return true;
  return false;
}

std::vector<int> reversal_perm(int d) {
  std::vector<int> p(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) p[static_cast<std::size_t>(i)] = d - i;
  return p;
}

bool is_identity_perm(const std::vector<int>& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (perm[i] != static_cast<int>(i) + 1) return false;
  return true;
}

std::vector<std::vector<int>> valid_perms(int d, bool stride1_keeping) {
  std::vector<int> p(static_cast<std::size_t>(d));
  std::iota(p.begin(), p.end(), 1);
  const std::vector<int> rev = reversal_perm(d);
  std::vector<std::vector<int>> out;
  do {
    if (has_mergeable_pair(p)) continue;
    if (stride1_keeping) {
      if (p[0] == 1 && !is_identity_perm(p)) out.push_back(p);
    } else {
      if (p[0] != 1 && p != rev) out.push_back(p);
    }
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

std::int64_t product(const std::vector<std::int64_t>& v) {
  std::int64_t n = 1;
  for (std::int64_t e : v) n *= e;
  return n;
}

double volume_deviation(const std::vector<std::int64_t>& sizes, std::int64_t target_elems) {
  return std::fabs(static_cast<double>(product(sizes)) / static_cast<double>(target_elems) - 1.0);
}

// all extents near the d-th root of the element count; the adjust axis soaks
// up the rounding error
std::vector<std::int64_t> shaped_sizes(int d, std::int64_t target_elems, int skew_axis) {
  const double scale = skew_axis < 0 ? 1.0 : 6.0;
  const double root = std::pow(static_cast<double>(target_elems) / scale, 1.0 / d);
  std::vector<std::int64_t> best;
  double best_dev = 1e300;
  for (int bump = 0; bump < 2; ++bump) {
    const std::int64_t s = std::max<std::int64_t>(2, static_cast<std::int64_t>(root) + bump);
    std::vector<std::int64_t> sizes(static_cast<std::size_t>(d), s);
    int adjust = d - 1;
    if (skew_axis >= 0) {
      sizes[static_cast<std::size_t>(skew_axis)] = 6 * s;
      if (adjust == skew_axis) adjust = d - 2;
    }
    std::int64_t rest = 1;
    for (int i = 0; i < d; ++i)
      if (i != adjust) rest *= sizes[static_cast<std::size_t>(i)];
    sizes[static_cast<std::size_t>(adjust)] = std::max<std::int64_t>(
        2, static_cast<std::int64_t>(std::llround(static_cast<double>(target_elems) /
                                                  static_cast<double>(rest))));
    const double dev = volume_deviation(sizes, target_elems);
    if (dev < best_dev) {
      best_dev = dev;
      best = sizes;
    }
  }
  return best;
}

std::string case_id(const std::vector<int>& perm, SizeConfig config) {
  std::ostringstream os;
  os << "d" << perm.size() << "_";
  for (int v : perm) os << v;
  os << "_" << size_config_name(config);
  return os.str();
}

std::string join(const std::vector<std::int64_t>& v, char sep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << sep;
    os << v[i];
  }
  return os.str();
}

std::string join_perm(const std::vector<int>& v, char sep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << sep;
    os << v[i];
  }
  return os.str();
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    out += ch;
    if (ch == '"') out += '"';
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string perm_category_name(PermCategory c) {
  switch (c) {
    case PermCategory::stride1:
      return "stride1";
    case PermCategory::inverse:
      return "inverse";
    default:
      return "general";
  }
}

std::string size_config_name(SizeConfig c) {
  switch (c) {
    case SizeConfig::balanced:
      return "balanced";
    case SizeConfig::skew_a:
      return "skewA";
    default:
      return "skewB";
  }
}

std::vector<BenchmarkCase> build_benchmark(std::int64_t volume_bytes, ElementKind kind,
                                           std::uint64_t seed) {
  if (volume_bytes < (1 << 20))
    throw std::invalid_argument("benchmark: volume must be at least 1 MiB");
  const std::int64_t target_elems = volume_bytes / element_bytes(kind);
  std::mt19937_64 eng(seed);

  std::vector<std::pair<std::vector<int>, PermCategory>> perms;
  perms.emplace_back(reversal_perm(2), PermCategory::inverse);
  for (int d = 3; d <= 6; ++d) {
    perms.emplace_back(reversal_perm(d), PermCategory::inverse);
    const auto keepers = valid_perms(d, true);
    perms.emplace_back(keepers[draw_below(eng, keepers.size())], PermCategory::stride1);
    const auto generals = valid_perms(d, false);
    const int want = d == 3 ? 1 : 3;
    std::vector<std::vector<int>> chosen;
    while (static_cast<int>(chosen.size()) < want) {
      const auto& pick = generals[draw_below(eng, generals.size())];
      if (std::find(chosen.begin(), chosen.end(), pick) == chosen.end()) chosen.push_back(pick);
    }
    for (auto& p : chosen) perms.emplace_back(std::move(p), PermCategory::general);
  }

  std::vector<BenchmarkCase> cases;
  for (const auto& [perm, category] : perms) {
    const int d = static_cast<int>(perm.size());
    std::vector<int> inv(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(a)] - 1)] = a;
    for (SizeConfig config : {SizeConfig::balanced, SizeConfig::skew_a, SizeConfig::skew_b}) {
      int skew_axis = -1;
      if (config == SizeConfig::skew_a) skew_axis = 0;
      if (config == SizeConfig::skew_b) skew_axis = inv[0];
      const auto sizes = shaped_sizes(d, target_elems, skew_axis);
      if (volume_deviation(sizes, target_elems) > 0.10)
        throw std::runtime_error("benchmark: volume too small for a ratio-6 shape at dimension " +
                                 std::to_string(d));
      BenchmarkCase item;
      item.id = case_id(perm, config);
      item.problem = make_problem(perm, sizes, kind, kind, 1.0, 1.0);
      item.category = category;
      item.config = config;
      cases.push_back(std::move(item));
    }
  }
  return cases;
}

std::vector<BenchmarkRow> run_benchmark(const std::vector<BenchmarkCase>& cases,
                                        const SearchConfig& search, const TimingProtocol& protocol,
                                        std::uint64_t seed) {
  std::vector<BenchmarkRow> rows;
  rows.reserve(cases.size());
  for (const auto& item : cases) {
    const NormalizedProblem norm = merge_indices(item.problem);
    const CandidateQueue queue = build_candidates(norm, search);
    const TuneResult tuned = tune(norm, queue, protocol, seed);
    const MeasurementRecord& winner = tuned.records[tuned.best];

    TensorBuffer a = make_buffer_a(norm.problem);
    TensorBuffer b = make_buffer_b(norm.problem);
    fill_buffer(a, seed);
    fill_buffer(b, seed ^ 0x9e3779b97f4a7c15ull);
    for (int i = 0; i < protocol.warmups; ++i)
      reference_transpose(norm.problem, a, b, protocol.threads);
    double best = 1e300;
    for (int i = 0; i < protocol.repetitions; ++i) {
      const auto t0 = std::chrono::steady_clock::now();
      reference_transpose(norm.problem, a, b, protocol.threads);
      const auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    best = std::max(best, 1e-9);

    BenchmarkRow row;
    row.item = item;
    row.ref_gibs = bandwidth_gibs(norm.problem, best);
    row.tuned_gibs = winner.bandwidth_gibs;
    row.speedup = row.tuned_gibs / row.ref_gibs;
    row.plan = winner.plan;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string benchmark_case_line(const BenchmarkCase& item) {
  const TransposeProblem& p = item.problem;
  std::ostringstream os;
  os << "case=" << item.id << ";perm=" << join_perm(p.perm.map, ',') << ";size="
     << join(p.sizes, ',') << ";kinds=" << kind_code(p.kind_a) << kind_code(p.kind_b)
     << ";alpha=" << format_double(p.alpha) << ";beta=" << format_double(p.beta)
     << ";category=" << perm_category_name(item.category)
     << ";config=" << size_config_name(item.config);
  return os.str();
}

void write_benchmark_manifest(std::ostream& os, const std::vector<BenchmarkCase>& cases) {
  for (const auto& item : cases) os << benchmark_case_line(item) << "\n";
}

void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows) {
  os << "caseId,dim,perm,sizes,category,config,refGiBs,tunedGiBs,speedup,plan\n";
  for (const auto& row : rows) {
    const TransposeProblem& p = row.item.problem;
    os << row.item.id << ',' << p.rank() << ',' << join_perm(p.perm.map, '-') << ','
       << join(p.sizes, 'x') << ',' << perm_category_name(row.item.category) << ','
       << size_config_name(row.item.config) << ',' << format_double(row.ref_gibs) << ','
       << format_double(row.tuned_gibs) << ',' << format_double(row.speedup) << ','
       << csv_quote(row.plan.serialize()) << "\n";
  }
}

}  // namespace ttune
