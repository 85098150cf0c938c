#include "ttune/search.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ttune {

std::string CandidatePlan::serialize() const {
  std::ostringstream os;
  os << "order=";
  for (std::size_t i = 0; i < loop_order.size(); ++i) {
    if (i) os << ',';
    os << loop_order[i];
  }
  os << ";bA=" << block_a << ";bB=" << block_b << ";d=" << prefetch_distance
     << ";ss=" << (streaming_stores ? 1 : 0) << ";w=" << micro_width;
  return os.str();
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::int64_t parse_int(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("plan: empty number");
  std::size_t used = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("plan: malformed number '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("plan: malformed number '" + s + "'");
  return v;
}

std::string expect_field(const std::string& field, const std::string& key) {
  const std::string prefix = key + "=";
  if (field.rfind(prefix, 0) != 0)
    throw std::invalid_argument("plan: expected field '" + key + "', got '" + field + "'");
  return field.substr(prefix.size());
}

}  // namespace

CandidatePlan CandidatePlan::parse(const std::string& text) {
  const auto fields = split(text, ';');
  if (fields.size() != 6) throw std::invalid_argument("plan: expected 6 fields");
  CandidatePlan plan;
  for (const auto& tok : split(expect_field(fields[0], "order"), ',')) {
    const std::int64_t v = parse_int(tok);
    if (v < 1 || v > 64) throw std::invalid_argument("plan: loop order entry out of range");
    plan.loop_order.push_back(static_cast<int>(v));
  }
  plan.block_a = parse_int(expect_field(fields[1], "bA"));
  plan.block_b = parse_int(expect_field(fields[2], "bB"));
  plan.prefetch_distance = static_cast<int>(parse_int(expect_field(fields[3], "d")));
  const std::int64_t ss = parse_int(expect_field(fields[4], "ss"));
  if (ss != 0 && ss != 1) throw std::invalid_argument("plan: ss must be 0 or 1");
  plan.streaming_stores = ss == 1;
  plan.micro_width = static_cast<int>(parse_int(expect_field(fields[5], "w")));
  if (plan.block_a < 1 || plan.block_b < 1 || plan.micro_width < 1 || plan.prefetch_distance < 0)
    throw std::invalid_argument("plan: field out of range");
  return plan;
}

int default_micro_width(ElementKind k) {
  switch (k) {
    case ElementKind::real32: return 8;
    case ElementKind::real64: return 4;
    case ElementKind::complex64: return 4;
    case ElementKind::complex128: return 2;
  }
  return 1;
}

int default_micro_width(ElementKind a, ElementKind b) {
  return std::min(default_micro_width(a), default_micro_width(b));
}

std::vector<std::pair<std::int64_t, std::int64_t>> enumerate_blockings(
    int w, const std::optional<std::vector<std::pair<std::int64_t, std::int64_t>>>& override) {
  if (w < 1) throw std::invalid_argument("micro width: must be >= 1");
  if (override) {
    if (override->empty()) throw std::invalid_argument("blockings: empty list");
    for (const auto& [a, b] : *override) {
      if (a < w || b < w || a % w != 0 || b % w != 0) {
        std::ostringstream os;
        os << "blockings: " << a << "x" << b << " is not a positive multiple of micro width "
           << w;
        throw std::invalid_argument(os.str());
      }
    }
    return *override;
  }
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j)
      out.emplace_back(std::int64_t{i} * w, std::int64_t{j} * w);
  return out;
}

namespace {

// extents whose tiling produces the remainders the blocking rank penalizes:
// the two blocked axes (stride-1 axes in the transposed case, the second
// indices when the stride-1 index is shared, the single extent for 1-D)
std::pair<std::int64_t, std::int64_t> blocked_extents(const TransposeProblem& p) {
  if (p.rank() == 1) return {p.sizes[0], p.sizes[0]};
  if (p.perm.preserves_stride1()) {
    const int b2 = p.perm.inverse().map[1] - 1;
    return {p.sizes[1], p.sizes[static_cast<std::size_t>(b2)]};
  }
  return {p.sizes[0], p.sizes[static_cast<std::size_t>(b_stride1_axis(p))]};
}

}  // namespace

std::vector<std::pair<std::int64_t, std::int64_t>> rank_blockings(
    const NormalizedProblem& problem, int w, std::int64_t cacheline_elements,
    std::vector<std::pair<std::int64_t, std::int64_t>> candidates) {
  if (w < 1) throw std::invalid_argument("micro width: must be >= 1");
  const std::int64_t cl = std::max<std::int64_t>(1, cacheline_elements);
  const auto [ext_a, ext_b] = blocked_extents(problem.problem);
  auto tier = [cl](const std::pair<std::int64_t, std::int64_t>& b) {
    return (b.first % cl == 0 && b.second % cl == 0) ? 0 : 1;
  };
  auto remainder = [&](const std::pair<std::int64_t, std::int64_t>& b) {
    return ext_a % b.first + ext_b % b.second;
  };
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](const auto& x, const auto& y) {
                     const int tx = tier(x), ty = tier(y);
                     if (tx != ty) return tx < ty;
                     return remainder(x) < remainder(y);
                   });
  return candidates;
}

double score_loop_order(const std::vector<int>& order, const TransposeProblem& problem) {
  const auto sa = element_strides_a(problem);
  const auto sb = element_strides_b_for_a(problem);
  double cost = 0.0;
  const std::size_t d = order.size();
  for (std::size_t p = 0; p < d; ++p) {
    const int axis = order[d - 1 - p] - 1;  // p counts from the innermost loop
    cost += std::ldexp(std::log2(1.0 + static_cast<double>(sa[static_cast<std::size_t>(axis)])) +
                           std::log2(1.0 + static_cast<double>(sb[static_cast<std::size_t>(axis)])),
                       -static_cast<int>(p));
  }
  return cost;
}

namespace {

struct OrderEntry {
  double score;
  std::vector<int> bseq;  // B positions, innermost first
  std::vector<int> order;

  bool operator<(const OrderEntry& o) const {
    if (score != o.score) return score < o.score;
    if (bseq != o.bseq) return bseq < o.bseq;
    return order < o.order;
  }
};

OrderEntry make_entry(const std::vector<int>& order, const TransposeProblem& p) {
  OrderEntry e;
  e.score = score_loop_order(order, p);
  e.order = order;
  const std::size_t d = order.size();
  e.bseq.resize(d);
  for (std::size_t i = 0; i < d; ++i)
    e.bseq[i] = p.perm.map[static_cast<std::size_t>(order[d - 1 - i] - 1)];
  return e;
}

}  // namespace

std::vector<std::vector<int>> enumerate_loop_orders(const NormalizedProblem& problem,
                                                    std::int64_t limit) {
  const TransposeProblem& p = problem.problem;
  const int d = p.rank();
  if (limit == 0) return {};
  if (d > 12) throw std::invalid_argument("loop orders: rank too large to enumerate");
  if (d > 10 && limit < 0)
    throw std::invalid_argument("loop orders: rank too large for exhaustive enumeration");
  std::vector<int> order(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i + 1;

  std::vector<OrderEntry> entries;
  if (limit < 0 || d <= 8) {
    do entries.push_back(make_entry(order, p));
    while (std::next_permutation(order.begin(), order.end()));
    std::sort(entries.begin(), entries.end());
    if (limit >= 0 && static_cast<std::int64_t>(entries.size()) > limit)
      entries.resize(static_cast<std::size_t>(limit));
  } else {
    // bounded worst-first heap over the full permutation stream
    auto worse = [](const OrderEntry& a, const OrderEntry& b) { return a < b; };
    do {
      OrderEntry e = make_entry(order, p);
      if (static_cast<std::int64_t>(entries.size()) < limit) {
        entries.push_back(std::move(e));
        std::push_heap(entries.begin(), entries.end(), worse);
      } else if (e < entries.front()) {
        std::pop_heap(entries.begin(), entries.end(), worse);
        entries.back() = std::move(e);
        std::push_heap(entries.begin(), entries.end(), worse);
      }
    } while (std::next_permutation(order.begin(), order.end()));
    std::sort_heap(entries.begin(), entries.end(), worse);
  }
  std::vector<std::vector<int>> out;
  out.reserve(entries.size());
  for (auto& e : entries) out.push_back(std::move(e.order));
  return out;
}

std::vector<int> enumerate_prefetch_distances(const std::optional<std::vector<int>>& override) {
  if (!override) return {0, 1, 2, 3, 4, 5, 6, 7, 8};
  if (override->empty()) throw std::invalid_argument("prefetchDistances: empty list");
  for (int d : *override)
    if (d < 0) throw std::invalid_argument("prefetchDistances: negative distance");
  return *override;
}

CandidateQueue build_candidates(const NormalizedProblem& problem, const SearchConfig& config) {
  const TransposeProblem& p = problem.problem;
  validate(p);
  const std::int64_t cap = config.max_implementations;
  if (cap == 0 || cap < -1)
    throw std::invalid_argument("maxImplementations: must be positive or -1");
  const int w = config.micro_width > 0 ? config.micro_width
                                       : default_micro_width(p.kind_a, p.kind_b);
  if (config.cacheline_bytes < 1) throw std::invalid_argument("cacheline: must be >= 1 byte");
  const std::int64_t cl_elems =
      std::max<std::int64_t>(1, config.cacheline_bytes / static_cast<std::int64_t>(element_bytes(p.kind_a)));

  const auto blockings = rank_blockings(problem, w, cl_elems, enumerate_blockings(w, config.blockings));
  const bool case1 = p.rank() == 1 || p.perm.preserves_stride1();
  const std::vector<int> distances =
      case1 ? std::vector<int>{0} : enumerate_prefetch_distances(config.prefetch_distances);
  const auto orders = enumerate_loop_orders(problem, cap);
  std::vector<bool> ss_options = {false};
  if (p.beta == 0.0 && config.allow_streaming_stores) ss_options.push_back(true);

  struct Ranked {
    CandidatePlan plan;
    std::int64_t cost, orank, brank, drank;
    bool ss;
  };
  std::vector<Ranked> all;
  all.reserve(orders.size() * blockings.size() * distances.size() * ss_options.size());
  for (std::size_t oi = 0; oi < orders.size(); ++oi)
    for (std::size_t bi = 0; bi < blockings.size(); ++bi)
      for (std::size_t di = 0; di < distances.size(); ++di)
        for (bool ss : ss_options) {
          Ranked r;
          r.plan.loop_order = orders[oi];
          r.plan.block_a = blockings[bi].first;
          r.plan.block_b = blockings[bi].second;
          r.plan.prefetch_distance = distances[di];
          r.plan.streaming_stores = ss;
          r.plan.micro_width = w;
          r.orank = static_cast<std::int64_t>(oi);
          r.brank = static_cast<std::int64_t>(bi);
          r.drank = static_cast<std::int64_t>(di);
          r.ss = ss;
          r.cost = r.orank + r.brank + r.drank;
          all.push_back(std::move(r));
        }
  std::sort(all.begin(), all.end(), [](const Ranked& x, const Ranked& y) {
    if (x.cost != y.cost) return x.cost < y.cost;
    if (x.orank != y.orank) return x.orank < y.orank;
    if (x.brank != y.brank) return x.brank < y.brank;
    if (x.drank != y.drank) return x.drank < y.drank;
    return x.ss < y.ss;
  });
  if (cap >= 0 && static_cast<std::int64_t>(all.size()) > cap)
    all.resize(static_cast<std::size_t>(cap));

  CandidateQueue q;
  q.capacity = cap;
  q.entries.reserve(all.size());
  for (auto& r : all) q.entries.push_back({std::move(r.plan), static_cast<double>(r.cost)});
  return q;
}

}  // namespace ttune
