#pragma once

#include <cstdint>
#include <cstring>
#include <random>
#include <type_traits>
#include <vector>

#include "ttune/executor.hpp"
#include "ttune/problem.hpp"

namespace tsup {

using namespace ttune;

// element walk straight from the definition: strides and offsets recomputed
// here, one multi-index odometer, nothing shared with the library's kernels
template <class SA, class SB>
inline void oracle_typed(const TransposeProblem& p, const SA* a, SB* b) {
  using W = std::conditional_t<sizeof(SA) == 8 || sizeof(SB) == 8, double, float>;
  const int d = p.rank();
  const int comps = element_components(p.kind_a);
  std::vector<std::int64_t> sa(static_cast<std::size_t>(d), 1);
  std::vector<std::int64_t> sb_pos(static_cast<std::size_t>(d), 1);
  for (int k = 1; k < d; ++k) {
    sa[static_cast<std::size_t>(k)] =
        sa[static_cast<std::size_t>(k - 1)] * p.lda[static_cast<std::size_t>(k - 1)];
    sb_pos[static_cast<std::size_t>(k)] =
        sb_pos[static_cast<std::size_t>(k - 1)] * p.ldb[static_cast<std::size_t>(k - 1)];
  }
  std::vector<std::int64_t> sb(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k)
    sb[static_cast<std::size_t>(k)] =
        sb_pos[static_cast<std::size_t>(p.perm.map[static_cast<std::size_t>(k)] - 1)];

  const W alpha = static_cast<W>(p.alpha);
  const W beta = static_cast<W>(p.beta);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    std::int64_t offa = 0, offb = 0;
    for (int k = 0; k < d; ++k) {
      offa += idx[static_cast<std::size_t>(k)] * sa[static_cast<std::size_t>(k)];
      offb += idx[static_cast<std::size_t>(k)] * sb[static_cast<std::size_t>(k)];
    }
    for (int q = 0; q < comps; ++q) {
      const W av = static_cast<W>(a[offa * comps + q]);
      SB* out = &b[offb * comps + q];
      if (p.beta == 0.0)
        *out = static_cast<SB>(alpha * av);
      else
        *out = static_cast<SB>(alpha * av + beta * static_cast<W>(*out));
    }
    int k = 0;
    while (k < d && ++idx[static_cast<std::size_t>(k)] == p.sizes[static_cast<std::size_t>(k)]) {
      idx[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == d) break;
  }
}

inline bool scalar_is_double(ElementKind k) {
  return k == ElementKind::real64 || k == ElementKind::complex128;
}

inline void oracle_transpose(const TransposeProblem& p, const TensorBuffer& a, TensorBuffer& b) {
  const bool da = scalar_is_double(p.kind_a), db = scalar_is_double(p.kind_b);
  if (!da && !db)
    oracle_typed<float, float>(p, a.as<float>(), b.as<float>());
  else if (!da && db)
    oracle_typed<float, double>(p, a.as<float>(), b.as<double>());
  else if (da && !db)
    oracle_typed<double, float>(p, a.as<double>(), b.as<float>());
  else
    oracle_typed<double, double>(p, a.as<double>(), b.as<double>());
}

// small positive integers, exactly representable in float
inline void fill_int(TensorBuffer& buf, std::uint64_t seed, int mod = 32) {
  const std::int64_t n = buf.scalars();
  const std::uint64_t phase = seed % 97;
  if (scalar_is_double(buf.kind())) {
    double* p = buf.as<double>();
    for (std::int64_t i = 0; i < n; ++i)
      p[i] = static_cast<double>((static_cast<std::uint64_t>(i) * 7919u + phase) % mod + 1);
  } else {
    float* p = buf.as<float>();
    for (std::int64_t i = 0; i < n; ++i)
      p[i] = static_cast<float>((static_cast<std::uint64_t>(i) * 7919u + phase) % mod + 1);
  }
}

inline bool same_bytes(const TensorBuffer& x, const TensorBuffer& y) {
  return x.kind() == y.kind() && x.elements() == y.elements() &&
         std::memcmp(x.data(), y.data(), x.bytes()) == 0;
}

struct Rng {
  std::mt19937_64 eng;

  explicit Rng(std::uint64_t seed) : eng(seed) {}

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = eng();
    while (v >= limit) v = eng();
    return v % n;
  }

  std::vector<int> perm(int d) {
    std::vector<int> p(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) p[static_cast<std::size_t>(i)] = i + 1;
    for (int i = d - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(below(static_cast<std::uint64_t>(i) + 1));
      std::swap(p[static_cast<std::size_t>(i)], p[j]);
    }
    return p;
  }
};

// random problem with optional size-1 indices and padded leading dimensions
inline TransposeProblem random_problem(Rng& rng, int max_rank, bool allow_padding,
                                       bool allow_ones, ElementKind kind_a, ElementKind kind_b,
                                       double alpha, double beta) {
  const int d = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_rank)));
  std::vector<std::int64_t> sizes(static_cast<std::size_t>(d));
  for (auto& s : sizes) s = static_cast<std::int64_t>(rng.below(allow_ones ? 5 : 4) + (allow_ones ? 1 : 2));
  std::vector<std::int64_t> lda(sizes), ldb;
  std::vector<int> perm = rng.perm(d);
  std::vector<std::int64_t> sizes_b(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a)
    sizes_b[static_cast<std::size_t>(perm[static_cast<std::size_t>(a)] - 1)] =
        sizes[static_cast<std::size_t>(a)];
  ldb = sizes_b;
  if (allow_padding) {
    for (auto& v : lda)
      if (rng.below(3) == 0) v += static_cast<std::int64_t>(rng.below(3) + 1);
    for (auto& v : ldb)
      if (rng.below(3) == 0) v += static_cast<std::int64_t>(rng.below(3) + 1);
  }
  return make_problem(perm, sizes, kind_a, kind_b, alpha, beta, lda, ldb);
}

}  // namespace tsup
