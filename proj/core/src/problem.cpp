#include "ttune/problem.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace ttune {

std::size_t element_bytes(ElementKind k) {
  switch (k) {
    case ElementKind::real32: return 4;
    case ElementKind::real64: return 8;
    case ElementKind::complex64: return 8;
    case ElementKind::complex128: return 16;
  }
  return 0;
}

int element_components(ElementKind k) { return element_is_complex(k) ? 2 : 1; }

bool element_is_complex(ElementKind k) {
  return k == ElementKind::complex64 || k == ElementKind::complex128;
}

char kind_code(ElementKind k) {
  switch (k) {
    case ElementKind::real32: return 's';
    case ElementKind::real64: return 'd';
    case ElementKind::complex64: return 'c';
    case ElementKind::complex128: return 'z';
  }
  return '?';
}

std::optional<ElementKind> kind_from_code(char c) {
  switch (c) {
    case 's': return ElementKind::real32;
    case 'd': return ElementKind::real64;
    case 'c': return ElementKind::complex64;
    case 'z': return ElementKind::complex128;
    default: return std::nullopt;
  }
}

bool kind_pair_supported(ElementKind a, ElementKind b) {
  if (a == b) return true;
  auto mixed = [](ElementKind x, ElementKind y, ElementKind u, ElementKind v) {
    return (x == u && y == v) || (x == v && y == u);
  };
  return mixed(a, b, ElementKind::real32, ElementKind::real64) ||
         mixed(a, b, ElementKind::complex64, ElementKind::complex128);
}

bool Permutation::is_valid() const {
  const int n = rank();
  if (n == 0) return false;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int v : map) {
    if (v < 1 || v > n || seen[static_cast<std::size_t>(v - 1)]) return false;
    seen[static_cast<std::size_t>(v - 1)] = true;
  }
  return true;
}

bool Permutation::is_identity() const {
  for (int a = 0; a < rank(); ++a)
    if (map[static_cast<std::size_t>(a)] != a + 1) return false;
  return rank() > 0;
}

Permutation Permutation::inverse() const {
  Permutation inv;
  inv.map.resize(map.size());
  for (int a = 0; a < rank(); ++a)
    inv.map[static_cast<std::size_t>(map[static_cast<std::size_t>(a)] - 1)] = a + 1;
  return inv;
}

std::int64_t TransposeProblem::total_elements() const {
  std::int64_t n = 1;
  for (std::int64_t s : sizes) n *= s;
  return n;
}

TransposeProblem make_problem(std::vector<int> perm_map,
                              std::vector<std::int64_t> sizes,
                              ElementKind kind_a, ElementKind kind_b,
                              double alpha, double beta,
                              std::vector<std::int64_t> lda,
                              std::vector<std::int64_t> ldb) {
  TransposeProblem p;
  p.perm.map = std::move(perm_map);
  p.sizes = std::move(sizes);
  p.kind_a = kind_a;
  p.kind_b = kind_b;
  p.alpha = alpha;
  p.beta = beta;
  p.lda = lda.empty() ? p.sizes : std::move(lda);
  if (ldb.empty()) {
    if (p.perm.is_valid() && p.sizes.size() == p.perm.map.size()) p.ldb = sizes_b(p);
  } else {
    p.ldb = std::move(ldb);
  }
  return p;
}

const TransposeProblem& validate(const TransposeProblem& p) {
  const int n = p.rank();
  if (n < 1) throw std::invalid_argument("perm: empty permutation");
  if (!p.perm.is_valid()) {
    std::ostringstream os;
    os << "perm: not a permutation of 1.." << n;
    throw std::invalid_argument(os.str());
  }
  auto check_len = [n](const char* name, std::size_t got) {
    if (static_cast<int>(got) != n) {
      std::ostringstream os;
      os << name << ": expected " << n << " entries, got " << got;
      throw std::invalid_argument(os.str());
    }
  };
  check_len("sizes", p.sizes.size());
  check_len("lda", p.lda.size());
  check_len("ldb", p.ldb.size());
  for (int m = 0; m < n; ++m) {
    if (p.sizes[static_cast<std::size_t>(m)] < 1) {
      std::ostringstream os;
      os << "sizes[" << m + 1 << "] = " << p.sizes[static_cast<std::size_t>(m)] << " < 1";
      throw std::invalid_argument(os.str());
    }
    if (p.lda[static_cast<std::size_t>(m)] < p.sizes[static_cast<std::size_t>(m)]) {
      std::ostringstream os;
      os << "lda[" << m + 1 << "] = " << p.lda[static_cast<std::size_t>(m)]
         << " < size " << p.sizes[static_cast<std::size_t>(m)];
      throw std::invalid_argument(os.str());
    }
  }
  const auto sb = sizes_b(p);
  for (int k = 0; k < n; ++k) {
    if (p.ldb[static_cast<std::size_t>(k)] < sb[static_cast<std::size_t>(k)]) {
      std::ostringstream os;
      os << "ldb[" << k + 1 << "] = " << p.ldb[static_cast<std::size_t>(k)]
         << " < size " << sb[static_cast<std::size_t>(k)];
      throw std::invalid_argument(os.str());
    }
  }
  if (!kind_pair_supported(p.kind_a, p.kind_b)) {
    std::ostringstream os;
    os << "dataType: unsupported kind pair " << kind_code(p.kind_a) << kind_code(p.kind_b);
    throw std::invalid_argument(os.str());
  }
  std::int64_t vol = 1;
  for (int m = 0; m < n; ++m) {
    if (p.lda[static_cast<std::size_t>(m)] > (std::int64_t{1} << 62) / std::max<std::int64_t>(vol, 1))
      throw std::invalid_argument("sizes: volume overflow");
    vol *= p.lda[static_cast<std::size_t>(m)];
  }
  return p;
}

std::vector<std::int64_t> sizes_b(const TransposeProblem& p) {
  const auto inv = p.perm.inverse();
  std::vector<std::int64_t> sb(p.sizes.size());
  for (int k = 0; k < p.rank(); ++k)
    sb[static_cast<std::size_t>(k)] =
        p.sizes[static_cast<std::size_t>(inv.map[static_cast<std::size_t>(k)] - 1)];
  return sb;
}

std::vector<std::int64_t> element_strides_a(const TransposeProblem& p) {
  std::vector<std::int64_t> s(p.sizes.size());
  std::int64_t acc = 1;
  for (int m = 0; m < p.rank(); ++m) {
    s[static_cast<std::size_t>(m)] = acc;
    acc *= p.lda[static_cast<std::size_t>(m)];
  }
  return s;
}

std::vector<std::int64_t> element_strides_b(const TransposeProblem& p) {
  std::vector<std::int64_t> s(p.ldb.size());
  std::int64_t acc = 1;
  for (int k = 0; k < p.rank(); ++k) {
    s[static_cast<std::size_t>(k)] = acc;
    acc *= p.ldb[static_cast<std::size_t>(k)];
  }
  return s;
}

std::vector<std::int64_t> element_strides_b_for_a(const TransposeProblem& p) {
  const auto sb = element_strides_b(p);
  std::vector<std::int64_t> out(p.sizes.size());
  for (int a = 0; a < p.rank(); ++a)
    out[static_cast<std::size_t>(a)] =
        sb[static_cast<std::size_t>(p.perm.map[static_cast<std::size_t>(a)] - 1)];
  return out;
}

int b_stride1_axis(const TransposeProblem& p) {
  for (int a = 0; a < p.rank(); ++a)
    if (p.perm.map[static_cast<std::size_t>(a)] == 1) return a;
  return -1;
}

static std::int64_t required_elements(const std::vector<std::int64_t>& sizes,
                                      const std::vector<std::int64_t>& strides) {
  std::int64_t n = 1;
  for (std::size_t i = 0; i < sizes.size(); ++i) n += (sizes[i] - 1) * strides[i];
  return n;
}

std::int64_t required_elements_a(const TransposeProblem& p) {
  return required_elements(p.sizes, element_strides_a(p));
}

std::int64_t required_elements_b(const TransposeProblem& p) {
  return required_elements(sizes_b(p), element_strides_b(p));
}

template <class T>
static void join(std::ostringstream& os, const std::vector<T>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
}

std::string canonical_key(const TransposeProblem& p) {
  std::ostringstream os;
  os << "perm=";
  join(os, p.perm.map);
  os << ";size=";
  join(os, p.sizes);
  os << ";lda=";
  join(os, p.lda);
  os << ";ldb=";
  join(os, p.ldb);
  os << ";kinds=" << kind_code(p.kind_a) << kind_code(p.kind_b);
  os << ";beta=" << (p.beta == 0.0 ? "z" : "nz");
  return os.str();
}

namespace {

struct MergeState {
  std::vector<int> perm;  // 1-based B positions
  std::vector<std::int64_t> sizes, lda;
  std::vector<std::int64_t> ldb;  // B position order
  std::vector<int> range_lo, range_hi;

  int n() const { return static_cast<int>(perm.size()); }

  void erase_a(int a) {
    perm.erase(perm.begin() + a);
    sizes.erase(sizes.begin() + a);
    lda.erase(lda.begin() + a);
    range_lo.erase(range_lo.begin() + a);
    range_hi.erase(range_hi.begin() + a);
  }

  void erase_b(int k) {  // 1-based position
    ldb.erase(ldb.begin() + (k - 1));
    for (int& e : perm)
      if (e > k) --e;
  }
};

}  // namespace

NormalizedProblem merge_indices(const TransposeProblem& p) {
  validate(p);
  MergeState st;
  st.perm = p.perm.map;
  st.sizes = p.sizes;
  st.lda = p.lda;
  st.ldb = p.ldb;
  for (int a = 0; a < p.rank(); ++a) {
    st.range_lo.push_back(a + 1);
    st.range_hi.push_back(a + 1);
  }

  // drop size-1 indices whose pad (if any) can fold into a neighbor
  bool deleted = true;
  while (deleted && st.n() > 1) {
    deleted = false;
    for (int a = 0; a < st.n() && st.n() > 1; ++a) {
      if (st.sizes[static_cast<std::size_t>(a)] != 1) continue;
      const int k = st.perm[static_cast<std::size_t>(a)];
      if (a == 0 && st.lda[0] != 1) continue;
      if (k == 1 && st.ldb[0] != 1) continue;
      if (a > 0 && a < st.n() - 1)
        st.lda[static_cast<std::size_t>(a - 1)] *= st.lda[static_cast<std::size_t>(a)];
      if (k > 1 && k < st.n())
        st.ldb[static_cast<std::size_t>(k - 2)] *= st.ldb[static_cast<std::size_t>(k - 1)];
      if (a > 0)
        st.range_hi[static_cast<std::size_t>(a - 1)] = st.range_hi[static_cast<std::size_t>(a)];
      else
        st.range_lo[1] = st.range_lo[0];
      st.erase_a(a);
      st.erase_b(k);
      deleted = true;
      break;
    }
  }

  // fuse pairs adjacent in A and B and dense in both
  bool merged = true;
  while (merged) {
    merged = false;
    for (int a = 0; a + 1 < st.n();) {
      const int k = st.perm[static_cast<std::size_t>(a)];
      const std::int64_t sz = st.sizes[static_cast<std::size_t>(a)];
      if (st.perm[static_cast<std::size_t>(a + 1)] == k + 1 &&
          st.lda[static_cast<std::size_t>(a)] == sz &&
          st.ldb[static_cast<std::size_t>(k - 1)] == sz) {
        st.sizes[static_cast<std::size_t>(a)] *= st.sizes[static_cast<std::size_t>(a + 1)];
        st.lda[static_cast<std::size_t>(a)] *= st.lda[static_cast<std::size_t>(a + 1)];
        st.ldb[static_cast<std::size_t>(k - 1)] *= st.ldb[static_cast<std::size_t>(k)];
        st.range_hi[static_cast<std::size_t>(a)] = st.range_hi[static_cast<std::size_t>(a + 1)];
        st.erase_a(a + 1);
        st.erase_b(k + 1);
        merged = true;
      } else {
        ++a;
      }
    }
  }

  NormalizedProblem out;
  out.problem = p;
  out.problem.perm.map = st.perm;
  out.problem.sizes = st.sizes;
  out.problem.lda = st.lda;
  out.problem.ldb = st.ldb;
  for (int a = 0; a < st.n(); ++a)
    out.merge_trace.push_back({st.range_lo[static_cast<std::size_t>(a)],
                               st.range_hi[static_cast<std::size_t>(a)], a + 1});
  validate(out.problem);
  return out;
}

}  // namespace ttune
