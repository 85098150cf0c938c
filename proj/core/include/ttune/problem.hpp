#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ttune {

enum class ElementKind { real32, real64, complex64, complex128 };

std::size_t element_bytes(ElementKind k);
int element_components(ElementKind k);
bool element_is_complex(ElementKind k);
char kind_code(ElementKind k);
std::optional<ElementKind> kind_from_code(char c);

// both sides real or both complex, equal or adjacent precision (s<->d, c<->z)
bool kind_pair_supported(ElementKind a, ElementKind b);

// map[a] is the 1-based output position of input index a+1: B's map[a]-th
// index is A's (a+1)-th index
struct Permutation {
  std::vector<int> map;

  int rank() const { return static_cast<int>(map.size()); }
  bool is_valid() const;
  bool is_identity() const;
  // true when the stride-1 index of A stays the stride-1 index of B
  bool preserves_stride1() const { return !map.empty() && map[0] == 1; }
  Permutation inverse() const;

  bool operator==(const Permutation&) const = default;
};

struct TransposeProblem {
  Permutation perm;
  std::vector<std::int64_t> sizes;  // extents, A index order
  std::vector<std::int64_t> lda;    // per-index leading dimensions of A
  std::vector<std::int64_t> ldb;    // per-index leading dimensions of B, B index order
  double alpha = 1.0;
  double beta = 0.0;
  ElementKind kind_a = ElementKind::real32;
  ElementKind kind_b = ElementKind::real32;

  int rank() const { return perm.rank(); }
  std::int64_t total_elements() const;
};

// dense problem; lda/ldb may be overridden with padded values
TransposeProblem make_problem(std::vector<int> perm_map,
                              std::vector<std::int64_t> sizes,
                              ElementKind kind_a = ElementKind::real32,
                              ElementKind kind_b = ElementKind::real32,
                              double alpha = 1.0, double beta = 0.0,
                              std::vector<std::int64_t> lda = {},
                              std::vector<std::int64_t> ldb = {});

// throws std::invalid_argument naming the offending field
const TransposeProblem& validate(const TransposeProblem& p);

// extents of B's indices, B index order
std::vector<std::int64_t> sizes_b(const TransposeProblem& p);

// element strides of A's indices (stride of index 1 is 1)
std::vector<std::int64_t> element_strides_a(const TransposeProblem& p);

// element strides of B's indices, B index order
std::vector<std::int64_t> element_strides_b(const TransposeProblem& p);

// stride each A index induces in B: element_strides_b permuted to A order
std::vector<std::int64_t> element_strides_b_for_a(const TransposeProblem& p);

// 0-based A index that lands in B's first (stride-1) position
int b_stride1_axis(const TransposeProblem& p);

// elements a buffer must hold: 1 + sum (size_k - 1) * stride_k
std::int64_t required_elements_a(const TransposeProblem& p);
std::int64_t required_elements_b(const TransposeProblem& p);

// stable identity of the normalized problem for cache lookups, e.g.
// "perm=2,1;size=4,4;lda=4,4;ldb=4,4;kinds=ss;beta=nz"
std::string canonical_key(const TransposeProblem& p);

// contiguous run of original 1-based A indices folded into merged index `to`
struct MergeRecord {
  int from_first = 0;
  int from_last = 0;
  int to = 0;

  bool operator==(const MergeRecord&) const = default;
};

struct NormalizedProblem {
  TransposeProblem problem;
  std::vector<MergeRecord> merge_trace;  // one record per merged index
};

// drops size-1 indices, fuses adjacent index pairs that are adjacent in both
// tensors and dense in both, repeats to a fixpoint
NormalizedProblem merge_indices(const TransposeProblem& p);

}  // namespace ttune
