#include <stdexcept>
#include <string>

#include "doctest.h"
#include "support.hpp"
#include "ttune/problem.hpp"

using namespace ttune;

TEST_CASE("element kind helpers") {
  CHECK(element_bytes(ElementKind::real32) == 4);
  CHECK(element_bytes(ElementKind::real64) == 8);
  CHECK(element_bytes(ElementKind::complex64) == 8);
  CHECK(element_bytes(ElementKind::complex128) == 16);
  CHECK(element_components(ElementKind::real32) == 1);
  CHECK(element_components(ElementKind::complex128) == 2);
  CHECK(!element_is_complex(ElementKind::real64));
  CHECK(element_is_complex(ElementKind::complex64));
  CHECK(kind_code(ElementKind::real32) == 's');
  CHECK(kind_code(ElementKind::real64) == 'd');
  CHECK(kind_code(ElementKind::complex64) == 'c');
  CHECK(kind_code(ElementKind::complex128) == 'z');
  CHECK(kind_from_code('d') == ElementKind::real64);
  CHECK(!kind_from_code('q').has_value());
  CHECK(kind_pair_supported(ElementKind::real32, ElementKind::real64));
  CHECK(kind_pair_supported(ElementKind::complex128, ElementKind::complex64));
  CHECK(!kind_pair_supported(ElementKind::real64, ElementKind::complex128));
}

TEST_CASE("permutation basics") {
  Permutation p{{3, 1, 2}};
  CHECK(p.is_valid());
  CHECK(!p.is_identity());
  CHECK(!p.preserves_stride1());
  CHECK(Permutation{{1, 3, 2}}.preserves_stride1());
  CHECK(p.inverse() == Permutation{{2, 3, 1}});
  CHECK(!Permutation{{1, 1, 2}}.is_valid());
  CHECK(!Permutation{{0, 1, 2}}.is_valid());
  CHECK(Permutation{{1, 2, 3}}.is_identity());
}

TEST_CASE("problem construction and geometry") {
  const TransposeProblem p = make_problem({3, 1, 2}, {4, 5, 6});
  CHECK(p.lda == std::vector<std::int64_t>{4, 5, 6});
  CHECK(p.ldb == std::vector<std::int64_t>{5, 6, 4});
  CHECK(p.total_elements() == 120);
  CHECK(sizes_b(p) == std::vector<std::int64_t>{5, 6, 4});
  CHECK(element_strides_a(p) == std::vector<std::int64_t>{1, 4, 20});
  CHECK(element_strides_b(p) == std::vector<std::int64_t>{1, 5, 30});
  CHECK(element_strides_b_for_a(p) == std::vector<std::int64_t>{30, 1, 5});
  CHECK(b_stride1_axis(p) == 1);
  CHECK(required_elements_a(p) == 120);
  CHECK(required_elements_b(p) == 120);
}

TEST_CASE("padded buffers need the padded extent") {
  const TransposeProblem p =
      make_problem({2, 1}, {4, 6}, ElementKind::real32, ElementKind::real32, 1.0, 0.0, {5, 6},
                   {8, 4});
  CHECK(element_strides_a(p) == std::vector<std::int64_t>{1, 5});
  CHECK(element_strides_b(p) == std::vector<std::int64_t>{1, 8});
  CHECK(required_elements_a(p) == 1 + 3 * 1 + 5 * 5);
  CHECK(required_elements_b(p) == 1 + 5 * 1 + 3 * 8);
}

TEST_CASE("validation rejects malformed problems") {
  CHECK_THROWS_AS((void)validate(make_problem({1, 1}, {2, 2})), std::invalid_argument);
  CHECK_THROWS_AS((void)validate(make_problem({2, 1}, {2})), std::invalid_argument);
  CHECK_THROWS_AS((void)validate(make_problem({2, 1}, {2, 0})), std::invalid_argument);
  CHECK_THROWS_AS((void)validate(make_problem({2, 1}, {4, 4}, ElementKind::real32,
                                              ElementKind::real32, 1.0, 0.0, {3, 4})),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)validate(make_problem({2, 1}, {4, 4}, ElementKind::real64,
                                              ElementKind::complex128)),
                  std::invalid_argument);
  try {
    (void)validate(make_problem({2, 1}, {4, 4}, ElementKind::real32, ElementKind::real32, 1.0,
                                0.0, {4, 4}, {4, 3}));
    CHECK(false);
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("ldb") != std::string::npos);
  }
}

TEST_CASE("canonical key format") {
  const TransposeProblem p = make_problem({2, 1}, {4, 4});
  CHECK(canonical_key(p) == "perm=2,1;size=4,4;lda=4,4;ldb=4,4;kinds=ss;beta=z");
  const TransposeProblem q =
      make_problem({2, 1}, {4, 4}, ElementKind::real32, ElementKind::real64, 1.0, 0.5);
  CHECK(canonical_key(q) == "perm=2,1;size=4,4;lda=4,4;ldb=4,4;kinds=sd;beta=nz");
}

TEST_CASE("merge fuses pairs adjacent and dense in both tensors") {
  const NormalizedProblem n = merge_indices(make_problem({3, 1, 2}, {4, 5, 6}));
  CHECK(n.problem.perm.map == std::vector<int>{2, 1});
  CHECK(n.problem.sizes == std::vector<std::int64_t>{4, 30});
  CHECK(n.problem.lda == std::vector<std::int64_t>{4, 30});
  CHECK(n.problem.ldb == std::vector<std::int64_t>{30, 4});
  REQUIRE(n.merge_trace.size() == 2);
  CHECK(n.merge_trace[0] == MergeRecord{1, 1, 1});
  CHECK(n.merge_trace[1] == MergeRecord{2, 3, 2});
}

TEST_CASE("merge collapses the identity to one index") {
  const NormalizedProblem n = merge_indices(make_problem({1, 2, 3}, {3, 4, 5}));
  CHECK(n.problem.rank() == 1);
  CHECK(n.problem.sizes == std::vector<std::int64_t>{60});
  CHECK(n.merge_trace == std::vector<MergeRecord>{{1, 3, 1}});
}

TEST_CASE("padding blocks merging") {
  const TransposeProblem p = make_problem({1, 2}, {3, 4}, ElementKind::real32,
                                          ElementKind::real32, 1.0, 0.0, {4, 4}, {3, 4});
  const NormalizedProblem n = merge_indices(p);
  CHECK(n.problem.rank() == 2);
  const TransposeProblem q = make_problem({1, 2}, {3, 4}, ElementKind::real32,
                                          ElementKind::real32, 1.0, 0.0, {3, 4}, {4, 4});
  CHECK(merge_indices(q).problem.rank() == 2);
}

TEST_CASE("size-1 indices are dropped") {
  SUBCASE("interior") {
    const NormalizedProblem n = merge_indices(make_problem({1, 2, 3}, {3, 1, 4}));
    CHECK(n.problem.rank() == 1);
    CHECK(n.problem.sizes == std::vector<std::int64_t>{12});
  }
  SUBCASE("leading") {
    const NormalizedProblem n = merge_indices(make_problem({1, 2}, {1, 5}));
    CHECK(n.problem.rank() == 1);
    CHECK(n.problem.sizes == std::vector<std::int64_t>{5});
  }
  SUBCASE("trailing") {
    const NormalizedProblem n = merge_indices(make_problem({2, 1, 3}, {3, 4, 1}));
    CHECK(n.problem.rank() == 2);
    CHECK(n.problem.sizes == std::vector<std::int64_t>{3, 4});
  }
  SUBCASE("all ones leave a single index") {
    const NormalizedProblem n = merge_indices(make_problem({2, 1, 3}, {1, 1, 1}));
    CHECK(n.problem.rank() == 1);
    CHECK(n.problem.sizes == std::vector<std::int64_t>{1});
  }
  SUBCASE("padded leading size-1 stays") {
    const TransposeProblem p = make_problem({1, 2}, {1, 5}, ElementKind::real32,
                                            ElementKind::real32, 1.0, 0.0, {2, 5}, {1, 5});
    CHECK(merge_indices(p).problem.rank() == 2);
  }
}

TEST_CASE("merged problems admit no further merge") {
  tsup::Rng rng(2024);
  for (int t = 0; t < 200; ++t) {
    const TransposeProblem p = tsup::random_problem(rng, 5, true, true, ElementKind::real32,
                                                    ElementKind::real32, 2.0, 3.0);
    const NormalizedProblem once = merge_indices(p);
    const NormalizedProblem twice = merge_indices(once.problem);
    CHECK(twice.problem.perm == once.problem.perm);
    CHECK(twice.problem.sizes == once.problem.sizes);
    CHECK(twice.problem.lda == once.problem.lda);
    CHECK(twice.problem.ldb == once.problem.ldb);
  }
}

TEST_CASE("merge trace covers the original indices in order") {
  tsup::Rng rng(77);
  for (int t = 0; t < 100; ++t) {
    const TransposeProblem p = tsup::random_problem(rng, 6, true, true, ElementKind::real32,
                                                    ElementKind::real32, 1.0, 0.0);
    const NormalizedProblem n = merge_indices(p);
    REQUIRE(n.merge_trace.size() == static_cast<std::size_t>(n.problem.rank()));
    CHECK(n.merge_trace.front().from_first == 1);
    CHECK(n.merge_trace.back().from_last == p.rank());
    for (std::size_t i = 0; i < n.merge_trace.size(); ++i) {
      CHECK(n.merge_trace[i].to == static_cast<int>(i) + 1);
      CHECK(n.merge_trace[i].from_first <= n.merge_trace[i].from_last);
      if (i) CHECK(n.merge_trace[i].from_first == n.merge_trace[i - 1].from_last + 1);
    }
  }
}
