#include "ttune/executor.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>
#include <vector>

namespace ttune {

TensorBuffer::TensorBuffer(ElementKind kind, std::int64_t elements)
    : kind_(kind), elements_(elements) {
  if (elements < 0) throw std::invalid_argument("buffer: negative element count");
  const std::size_t bytes = static_cast<std::size_t>(elements) * element_bytes(kind);
  storage_.assign((bytes + sizeof(double) - 1) / sizeof(double), 0.0);
}

TensorBuffer make_buffer_a(const TransposeProblem& p) {
  return TensorBuffer(p.kind_a, required_elements_a(p));
}

TensorBuffer make_buffer_b(const TransposeProblem& p) {
  return TensorBuffer(p.kind_b, required_elements_b(p));
}

std::int64_t prefetch_target(std::int64_t i, std::int64_t j, int d, std::int64_t n) {
  return i + (j + d) / n;
}

namespace {

struct NestAxis {
  int axis = 0;  // 0-based A index
  std::int64_t extent = 0, step = 0, tiles = 0, sa = 0, sb = 0;
};

struct Traversal {
  std::vector<NestAxis> axes;  // outermost first
  std::int64_t total = 1;

  void add(int axis, std::int64_t extent, std::int64_t step, std::int64_t sa, std::int64_t sb) {
    NestAxis ax;
    ax.axis = axis;
    ax.extent = extent;
    ax.step = std::max<std::int64_t>(1, std::min(step, extent));
    ax.tiles = (extent + ax.step - 1) / ax.step;
    ax.sa = sa;
    ax.sb = sb;
    axes.push_back(ax);
    total *= ax.tiles;
  }
};

struct Cursor {
  const Traversal* tv = nullptr;
  std::vector<std::int64_t> tile;
  std::int64_t offa = 0, offb = 0;

  explicit Cursor(const Traversal& t) : tv(&t), tile(t.axes.size(), 0) {}

  void seek(std::int64_t flat) {
    offa = offb = 0;
    for (int k = static_cast<int>(tv->axes.size()) - 1; k >= 0; --k) {
      const NestAxis& ax = tv->axes[static_cast<std::size_t>(k)];
      tile[static_cast<std::size_t>(k)] = flat % ax.tiles;
      flat /= ax.tiles;
      const std::int64_t pos = tile[static_cast<std::size_t>(k)] * ax.step;
      offa += pos * ax.sa;
      offb += pos * ax.sb;
    }
  }

  void advance() {
    for (int k = static_cast<int>(tv->axes.size()) - 1; k >= 0; --k) {
      const NestAxis& ax = tv->axes[static_cast<std::size_t>(k)];
      std::int64_t& t = tile[static_cast<std::size_t>(k)];
      ++t;
      offa += ax.step * ax.sa;
      offb += ax.step * ax.sb;
      if (t < ax.tiles) return;
      t = 0;
      offa -= ax.tiles * ax.step * ax.sa;
      offb -= ax.tiles * ax.step * ax.sb;
    }
  }

  std::int64_t pos_of(int slot) const {
    return tile[static_cast<std::size_t>(slot)] * tv->axes[static_cast<std::size_t>(slot)].step;
  }
};

template <class Fn>
void parallel_ranges(std::int64_t total, int threads, Fn&& fn) {
  const std::int64_t n =
      std::min<std::int64_t>(std::max(threads, 1), std::max<std::int64_t>(total, 1));
  if (n <= 1) {
    fn(std::int64_t{0}, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n - 1));
  for (std::int64_t t = 1; t < n; ++t)
    pool.emplace_back([&fn, t, n, total] { fn(total * t / n, total * (t + 1) / n); });
  fn(std::int64_t{0}, total / n);
  for (auto& th : pool) th.join();
}

template <bool B0, class SA, class SB>
inline void copy_span(const SA* src, SB* dst, std::int64_t n, detail::compute_t<SA, SB> al,
                      detail::compute_t<SA, SB> be) {
  for (std::int64_t i = 0; i < n; ++i) detail::assign<B0>(src + i, dst + i, al, be);
}

template <bool B0, class SA, class SB>
inline void assign_elem(const SA* a, SB* b, detail::compute_t<SA, SB> al,
                        detail::compute_t<SA, SB> be, int C) {
  for (int q = 0; q < C; ++q) detail::assign<B0>(a + q, b + q, al, be);
}

template <bool B0, class SA, class SB>
inline void micro_kernel(int w, const SA* src, std::ptrdiff_t ss, SB* dst, std::ptrdiff_t ds,
                         detail::compute_t<SA, SB> al, detail::compute_t<SA, SB> be, int C) {
  if (w >= 2 && w <= 32 && (w & (w - 1)) == 0 && w * w * C <= 2048)
    detail::micro_tile_staged<B0>(w, src, ss, dst, ds, al, be, C);
  else
    detail::micro_tile_scalar<B0>(w, src, ss, dst, ds, al, be, C);
}

struct Geometry {
  std::vector<std::int64_t> sa, sb;  // element strides per A axis
  int a2 = -1;                       // axis blocked by block_a
  int b2 = -1;                       // axis blocked by block_b
  bool case1 = false;
  Traversal tv;
};

Geometry build_geometry(const TransposeProblem& p, const CandidatePlan& plan) {
  Geometry g;
  g.sa = element_strides_a(p);
  g.sb = element_strides_b_for_a(p);
  g.case1 = p.perm.preserves_stride1();
  if (g.case1) {
    if (p.rank() >= 2) {
      g.a2 = 1;
      g.b2 = p.perm.inverse().map[1] - 1;
    }
  } else {
    g.a2 = 0;
    g.b2 = b_stride1_axis(p);
  }
  for (int id : plan.loop_order) {
    const int axis = id - 1;
    if (g.case1 && axis == 0) continue;  // consumed by the copy kernel
    std::int64_t step = 1;
    if (axis == g.a2)
      step = plan.block_a;
    else if (axis == g.b2)
      step = plan.block_b;
    g.tv.add(axis, p.sizes[static_cast<std::size_t>(axis)], step,
             g.sa[static_cast<std::size_t>(axis)], g.sb[static_cast<std::size_t>(axis)]);
  }
  return g;
}

template <bool B0, class SA, class SB>
void run_copy_1d(const TransposeProblem& p, const SA* A, SB* B, int threads, int C,
                 detail::compute_t<SA, SB> al, detail::compute_t<SA, SB> be) {
  parallel_ranges(p.sizes[0], threads, [&](std::int64_t lo, std::int64_t hi) {
    copy_span<B0>(A + lo * C, B + lo * C, (hi - lo) * C, al, be);
  });
}

template <bool B0, class SA, class SB>
void run_case1(const TransposeProblem& p, const CandidatePlan& plan, const SA* A, SB* B,
               int threads, int C, detail::compute_t<SA, SB> al, detail::compute_t<SA, SB> be) {
  const Geometry g = build_geometry(p, plan);
  const std::int64_t n1 = p.sizes[0] * C;
  const std::int64_t extent_a2 = p.sizes[static_cast<std::size_t>(g.a2)];
  const std::int64_t extent_b2 = p.sizes[static_cast<std::size_t>(g.b2)];
  const std::int64_t ba = std::max<std::int64_t>(1, std::min(plan.block_a, extent_a2));
  const std::int64_t bb = std::max<std::int64_t>(1, std::min(plan.block_b, extent_b2));
  const bool shared = g.a2 == g.b2;
  int slot_a2 = -1, slot_b2 = -1;
  for (std::size_t k = 0; k < g.tv.axes.size(); ++k) {
    if (g.tv.axes[k].axis == g.a2) slot_a2 = static_cast<int>(k);
    if (g.tv.axes[k].axis == g.b2) slot_b2 = static_cast<int>(k);
  }
  const std::int64_t sa2 = g.sa[static_cast<std::size_t>(g.a2)] * C;
  const std::int64_t sb2 = g.sb[static_cast<std::size_t>(g.a2)] * C;
  const std::int64_t sa_y = g.sa[static_cast<std::size_t>(g.b2)] * C;
  const std::int64_t sb_y = g.sb[static_cast<std::size_t>(g.b2)] * C;

  parallel_ranges(g.tv.total, threads, [&](std::int64_t lo, std::int64_t hi) {
    Cursor cur(g.tv);
    cur.seek(lo);
    for (std::int64_t t = lo; t < hi; ++t) {
      const std::int64_t rem_a = std::min(ba, extent_a2 - cur.pos_of(slot_a2));
      const SA* abase = A + cur.offa * C;
      SB* bbase = B + cur.offb * C;
      if (shared) {
        for (std::int64_t x = 0; x < rem_a; ++x)
          copy_span<B0>(abase + x * sa2, bbase + x * sb2, n1, al, be);
      } else {
        const std::int64_t rem_b = std::min(bb, extent_b2 - cur.pos_of(slot_b2));
        for (std::int64_t x = 0; x < rem_a; ++x)
          for (std::int64_t y = 0; y < rem_b; ++y)
            copy_span<B0>(abase + x * sa2 + y * sa_y, bbase + x * sb2 + y * sb_y, n1, al, be);
      }
      cur.advance();
    }
  });
}

template <bool B0, class SA, class SB>
void run_case2(const TransposeProblem& p, const CandidatePlan& plan, const SA* A, SB* B,
               int threads, int C, detail::compute_t<SA, SB> al, detail::compute_t<SA, SB> be) {
  const Geometry g = build_geometry(p, plan);
  const int w = std::max(plan.micro_width, 1);
  const std::int64_t extent_a = p.sizes[0];
  const std::int64_t extent_b = p.sizes[static_cast<std::size_t>(g.b2)];
  const std::int64_t ba = std::max<std::int64_t>(1, std::min(plan.block_a, extent_a));
  const std::int64_t bb = std::max<std::int64_t>(1, std::min(plan.block_b, extent_b));
  int slot_a = -1, slot_b = -1;
  for (std::size_t k = 0; k < g.tv.axes.size(); ++k) {
    if (g.tv.axes[k].axis == 0) slot_a = static_cast<int>(k);
    if (g.tv.axes[k].axis == g.b2) slot_b = static_cast<int>(k);
  }
  const std::int64_t sab = g.sa[static_cast<std::size_t>(g.b2)];  // A stride of B's stride-1 axis
  const std::int64_t sba = g.sb[0];                               // B stride of A's stride-1 axis
  const std::int64_t nv = std::max<std::int64_t>(1, plan.block_b / w);
  const std::int64_t n_micro = std::max<std::int64_t>(1, plan.micro_tiles_per_macro());
  const int d = plan.prefetch_distance;

  parallel_ranges(g.tv.total, threads, [&](std::int64_t lo, std::int64_t hi) {
    Cursor cur(g.tv);
    cur.seek(lo);
    Cursor pf(g.tv);
    std::int64_t pf_flat = -1;
    for (std::int64_t t = lo; t < hi; ++t) {
      const std::int64_t rem_a = std::min(ba, extent_a - cur.pos_of(slot_a));
      const std::int64_t rem_b = std::min(bb, extent_b - cur.pos_of(slot_b));
      const std::int64_t ua = rem_a / w;
      const std::int64_t vb = rem_b / w;
      const SA* abase = A + cur.offa * C;
      SB* bbase = B + cur.offb * C;
      for (std::int64_t u = 0; u < ua; ++u) {
        for (std::int64_t v = 0; v < vb; ++v) {
          if (d > 0) {
            const std::int64_t target = prefetch_target(t, u * nv + v, d, n_micro);
            if (target != t && target < hi) {
              if (target != pf_flat) {
                pf.seek(target);
                pf_flat = target;
              }
              const std::int64_t trem_a = std::min(ba, extent_a - pf.pos_of(slot_a));
              const std::int64_t trem_b = std::min(bb, extent_b - pf.pos_of(slot_b));
              if (u * w < trem_a && v * w < trem_b) {
                const std::int64_t rows_a = std::min<std::int64_t>(w, trem_b - v * w);
                const SA* pa = A + (pf.offa + u * w + v * w * sab) * C;
                for (std::int64_t r = 0; r < rows_a; ++r) __builtin_prefetch(pa + r * sab * C, 0);
                const std::int64_t rows_b = std::min<std::int64_t>(w, trem_a - u * w);
                const SB* pb = B + (pf.offb + u * w * sba + v * w) * C;
                for (std::int64_t r = 0; r < rows_b; ++r) __builtin_prefetch(pb + r * sba * C, 1);
              }
            }
          }
          const SA* src = abase + (u * w + v * w * sab) * C;
          SB* dst = bbase + (u * w * sba + v * w) * C;
          micro_kernel<B0>(w, src, sab * C, dst, sba * C, al, be, C);
        }
      }
      // scalar edges, inner loop contiguous in B
      for (std::int64_t x = ua * w; x < rem_a; ++x)
        for (std::int64_t y = 0; y < rem_b; ++y)
          assign_elem<B0>(abase + (x + y * sab) * C, bbase + (x * sba + y) * C, al, be, C);
      for (std::int64_t x = 0; x < ua * w; ++x)
        for (std::int64_t y = vb * w; y < rem_b; ++y)
          assign_elem<B0>(abase + (x + y * sab) * C, bbase + (x * sba + y) * C, al, be, C);
      cur.advance();
    }
  });
}

template <bool B0, class SA, class SB>
void run_reference(const TransposeProblem& p, const SA* A, SB* B, int threads, int C,
                   detail::compute_t<SA, SB> al, detail::compute_t<SA, SB> be) {
  const auto sa = element_strides_a(p);
  const auto sb = element_strides_b_for_a(p);
  const int inner = b_stride1_axis(p);
  const auto inv = p.perm.inverse();
  Traversal tv;
  for (int k = p.rank(); k >= 2; --k) {  // B positions outermost to 2nd
    const int axis = inv.map[static_cast<std::size_t>(k - 1)] - 1;
    tv.add(axis, p.sizes[static_cast<std::size_t>(axis)], 1, sa[static_cast<std::size_t>(axis)],
           sb[static_cast<std::size_t>(axis)]);
  }
  const std::int64_t n1 = p.sizes[static_cast<std::size_t>(inner)];
  const std::int64_t sa_in = sa[static_cast<std::size_t>(inner)];
  parallel_ranges(tv.total, threads, [&](std::int64_t lo, std::int64_t hi) {
    Cursor cur(tv);
    cur.seek(lo);
    for (std::int64_t t = lo; t < hi; ++t) {
      const SA* abase = A + cur.offa * C;
      SB* bbase = B + cur.offb * C;
      if (sa_in == 1 && C == 1) {
        copy_span<B0>(abase, bbase, n1, al, be);
      } else {
        for (std::int64_t i = 0; i < n1; ++i)
          assign_elem<B0>(abase + i * sa_in * C, bbase + i * C, al, be, C);
      }
      cur.advance();
    }
  });
}

void check_buffers(const TransposeProblem& p, const TensorBuffer& a, const TensorBuffer& b) {
  if (a.kind() != p.kind_a) throw std::invalid_argument("A buffer: element kind mismatch");
  if (b.kind() != p.kind_b) throw std::invalid_argument("B buffer: element kind mismatch");
  if (a.elements() < required_elements_a(p))
    throw std::invalid_argument("A buffer: too small for problem");
  if (b.elements() < required_elements_b(p))
    throw std::invalid_argument("B buffer: too small for problem");
}

void check_plan(const TransposeProblem& p, const CandidatePlan& plan) {
  const int n = p.rank();
  std::vector<int> order = plan.loop_order;
  std::sort(order.begin(), order.end());
  bool ok = static_cast<int>(order.size()) == n;
  for (int i = 0; ok && i < n; ++i) ok = order[static_cast<std::size_t>(i)] == i + 1;
  if (!ok) throw std::invalid_argument("plan: loop order does not cover the problem's indices");
  if (plan.micro_width < 1) throw std::invalid_argument("plan: micro width must be >= 1");
  if (plan.block_a < 1 || plan.block_b < 1)
    throw std::invalid_argument("plan: block extents must be >= 1");
  if (plan.prefetch_distance < 0) throw std::invalid_argument("plan: negative prefetch distance");
  if (plan.prefetch_distance > 0 && p.perm.preserves_stride1())
    throw std::invalid_argument("plan: prefetch distance requires a transposed stride-1 index");
  if (plan.streaming_stores && p.beta != 0.0)
    throw std::invalid_argument("plan: streaming stores require beta == 0");
}

template <class SA, class SB>
void run_typed(const TransposeProblem& p, const CandidatePlan* plan, const void* a, void* b,
               int threads) {
  const SA* A = static_cast<const SA*>(a);
  SB* B = static_cast<SB*>(b);
  const int C = element_components(p.kind_a);
  using W = detail::compute_t<SA, SB>;
  const W al = static_cast<W>(p.alpha), be = static_cast<W>(p.beta);
  const bool b0 = p.beta == 0.0;
  auto run = [&](auto b0_tag) {
    constexpr bool Z = decltype(b0_tag)::value;
    if (!plan)
      run_reference<Z>(p, A, B, threads, C, al, be);
    else if (p.rank() == 1)
      run_copy_1d<Z>(p, A, B, threads, C, al, be);
    else if (p.perm.preserves_stride1())
      run_case1<Z>(p, *plan, A, B, threads, C, al, be);
    else
      run_case2<Z>(p, *plan, A, B, threads, C, al, be);
  };
  if (b0)
    run(std::true_type{});
  else
    run(std::false_type{});
}

bool scalar_is_double(ElementKind k) {
  return k == ElementKind::real64 || k == ElementKind::complex128;
}

void run_any(const TransposeProblem& p, const CandidatePlan* plan, const TensorBuffer& a,
             TensorBuffer& b, int threads) {
  validate(p);
  check_buffers(p, a, b);
  if (plan) check_plan(p, *plan);
  if (threads < 1) throw std::invalid_argument("threads: must be >= 1");
  const bool da = scalar_is_double(p.kind_a), db = scalar_is_double(p.kind_b);
  if (!da && !db)
    run_typed<float, float>(p, plan, a.data(), b.data(), threads);
  else if (!da && db)
    run_typed<float, double>(p, plan, a.data(), b.data(), threads);
  else if (da && !db)
    run_typed<double, float>(p, plan, a.data(), b.data(), threads);
  else
    run_typed<double, double>(p, plan, a.data(), b.data(), threads);
}

}  // namespace

void reference_transpose(const TransposeProblem& p, const TensorBuffer& a, TensorBuffer& b,
                         int threads) {
  run_any(p, nullptr, a, b, threads);
}

void execute_plan(const TransposeProblem& p, const CandidatePlan& plan, const TensorBuffer& a,
                  TensorBuffer& b, int threads) {
  run_any(p, &plan, a, b, threads);
}

}  // namespace ttune
