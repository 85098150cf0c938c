#pragma once

#include <cstddef>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "ttune/plan.hpp"
#include "ttune/problem.hpp"

namespace ttune {

namespace detail {

// all arithmetic happens in the wider of the two scalar kinds, with one
// rounding on the final store; every execution path shares these helpers so
// results stay bitwise identical across plans and thread counts
template <class SA, class SB>
using compute_t =
    std::conditional_t<std::is_same_v<SA, double> || std::is_same_v<SB, double>, double, float>;

template <class SA, class SB>
inline SB scale_only(SA a, compute_t<SA, SB> alpha) {
  return static_cast<SB>(alpha * static_cast<compute_t<SA, SB>>(a));
}

template <class SA, class SB>
inline SB scale_update(SA a, SB b, compute_t<SA, SB> alpha, compute_t<SA, SB> beta) {
  using W = compute_t<SA, SB>;
  return static_cast<SB>(alpha * static_cast<W>(a) + beta * static_cast<W>(b));
}

// beta == 0 never loads the destination
template <bool BetaZero, class SA, class SB>
inline void assign(const SA* a, SB* b, compute_t<SA, SB> alpha, compute_t<SA, SB> beta) {
  if constexpr (BetaZero)
    *b = scale_only<SA, SB>(*a, alpha);
  else
    *b = scale_update(*a, *b, alpha, beta);
}

}  // namespace detail

// element-kind tagged storage; aligned for any supported scalar
class TensorBuffer {
 public:
  TensorBuffer() = default;
  TensorBuffer(ElementKind kind, std::int64_t elements);

  ElementKind kind() const { return kind_; }
  std::int64_t elements() const { return elements_; }
  std::int64_t scalars() const { return elements_ * element_components(kind_); }
  std::size_t bytes() const { return static_cast<std::size_t>(elements_) * element_bytes(kind_); }

  template <class T>
  T* as() {
    return reinterpret_cast<T*>(storage_.data());
  }
  template <class T>
  const T* as() const {
    return reinterpret_cast<const T*>(storage_.data());
  }
  void* data() { return storage_.data(); }
  const void* data() const { return storage_.data(); }

 private:
  ElementKind kind_ = ElementKind::real32;
  std::int64_t elements_ = 0;
  std::vector<double> storage_;
};

TensorBuffer make_buffer_a(const TransposeProblem& p);
TensorBuffer make_buffer_b(const TransposeProblem& p);

// flat index of the micro-tile whose macro-tile gets prefetched while micro-tile
// j of macro-tile i is being processed, with distance d over n micro-tiles per
// macro-tile: i + (j + d) / n
std::int64_t prefetch_target(std::int64_t i, std::int64_t j, int d, std::int64_t n);

// in-order elementwise traversal in B-linear order; the correctness baseline
// and the bandwidth baseline for speedup reporting
void reference_transpose(const TransposeProblem& p, const TensorBuffer& a, TensorBuffer& b,
                         int threads = 1);

// runs one candidate plan; bitwise identical to reference_transpose for any
// valid plan and thread count
void execute_plan(const TransposeProblem& p, const CandidatePlan& plan, const TensorBuffer& a,
                  TensorBuffer& b, int threads = 1);

// w x w element tile transpose: dst[c*dst_stride + r] (+ component) receives
// alpha*src[r*src_stride + c] (+ beta*dst). strides and pointers are in scalar
// units; an element spans `components` consecutive scalars. power-of-two w up
// to 32 runs the staged block-swap network, anything else a scalar loop
template <class SA, class SB>
void micro_tile_transpose(int w, const SA* src, std::ptrdiff_t src_stride, SB* dst,
                          std::ptrdiff_t dst_stride, double alpha, double beta,
                          int components = 1);

namespace detail {

template <bool BetaZero, class SA, class SB>
void micro_tile_staged(int w, const SA* src, std::ptrdiff_t ss, SB* dst, std::ptrdiff_t ds,
                       compute_t<SA, SB> alpha, compute_t<SA, SB> beta, int C) {
  SA tmp[32 * 32 * 2];
  for (int r = 0; r < w; ++r)
    for (int i = 0; i < w * C; ++i) tmp[r * w * C + i] = src[r * ss + i];
  for (int h = w / 2; h >= 1; h /= 2)
    for (int r = 0; r < w; ++r) {
      if (r & h) continue;
      for (int c = 0; c < w; ++c) {
        if (!(c & h)) continue;
        for (int q = 0; q < C; ++q)
          std::swap(tmp[(r * w + c) * C + q], tmp[((r + h) * w + (c - h)) * C + q]);
      }
    }
  for (int r = 0; r < w; ++r)
    for (int i = 0; i < w * C; ++i)
      assign<BetaZero>(&tmp[r * w * C + i], &dst[r * ds + i], alpha, beta);
}

template <bool BetaZero, class SA, class SB>
void micro_tile_scalar(int w, const SA* src, std::ptrdiff_t ss, SB* dst, std::ptrdiff_t ds,
                       compute_t<SA, SB> alpha, compute_t<SA, SB> beta, int C) {
  for (int c = 0; c < w; ++c)
    for (int r = 0; r < w; ++r)
      for (int q = 0; q < C; ++q)
        assign<BetaZero>(&src[r * ss + c * C + q], &dst[c * ds + r * C + q], alpha, beta);
}

}  // namespace detail

template <class SA, class SB>
void micro_tile_transpose(int w, const SA* src, std::ptrdiff_t src_stride, SB* dst,
                          std::ptrdiff_t dst_stride, double alpha, double beta, int components) {
  using W = detail::compute_t<SA, SB>;
  const W al = static_cast<W>(alpha), be = static_cast<W>(beta);
  const bool staged = w >= 2 && w <= 32 && (w & (w - 1)) == 0;
  if (beta == 0.0) {
    if (staged)
      detail::micro_tile_staged<true>(w, src, src_stride, dst, dst_stride, al, be, components);
    else
      detail::micro_tile_scalar<true>(w, src, src_stride, dst, dst_stride, al, be, components);
  } else {
    if (staged)
      detail::micro_tile_staged<false>(w, src, src_stride, dst, dst_stride, al, be, components);
    else
      detail::micro_tile_scalar<false>(w, src, src_stride, dst, dst_stride, al, be, components);
  }
}

}  // namespace ttune
