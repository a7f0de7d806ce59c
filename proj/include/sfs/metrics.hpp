#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "sfs/errors.hpp"
#include "sfs/grid.hpp"
#include "sfs/reflectance.hpp"

namespace sfs {

struct ErrorReport {
  double l2{0.0};    // root mean square, same as err2
  double linf{0.0};  // max |e|
  double err1{0.0};  // mean |e|
  double err2{0.0};  // root mean square
  std::size_t n{0};
};

namespace detail {

template <typename Diff>
ErrorReport accumulate_errors(const Mask& mask, Diff&& diff) {
  ErrorReport r;
  double sum_abs = 0.0;
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (mask[k] != NodeLabel::Inside) continue;
    const double e = std::abs(diff(k));
    sum_abs += e;
    sum_sq += e * e;
    r.linf = std::max(r.linf, e);
    ++r.n;
  }
  if (r.n == 0) throw EmptyMask();
  const double n = static_cast<double>(r.n);
  r.err1 = sum_abs / n;
  r.err2 = std::sqrt(sum_sq / n);
  r.l2 = r.err2;
  return r;
}

inline void require_same_grid(const ScalarField& a, const ScalarField& b, const Mask& mask) {
  if (!(a.grid() == b.grid()) || !(a.grid() == mask.grid()))
    throw InvalidArgument("fields and mask must share a grid");
}

}  // namespace detail

//! Error norms of u_est - u_ref over Inside nodes.
inline ErrorReport surface_errors(const ScalarField& u_ref, const ScalarField& u_est,
                                  const Mask& mask) {
  detail::require_same_grid(u_ref, u_est, mask);
  return detail::accumulate_errors(mask, [&](std::size_t k) { return u_est[k] - u_ref[k]; });
}

//! Image error norms; when quantized both images are first rounded to 256 levels.
inline ErrorReport image_errors(const ScalarField& i_ref, const ScalarField& i_est,
                                const Mask& mask, bool quantized) {
  detail::require_same_grid(i_ref, i_est, mask);
  return detail::accumulate_errors(mask, [&](std::size_t k) {
    if (!quantized) return i_est[k] - i_ref[k];
    return quantize_8bit(i_est[k]) - quantize_8bit(i_ref[k]);
  });
}

}  // namespace sfs
