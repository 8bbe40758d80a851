#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace motsim {

// All quadrature and dot products in the project go through these reductions.
// The association order is fixed (four independent lanes combined in a set
// pattern), so results are bitwise reproducible run-to-run and independent of
// any external threading, while the independent lanes keep the loops
// vectorizable.
template <typename F>
double fixed_order_sum(std::size_t n, F&& term) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += term(i);
    s1 += term(i + 1);
    s2 += term(i + 2);
    s3 += term(i + 3);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += term(i);
  return ((s0 + s2) + (s1 + s3)) + tail;
}

template <typename F>
double pairwise_sum_n(std::size_t lo, std::size_t hi, F&& term) {
  return fixed_order_sum(hi - lo, [&](std::size_t k) { return term(lo + k); });
}

inline double pairwise_sum(std::span<const double> xs) {
  const double* p = xs.data();
  const std::size_t n = xs.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += p[i];
    s1 += p[i + 1];
    s2 += p[i + 2];
    s3 += p[i + 3];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += p[i];
  return ((s0 + s2) + (s1 + s3)) + tail;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  const double* pa = a.data();
  const double* pb = b.data();
  const std::size_t n = a.size();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += pa[i] * pb[i];
    s1 += pa[i + 1] * pb[i + 1];
    s2 += pa[i + 2] * pb[i + 2];
    s3 += pa[i + 3] * pb[i + 3];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += pa[i] * pb[i];
  return ((s0 + s2) + (s1 + s3)) + tail;
}

// std::pow with fast paths for the small rational exponents that dominate the
// stepping loop (m = 2, alpha = 1 and the associated m+1, (m+1)/2 powers).
inline double pow_real(double x, double e) {
  if (e == 1.0) return x;
  if (e == 2.0) return x * x;
  if (e == 3.0) return x * x * x;
  if (e == 1.5) return x * std::sqrt(x);
  if (e == 0.5) return std::sqrt(x);
  if (e == 0.0) return 1.0;
  if (e == -1.0) return 1.0 / x;
  if (e == -2.0) return 1.0 / (x * x);
  if (e == 4.0) {
    const double s = x * x;
    return s * s;
  }
  return std::pow(x, e);
}

}  // namespace motsim
