#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sbp/errors.hpp"

namespace sbp {

/// Finite-difference / interpolation weights on arbitrary nodes
/// (Fornberg's recursion). Returns w[j][k] with
///   f^(k)(z) ~= sum_j w[j][k] f(x[j]),  k = 0..max_order.
inline std::vector<std::array<double, 4>> fornberg_weights(
    double z, const std::vector<double>& x, int max_order) {
  if (max_order < 0 || max_order > 3) throw NumericError("fornberg_weights: order out of range");
  const int n = static_cast<int>(x.size()) - 1;
  if (n < max_order) throw NumericError("fornberg_weights: not enough nodes");
  std::vector<std::array<double, 4>> c(x.size(), {0.0, 0.0, 0.0, 0.0});
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// Gregory end-correction coefficients c_k for the corrected trapezoid rule
///   int_a^b g = h*(g0/2 + g1 + ... + g_{n-1} + gn/2)
///               - h*[c1(D^1 g_n^- - D^1 g_0^+) + c2(D^2 g_n^- + D^2 g_0^+) + ...]
/// where D^k g^+ are forward and D^k g^- backward differences; odd orders enter
/// with alternating sign at the left end. Truncation after m terms gives an
/// O(h^{m+2}) rule.
inline constexpr std::array<double, 7> kGregory = {
    0.0,
    1.0 / 12.0,
    1.0 / 24.0,
    19.0 / 720.0,
    3.0 / 160.0,
    863.0 / 60480.0,
    275.0 / 24192.0,
};

inline double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return b;
}

/// Adds Gregory corrections for the LEFT end of a smooth stretch starting at
/// sample index `i0` to the coefficient vector `coef` (coefficients multiply
/// the samples g_{i0}, g_{i0+1}, ...). `m` is the correction order, `h` the
/// uniform spacing. Sample indices beyond `i_max` are never touched.
inline void gregory_left(std::vector<double>& coef, int i0, int i_max, int m, double h) {
  m = std::min(m, i_max - i0);
  for (int k = 1; k <= m; ++k) {
    // +c1 D - c2 D^2 + c3 D^3 - ... (forward differences at the left end)
    const double sign_k = (k % 2 == 1) ? 1.0 : -1.0;
    for (int j = 0; j <= k; ++j) {
      const double dj = ((k - j) % 2 == 0 ? 1.0 : -1.0) * binomial(k, j);
      coef[i0 + j] += h * sign_k * kGregory[k] * dj;
    }
  }
}

/// Adds Gregory corrections for the RIGHT end of a smooth stretch ending at
/// sample index `i1` (backward differences reach down to `i_min`).
inline void gregory_right(std::vector<double>& coef, int i1, int i_min, int m, double h) {
  m = std::min(m, i1 - i_min);
  for (int k = 1; k <= m; ++k) {
    // -c1 N - c2 N^2 - c3 N^3 - ... (backward differences at the right end)
    for (int j = 0; j <= k; ++j) {
      const double dj = (j % 2 == 0 ? 1.0 : -1.0) * binomial(k, j);
      coef[i1 - j] -= h * kGregory[k] * dj;
    }
  }
}

/// t + expm1(-t), the nonnegative remainder of the exponential; stable for
/// small t where the direct form cancels.
inline double expm1_plus_t(double t) {
  if (t < 1e-4) return t * t * (0.5 - t / 6.0 + t * t / 24.0 - t * t * t / 120.0);
  return t + std::expm1(-t);
}

/// (1 - e^{-t})/t extended by 1 at t = 0.
inline double one_minus_exp_over(double t) {
  if (t == 0.0) return 1.0;
  return -std::expm1(-t) / t;
}

/// Deterministic 64-bit splitmix generator; used instead of <random>
/// distributions so streams are identical across standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

 private:
  std::uint64_t state_;
};

}  // namespace sbp
