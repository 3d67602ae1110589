#pragma once

#include <cmath>
#include <numbers>

#include "sbp/errors.hpp"
#include "sbp/numerics.hpp"

namespace sbp {

/// Bopp-Podolsky length parameter a > 0. The a = 0 Coulomb case is served by
/// the dedicated coulomb_* operations, never by passing a = 0 here.
struct KernelParams {
  double a;

  explicit KernelParams(double a_) : a(a_) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("KernelParams: a must be positive and finite");
  }
};

/// K(r) = (1 - e^{-r/a})/r, continuously extended by 1/a at r = 0.
/// Bounded Green's kernel of -Delta + a^2 Delta^2 with source 4 pi delta.
inline double bp_kernel(double r, const KernelParams& kp) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("bp_kernel: r must be finite and >= 0");
  if (r == 0.0) return 1.0 / kp.a;
  return -std::expm1(-r / kp.a) / r;
}

/// Delta K = -e^{-r/a} / (a^2 r); singular at the origin.
inline double bp_kernel_laplacian(double r, const KernelParams& kp) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("bp_kernel_laplacian: r must be positive");
  return -std::exp(-r / kp.a) / (kp.a * kp.a * r);
}

/// K'(r) = [-1 + (r/a + 1) e^{-r/a}] / r^2; bounded near 0 (limit -1/(2a^2))
/// and O(1/r^2) at infinity.
inline double bp_kernel_radial_derivative(double r, const KernelParams& kp) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("bp_kernel_radial_derivative: r must be positive");
  const double t = r / kp.a;
  if (t < 1e-2) {
    // (1+t)e^{-t} - 1 = -t^2/2 + t^3/3 - t^4/8 + t^5/30 - t^6/144 + ...
    const double b =
        t * t * (-0.5 + t * (1.0 / 3.0 + t * (-0.125 + t * (1.0 / 30.0 - t / 144.0))));
    return b / (r * r);
  }
  return ((1.0 + t) * std::exp(-t) - 1.0) / (r * r);
}

namespace detail {

inline void check_sphere_avg_args(double r, double s, const char* where) {
  if (!(r >= 0.0) || !(s >= 0.0) || !std::isfinite(r) || !std::isfinite(s))
    throw DomainError(std::string(where) + ": radii must be finite and >= 0");
  if (r == 0.0 && s == 0.0) throw DomainError(std::string(where) + ": r = s = 0");
}

}  // namespace detail

/// Sphere average of 1/|x-y| over |y| = s at |x| = r; equals 1/max(r, s)
/// (Newton's theorem).
inline double coulomb_sphere_avg(double r, double s) {
  detail::check_sphere_avg_args(r, s, "coulomb_sphere_avg");
  return 1.0 / std::max(r, s);
}

/// Sphere average of e^{-|x-y|/a}/|x-y|:
///   (a / 2rs) (e^{-|r-s|/a} - e^{-(r+s)/a}),
/// with the removable limits e^{-max/a}/max as r or s tends to 0. Evaluated
/// through expm1 so the near-diagonal difference of exponentials never
/// cancels.
inline double yukawa_sphere_avg(double r, double s, const KernelParams& kp) {
  detail::check_sphere_avg_args(r, s, "yukawa_sphere_avg");
  const double hi = std::max(r, s), lo = std::min(r, s);
  if (lo == 0.0) return std::exp(-hi / kp.a) / hi;
  const double a = kp.a;
  return a / (2.0 * r * s) * std::exp(-(hi - lo) / a) * (-std::expm1(-2.0 * lo / a));
}

/// Sphere average of K(|x-y|) = (1 - e^{-|x-y|/a})/|x-y|. Written as a sum of
/// two nonnegative terms,
///   [2 lo (1 - e^{-m/a}) + a e^{-m/a} (t + expm1(-t))] / (2 r s),  t = 2 lo/a,
/// so the result stays positive and accurate for all a, including a >> r+s
/// where the direct Coulomb-minus-Yukawa form cancels.
inline double bp_sphere_avg(double r, double s, const KernelParams& kp) {
  detail::check_sphere_avg_args(r, s, "bp_sphere_avg");
  const double hi = std::max(r, s), lo = std::min(r, s);
  if (lo == 0.0) return bp_kernel(hi, kp);
  const double a = kp.a;
  const double m = hi - lo;
  const double t = 2.0 * lo / a;
  const double bracket = 2.0 * lo * (-std::expm1(-m / a)) + a * std::exp(-m / a) * expm1_plus_t(t);
  return bracket / (2.0 * r * s);
}

/// Sphere average of e^{-|x-y|/a}:
///   (a / 2rs) [(m + a) e^{-m/a} - (M + a) e^{-M/a}],  m = |r-s|, M = r+s,
/// regular everywhere (value 1 at r = s = 0). A factored branch handles the
/// near-diagonal cancellation.
inline double exp_sphere_avg(double r, double s, const KernelParams& kp) {
  if (!(r >= 0.0) || !(s >= 0.0) || !std::isfinite(r) || !std::isfinite(s))
    throw DomainError("exp_sphere_avg: radii must be finite and >= 0");
  const double hi = std::max(r, s), lo = std::min(r, s);
  const double a = kp.a;
  if (lo == 0.0) return std::exp(-hi / a);
  const double m = hi - lo, M = hi + lo;
  const double t = 2.0 * lo / a;
  if (t < 0.5) {
    const double E = one_minus_exp_over(t);          // (1-e^{-t})/t
    const double psi_over_t = expm1_plus_t(t) / t;   // 1 - E
    return lo / (r * s) * std::exp(-m / a) * (M * E - a * psi_over_t);
  }
  return a / (2.0 * r * s) * ((m + a) * std::exp(-m / a) - (M + a) * std::exp(-M / a));
}

/// F(e^{-|.|/a}/|.|)(xi) = sqrt(2/pi) a^2 / (1 + a^2 xi^2) with the symmetric
/// (2 pi)^{-3/2} transform convention.
inline double fourier_yukawa(double xi, const KernelParams& kp) {
  if (!std::isfinite(xi)) throw DomainError("fourier_yukawa: non-finite frequency");
  const double a2 = kp.a * kp.a;
  return std::sqrt(2.0 / std::numbers::pi) * a2 / (1.0 + a2 * xi * xi);
}

/// (1 - e^{-t})/t - e^{-t}, the nonnegative bracket of the low-p
/// nonexistence computation.
inline double kernel_bracket(double t) {
  if (!(t > 0.0)) throw DomainError("kernel_bracket: t must be positive");
  return one_minus_exp_over(t) - std::exp(-t);
}

}  // namespace sbp
