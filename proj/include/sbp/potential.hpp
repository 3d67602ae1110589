#pragma once

#include <cmath>

#include "sbp/operators.hpp"
#include "sbp/space.hpp"

namespace sbp {

/// phi = K * u^2 (or G * u^2) together with the scalars entering the Nehari
/// and Pohozaev identities.
struct PotentialResult {
  RadialFunction phi;
  double grad_phi_l2 = 0.0;  // ||grad phi||_2
  double lap_phi_l2 = 0.0;   // ||Delta phi||_2
  double interaction = 0.0;  // int phi u^2
};

namespace detail {

/// Dirichlet energy of phi over r > r_max. Outside the grid phi is a pure
/// Coulomb tail Q/r (Yukawa parts and the source decay exponentially), so the
/// cut integral int_{r>R} |grad phi|^2 = 4 pi Q^2 / R with Q = int u^2 dx.
/// Without it no truncation radius could meet the D^{1,2} identity
/// tolerances: the tail carries O(1/R) of ||grad phi||^2.
inline double farfield_dirichlet_tail(const RadialFunction& u) {
  const double charge = kFourPi * u.grid->weights().dot(
                            Eigen::VectorXd(u.values.array().square().matrix()));
  return kFourPi * charge * charge / u.grid->r_max();
}

}  // namespace detail

/// Solves -Delta phi + a^2 Delta^2 phi = 4 pi u^2 through the kernel:
/// phi(r_i) = 4 pi sum_j v_j bp_sphere_avg(r_i, r_j) u(r_j)^2. Delta phi uses
/// the exact reduction Delta(K * u^2) = -(1/a^2) (Yukawa * u^2) instead of
/// twice-differencing phi; grad phi is the staggered derivative of phi plus
/// the analytic 1/r far-field tail.
inline PotentialResult bp_potential(const RadialFunction& u, const KernelParams& kp) {
  require_admissible(u, "bp_potential");
  const auto ops = kernel_ops(u.grid, kp.a);
  const Eigen::VectorXd u2 = u.values.array().square();

  PotentialResult out;
  out.phi = RadialFunction(u.grid, kFourPi * (ops->bp * u2));
  if (!out.phi.finite()) throw NumericError("bp_potential: quadrature overflow");
  Eigen::VectorXd lap = -(kFourPi / (kp.a * kp.a)) * (ops->yukawa * u2);
  out.lap_phi_l2 = std::sqrt(kFourPi * (u.grid->weights().array() * lap.array().square()).sum());
  out.grad_phi_l2 = std::sqrt(grad_l2_sq(out.phi) + detail::farfield_dirichlet_tail(u));
  out.interaction = kFourPi * (u.grid->weights().array() * out.phi.values.array() * u2.array()).sum();
  return out;
}

/// Schroedinger-Poisson potential: -Delta phi = 4 pi u^2, phi = G * u^2.
/// ||Delta phi||_2 is reported exactly through the equation as ||4 pi u^2||_2.
inline PotentialResult coulomb_potential(const RadialFunction& u) {
  require_admissible(u, "coulomb_potential");
  const auto ops = coulomb_ops(u.grid);
  const Eigen::VectorXd u2 = u.values.array().square();

  PotentialResult out;
  out.phi = RadialFunction(u.grid, kFourPi * (ops->coulomb * u2));
  if (!out.phi.finite()) throw NumericError("coulomb_potential: quadrature overflow");
  out.lap_phi_l2 =
      kFourPi * std::sqrt(kFourPi * (u.grid->weights().array() * u2.array().square()).sum());
  out.grad_phi_l2 = std::sqrt(grad_l2_sq(out.phi) + detail::farfield_dirichlet_tail(u));
  out.interaction = kFourPi * (u.grid->weights().array() * out.phi.values.array() * u2.array()).sum();
  return out;
}

/// Dirichlet-type energy whose unique minimizer over the potential space is
/// phi_u (with the 4 pi source convention of the field equation):
///   E(phi) = 1/2 ||grad phi||_2^2 + a^2/2 ||Delta phi||_2^2 - 4 pi int phi u^2.
/// Derivatives are discrete (staggered gradient, node Laplacian) so the
/// functional is defined for arbitrary phi, not only kernel convolutions.
inline double potential_energy(const RadialFunction& phi, const RadialFunction& u,
                               const KernelParams& kp) {
  require_same_grid(phi, u, "potential_energy");
  if (!phi.finite() || !u.finite()) throw AdmissibilityError("potential_energy: non-finite values");
  // 1/r tail beyond r_max with the charge read off at the boundary
  const double q_tail = phi.values[phi.values.size() - 1] * phi.grid->r_max();
  const double dir = grad_l2_sq(phi) + kFourPi * q_tail * q_tail / phi.grid->r_max();
  // phi decays like 1/r, so it fails the H^1 boundary test by design; take
  // the Laplacian directly from the node operators.
  const auto& g = *phi.grid;
  Eigen::VectorXd lap = g.d2() * phi.values;
  lap.array() += 2.0 * (g.d1() * phi.values).array() / g.nodes().array();
  const double lap2 = kFourPi * (phi.grid->weights().array() * lap.array().square()).sum();
  const double source =
      kFourPi *
      (phi.grid->weights().array() * phi.values.array() * u.values.array().square()).sum();
  return 0.5 * dir + 0.5 * kp.a * kp.a * lap2 - kFourPi * source;
}

}  // namespace sbp
