#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "sbp/potential.hpp"

namespace sbp {

/// Physical/variational parameters of the system.
struct Params {
  double a;      // Bopp-Podolsky length, > 0
  double omega;  // frequency, > 0
  double q;      // coupling, >= 0
  double p;      // nonlinearity exponent; (2,6) for solving, > 1 for probes

  Params(double a_, double omega_, double q_, double p_) : a(a_), omega(omega_), q(q_), p(p_) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("Params: a must be positive");
    if (!(omega > 0.0) || !std::isfinite(omega)) throw DomainError("Params: omega must be positive");
    if (!(q >= 0.0) || !std::isfinite(q)) throw DomainError("Params: q must be >= 0");
    if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("Params: p must be > 1");
  }

  KernelParams kernel() const { return KernelParams(a); }
};

/// Which second equation couples to u: the fourth-order Bopp-Podolsky field
/// or its a = 0 Schroedinger-Poisson limit (used by the a -> 0 study).
enum class System { bopp_podolsky, schroedinger_poisson };

struct Diagnostics {
  double j_value = 0.0;
  double nehari_residual = 0.0;
  double pohozaev_residual = 0.0;
  double pohozaev_alt_residual = 0.0;
  double h1_norm = 0.0;
  double l2_norm = 0.0;
  double lp_norm = 0.0;
  double grad_l2 = 0.0;
  double interaction = 0.0;  // int phi_u u^2
};

namespace detail {

struct FunctionalParts {
  double grad2 = 0.0;   // ||grad u||_2^2
  double l22 = 0.0;     // ||u||_2^2
  double lp_p = 0.0;    // ||u||_p^p
  double inter = 0.0;   // int phi_u u^2
};

inline const Eigen::MatrixXd& interaction_matrix(const GridPtr& grid, const Params& prm,
                                                 System sys,
                                                 std::shared_ptr<const KernelOps>& hold_bp,
                                                 std::shared_ptr<const CoulombOps>& hold_g) {
  if (sys == System::bopp_podolsky) {
    hold_bp = kernel_ops(grid, prm.a);
    return hold_bp->bp;
  }
  hold_g = coulomb_ops(grid);
  return hold_g->coulomb;
}

inline FunctionalParts functional_parts(const RadialFunction& u, const Params& prm, System sys) {
  FunctionalParts f;
  f.grad2 = grad_l2_sq(u);
  f.l22 = l2_sq(u);
  f.lp_p = lp_pow_p(u, prm.p);
  if (prm.q != 0.0) {
    std::shared_ptr<const KernelOps> hb;
    std::shared_ptr<const CoulombOps> hg;
    const auto& m = interaction_matrix(u.grid, prm, sys, hb, hg);
    const Eigen::VectorXd u2 = u.values.array().square();
    f.inter = double_form(*u.grid, m, u2, u2);
  }
  return f;
}

inline double j_q_impl(const RadialFunction& u, const Params& prm, System sys) {
  require_admissible(u, "j_q");
  const auto f = functional_parts(u, prm, sys);
  return 0.5 * f.grad2 + 0.5 * prm.omega * f.l22 + 0.25 * prm.q * prm.q * f.inter -
         f.lp_p / prm.p;
}

inline RadialFunction grad_j_q_impl(const RadialFunction& u, const Params& prm, System sys) {
  require_admissible(u, "grad_j_q");
  const auto& g = *u.grid;
  const auto riesz = riesz_operator(u.grid, prm.omega);
  Eigen::VectorXd extra = Eigen::VectorXd::Zero(g.size());
  if (prm.q != 0.0) {
    std::shared_ptr<const KernelOps> hb;
    std::shared_ptr<const CoulombOps> hg;
    const auto& m = interaction_matrix(u.grid, prm, sys, hb, hg);
    const Eigen::VectorXd u2 = u.values.array().square();
    const Eigen::VectorXd phi_weak = sym_kernel_apply(g, m, u2);
    extra += (prm.q * prm.q * kFourPi) *
             (g.weights().array() * phi_weak.array() * u.values.array()).matrix();
  }
  const Eigen::VectorXd up =
      u.values.array().abs().pow(prm.p - 2.0) * u.values.array();
  extra -= kFourPi * (g.weights().array() * up.array()).matrix();
  // rhs = (S + omega M) u + extra, so the Riesz representative is u + F^{-1} extra.
  Eigen::VectorXd gv = u.values + riesz->solve(extra);
  if (!gv.allFinite()) throw NumericError("grad_j_q: Riesz solve produced non-finite values");
  return RadialFunction(u.grid, std::move(gv));
}

inline double nehari_residual_impl(const RadialFunction& u, const Params& prm, System sys) {
  require_admissible(u, "nehari_residual");
  const auto f = functional_parts(u, prm, sys);
  return f.grad2 + prm.omega * f.l22 + prm.q * prm.q * f.inter - f.lp_p;
}

inline double pohozaev_residual_impl(const RadialFunction& u, const Params& prm, System sys) {
  require_admissible(u, "pohozaev_residual");
  const auto f = functional_parts(u, prm, sys);
  double value = -0.5 * f.grad2 - 1.5 * prm.omega * f.l22 + 3.0 / prm.p * f.lp_p;
  if (prm.q != 0.0) {
    const double q2 = prm.q * prm.q;
    const PotentialResult pot = sys == System::bopp_podolsky
                                    ? bp_potential(u, prm.kernel())
                                    : coulomb_potential(u);
    value += q2 / (4.0 * kFourPi) * pot.grad_phi_l2 * pot.grad_phi_l2 - 1.5 * q2 * pot.interaction;
    if (sys == System::bopp_podolsky)
      value -= q2 * prm.a * prm.a / (4.0 * kFourPi) * pot.lap_phi_l2 * pot.lap_phi_l2;
  }
  return value;
}

}  // namespace detail

/// Reduced functional J_q(u) = 1/2 ||grad u||^2 + omega/2 ||u||^2
///                             + q^2/4 int phi_u u^2 - 1/p ||u||_p^p.
inline double j_q(const RadialFunction& u, const Params& prm) {
  return detail::j_q_impl(u, prm, System::bopp_podolsky);
}

/// H^1 Riesz representative g of J_q'(u): the radial solution of
/// (-Delta + omega) g = -Delta u + omega u + q^2 phi_u u - |u|^{p-2} u,
/// so <g, v>_{H^1} = J_q'(u)[v] for every discrete v.
inline RadialFunction grad_j_q(const RadialFunction& u, const Params& prm) {
  return detail::grad_j_q_impl(u, prm, System::bopp_podolsky);
}

/// J_q'(u)[u] = ||grad u||^2 + omega ||u||^2 + q^2 int phi_u u^2 - ||u||_p^p.
inline double nehari_residual(const RadialFunction& u, const Params& prm) {
  return detail::nehari_residual_impl(u, prm, System::bopp_podolsky);
}

/// Pohozaev combination
///   -1/2 ||grad u||^2 - 3/2 omega ||u||^2 + q^2/(16 pi) ||grad phi||^2
///   - q^2 a^2/(16 pi) ||Delta phi||^2 - 3/2 q^2 int phi u^2 + 3/p ||u||_p^p;
/// vanishes at exact solutions.
inline double pohozaev_residual(const RadialFunction& u, const Params& prm) {
  return detail::pohozaev_residual_impl(u, prm, System::bopp_podolsky);
}

/// Equivalent Pohozaev form written as a double radial quadrature of the
/// kernel combination 5 (1-e^{-d/a})/(d/a) + e^{-d/a}; equality with
/// pohozaev_residual encodes the Fourier identity Delta K * Delta K.
inline double pohozaev_alt_residual(const RadialFunction& u, const Params& prm) {
  require_admissible(u, "pohozaev_alt_residual");
  const auto f = detail::functional_parts(u, prm, System::bopp_podolsky);
  double value = -0.5 * f.grad2 - 1.5 * prm.omega * f.l22 + 3.0 / prm.p * f.lp_p;
  if (prm.q != 0.0) {
    const auto ops = kernel_ops(u.grid, prm.a);
    const Eigen::VectorXd u2 = u.values.array().square();
    const double combo = 5.0 * prm.a * f.inter + double_form(*u.grid, ops->expk, u2, u2);
    value -= prm.q * prm.q / (4.0 * prm.a) * combo;
  }
  return value;
}

/// Smooth cutoff: 1 on [0,1], 0 on [2,inf), |chi'| <= 1.5.
inline double cutoff_chi(double s) {
  const double t = std::clamp(s - 1.0, 0.0, 1.0);
  return 1.0 - 3.0 * t * t + 2.0 * t * t * t;
}

/// Truncated functional J_{q,T} with K_T(u) = chi(||u||^2 / T^2) multiplying
/// the interaction term.
inline double j_q_truncated(const RadialFunction& u, const Params& prm, double T) {
  if (!(T > 0.0)) throw DomainError("j_q_truncated: T must be positive");
  require_admissible(u, "j_q_truncated");
  const auto f = detail::functional_parts(u, prm, System::bopp_podolsky);
  const double h1sq = f.grad2 + prm.omega * f.l22;
  const double K = cutoff_chi(h1sq / (T * T));
  return 0.5 * f.grad2 + 0.5 * prm.omega * f.l22 + 0.25 * prm.q * prm.q * K * f.inter -
         f.lp_p / prm.p;
}

/// Perturbed family J_{q,lambda}, lambda in [1/2, 1]; lambda = 1 is J_q.
inline double j_q_lambda(const RadialFunction& u, const Params& prm, double lambda) {
  if (!(lambda >= 0.5 && lambda <= 1.0)) throw DomainError("j_q_lambda: lambda out of [1/2, 1]");
  require_admissible(u, "j_q_lambda");
  const auto f = detail::functional_parts(u, prm, System::bopp_podolsky);
  return 0.5 * f.grad2 + 0.5 * prm.omega * f.l22 + 0.25 * prm.q * prm.q * f.inter -
         lambda * f.lp_p / prm.p;
}

/// Scaling curves of the mountain-pass geometry.
enum class MpRegime { high_p, low_p };

/// J_q evaluated on the rescaled profile u_tau:
///   high_p: u_tau = tau^2 u(tau .)          (p in (3,6))
///   low_p:  u_tau = tau^{p/(p-2)} u(tau .)  (p in (2,3])
/// The profile is resampled onto the grid (analytically when a closed form is
/// supplied); undecayed rescaled mass raises TruncationError.
inline double mp_curve_value(const RadialFunction& u, const Params& prm, double tau,
                             MpRegime regime,
                             const std::function<double(double)>* analytic = nullptr) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("mp_curve_value: tau must be positive");
  if (regime == MpRegime::low_p && !(prm.p > 2.0))
    throw DomainError("mp_curve_value: low_p curve requires p > 2");
  const double beta = regime == MpRegime::high_p ? 2.0 : prm.p / (prm.p - 2.0);
  const double amp = std::pow(tau, beta);
  const auto& g = *u.grid;
  Eigen::VectorXd vals(g.size());
  for (int i = 0; i < g.size(); ++i) {
    const double x = tau * g.nodes()[i];
    double v;
    if (analytic) {
      v = (*analytic)(x);
    } else {
      v = x <= g.r_max() ? u(x) : 0.0;
    }
    vals[i] = amp * v;
  }
  RadialFunction ut(u.grid, std::move(vals));
  if (!ut.h1_admissible())
    throw TruncationError("mp_curve_value: rescaled profile does not decay on the grid");
  return j_q(ut, prm);
}

/// Full diagnostic block at u.
inline Diagnostics diagnostics(const RadialFunction& u, const Params& prm,
                               System sys = System::bopp_podolsky) {
  Diagnostics d;
  const auto f = detail::functional_parts(u, prm, sys);
  d.j_value = 0.5 * f.grad2 + 0.5 * prm.omega * f.l22 + 0.25 * prm.q * prm.q * f.inter -
              f.lp_p / prm.p;
  d.nehari_residual = f.grad2 + prm.omega * f.l22 + prm.q * prm.q * f.inter - f.lp_p;
  d.pohozaev_residual = detail::pohozaev_residual_impl(u, prm, sys);
  d.pohozaev_alt_residual =
      sys == System::bopp_podolsky ? pohozaev_alt_residual(u, prm) : d.pohozaev_residual;
  d.h1_norm = std::sqrt(f.grad2 + prm.omega * f.l22);
  d.l2_norm = std::sqrt(f.l22);
  d.lp_norm = std::pow(f.lp_p, 1.0 / prm.p);
  d.grad_l2 = std::sqrt(f.grad2);
  d.interaction = f.inter;
  return d;
}

}  // namespace sbp
