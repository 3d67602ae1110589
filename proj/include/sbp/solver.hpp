#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sbp/functional.hpp"

namespace sbp {

/// Nehari projection failed: the fibering map has no positive critical point.
class ProjectionError : public Error {
 public:
  explicit ProjectionError(const std::string& msg) : Error(msg) {}
};

struct SeedProfile {
  std::string kind = "gaussian";  // "gaussian" or "custom"
  double width = 1.0;
  Eigen::VectorXd custom;

  RadialFunction realize(const GridPtr& grid) const {
    if (kind == "custom") {
      if (custom.size() != grid->size()) throw GridError("SeedProfile: custom size mismatch");
      return RadialFunction(grid, custom);
    }
    if (kind != "gaussian") throw ConfigError("SeedProfile: unknown kind '" + kind + "'");
    const double w = width;
    return RadialFunction::from_function(
        grid, [w](double r) { return std::exp(-0.5 * r * r / (w * w)); });
  }
};

struct SolverConfig {
  enum class Method { auto_select, nehari_descent, scf };

  Method method = Method::auto_select;
  int max_iter = 4000;
  double grad_tol = 1e-8;  // stop when ||g||/||u|| <= grad_tol
  double step = 1.0;
  struct Backtrack {
    double c1 = 1e-4;
    double shrink = 0.5;
    double grow = 1.3;
    int max_backtracks = 45;
  } backtrack;
  SeedProfile seed_profile;

  void validate() const {
    if (!(grad_tol > 0.0)) throw ConfigError("SolverConfig: grad_tol must be positive");
    if (max_iter < 1) throw ConfigError("SolverConfig: max_iter must be >= 1");
    if (!(step > 0.0)) throw ConfigError("SolverConfig: step must be positive");
  }
};

inline std::string to_string(SolverConfig::Method m) {
  switch (m) {
    case SolverConfig::Method::nehari_descent: return "nehari_descent";
    case SolverConfig::Method::scf: return "scf";
    default: return "auto";
  }
}

struct IterationRecord {
  int iter = 0;
  double j_value = 0.0;
  double grad_rel = 0.0;
  double step = 0.0;
};

struct Solution {
  RadialFunction u;
  RadialFunction phi;
  Params params;
  Diagnostics diagnostics;
  int iterations = 0;
  bool converged = false;
  std::string method;
  System system = System::bopp_podolsky;
  std::vector<IterationRecord> trace;

  Solution(RadialFunction u_, RadialFunction phi_, Params prm)
      : u(std::move(u_)), phi(std::move(phi_)), params(prm) {}
};

/// Scales u onto the Nehari manifold: t* u with t* > 0 solving
///   t A + t^3 B - t^{p-1} C = 0,
/// A = ||u||^2, B = q^2 int phi_u u^2, C = ||u||_p^p (phi_{tu} = t^2 phi_u).
/// Unique positive root for p > 4; for p <= 4 the largest positive root.
inline RadialFunction nehari_project(const RadialFunction& u, const Params& prm,
                                     System sys = System::bopp_podolsky) {
  require_admissible(u, "nehari_project");
  const auto f = detail::functional_parts(u, prm, sys);
  const double A = f.grad2 + prm.omega * f.l22;
  const double B = prm.q * prm.q * f.inter;
  const double C = f.lp_p;
  const double p = prm.p;
  if (!(C > 0.0)) throw DomainError("nehari_project: ||u||_p vanishes");
  if (!(A > 0.0)) throw DomainError("nehari_project: u is trivial");

  auto h = [&](double t) { return A + B * t * t - C * std::pow(t, p - 2.0); };
  double lo = 0.0, hi = 0.0;
  if (B == 0.0) {
    const double t = std::pow(A / C, 1.0 / (p - 2.0));
    return RadialFunction(u.grid, t * u.values);
  }
  if (p > 4.0) {
    // h decreases through zero exactly once past its maximum
    hi = std::max(1.0, std::pow(A / C, 1.0 / (p - 2.0)));
    while (h(hi) > 0.0) {
      hi *= 2.0;
      if (hi > 1e12) throw ProjectionError("nehari_project: no sign change found");
    }
    lo = 0.0;
  } else if (p == 4.0) {
    if (C <= B) throw ProjectionError("nehari_project: p = 4 with C <= B has no root");
    const double t = std::sqrt(A / (C - B));
    return RadialFunction(u.grid, t * u.values);
  } else {
    // p < 4: h -> +inf at both ends; a root needs h(t_min) <= 0
    const double tmin = std::pow((p - 2.0) * C / (2.0 * B), 1.0 / (4.0 - p));
    if (h(tmin) > 0.0)
      throw ProjectionError("nehari_project: fibering map stays positive (p <= 4, large B)");
    lo = tmin;
    hi = tmin;
    while (h(hi) < 0.0) {
      hi *= 2.0;
      if (hi > 1e12) throw ProjectionError("nehari_project: upper bracket failure");
    }
  }
  // bisection to near machine precision; h is smooth and bracketed
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  const double t = 0.5 * (lo + hi);
  return RadialFunction(u.grid, t * u.values);
}

namespace detail {

struct DescentProblem {
  std::function<double(const RadialFunction&)> value;
  std::function<RadialFunction(const RadialFunction&)> gradient;
  std::function<RadialFunction(const RadialFunction&)> project;
  double omega = 1.0;
};

struct DescentOutcome {
  RadialFunction u;
  double j = 0.0;
  int iterations = 0;
  bool converged = false;
  double grad_rel = 0.0;
  std::vector<IterationRecord> trace;
};

/// Projected Sobolev-gradient descent with Armijo backtracking. Iterates stay
/// on the (generalized) Nehari manifold and nonnegative; the objective is
/// nonincreasing across accepted steps.
inline DescentOutcome projected_descent(RadialFunction u0, const DescentProblem& prob,
                                        const SolverConfig& cfg, bool record_trace) {
  DescentOutcome out{prob.project(RadialFunction(u0.grid, u0.values.cwiseAbs())), 0.0};
  out.u.values = out.u.values.cwiseAbs();
  out.j = prob.value(out.u);
  double step = cfg.step;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    out.iterations = it;
    const RadialFunction g = prob.gradient(out.u);
    const double gn2 = inner_h1(g, g, prob.omega);
    const double un = std::sqrt(inner_h1(out.u, out.u, prob.omega));
    out.grad_rel = std::sqrt(gn2) / un;
    if (record_trace) out.trace.push_back({it, out.j, out.grad_rel, step});
    if (out.grad_rel <= cfg.grad_tol) {
      out.converged = true;
      break;
    }
    double s = step;
    bool accepted = false;
    for (int bt = 0; bt <= cfg.backtrack.max_backtracks; ++bt) {
      RadialFunction trial(out.u.grid,
                           (out.u.values - s * g.values).cwiseAbs());
      if (trial.values.maxCoeff() <= 0.0) {
        s *= cfg.backtrack.shrink;
        continue;
      }
      RadialFunction proj = [&]() -> RadialFunction {
        try {
          return prob.project(trial);
        } catch (const ProjectionError&) {
          return RadialFunction(trial.grid, Eigen::VectorXd());
        }
      }();
      if (proj.values.size() == 0) {
        s *= cfg.backtrack.shrink;
        continue;
      }
      const double jn = prob.value(proj);
      if (jn <= out.j - cfg.backtrack.c1 * s * gn2 ||
          (bt == cfg.backtrack.max_backtracks && jn <= out.j)) {
        out.u = std::move(proj);
        out.j = jn;
        accepted = true;
        break;
      }
      s *= cfg.backtrack.shrink;
    }
    if (!accepted) break;  // line search exhausted at machine scale
    step = std::clamp(s * cfg.backtrack.grow, 1e-10, 1e4);
  }
  return out;
}

}  // namespace detail

/// Positive radial ground state of the local problem -Delta u + omega u = u^{p-1}
/// by bisection on u(0), integrating outward with RK4 and switching to the
/// e^{-sqrt(omega) r}/r tail once the solution enters the linear regime.
/// Independent of the variational machinery; serves as the solver oracle.
inline RadialFunction shooting_local(const GridPtr& grid, double omega, double p) {
  if (!(p > 2.0 && p < 6.0)) throw DomainError("shooting_local: p must lie in (2, 6)");
  if (!(omega > 0.0)) throw DomainError("shooting_local: omega must be positive");
  const double k = std::sqrt(omega);
  const double r_end = 45.0 / k;
  const double h = 5e-4 / std::max(1.0, k);

  auto rhs = [&](double r, double u, double v, double& du, double& dv) {
    du = v;
    dv = -2.0 / r * v + omega * u - std::pow(std::abs(u), p - 2.0) * u;
  };
  auto rk4 = [&](double r, double& u, double& v, double dr) {
    double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
    rhs(r, u, v, k1u, k1v);
    rhs(r + 0.5 * dr, u + 0.5 * dr * k1u, v + 0.5 * dr * k1v, k2u, k2v);
    rhs(r + 0.5 * dr, u + 0.5 * dr * k2u, v + 0.5 * dr * k2v, k3u, k3v);
    rhs(r + dr, u + dr * k3u, v + dr * k3v, k4u, k4v);
    u += dr / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    v += dr / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  };

  const double r_start = 1e-6 / std::max(1.0, k);
  auto series_start = [&](double alpha, double& u, double& v) {
    const double upp0 = (omega * alpha - std::pow(alpha, p - 1.0)) / 3.0;
    u = alpha + 0.5 * upp0 * r_start * r_start;
    v = upp0 * r_start;
  };

  // +1: crossed zero (alpha too large), -1: turned upward (alpha too small)
  auto classify = [&](double alpha) {
    double u, v, r = r_start;
    series_start(alpha, u, v);
    while (r < r_end) {
      const double dr = std::min(h, r_end - r);
      rk4(r, u, v, dr);
      r += dr;
      if (u <= 0.0) return +1;
      if (v > 0.0) return -1;
    }
    return (v + k * u > 0.0) ? -1 : +1;
  };

  double lo = std::pow(omega, 1.0 / (p - 2.0));
  int guard = 0;
  while (classify(lo) == +1) {
    lo *= 0.5;
    if (++guard > 60) throw NumericError("shooting_local: lower bracket failure");
  }
  double hi = 2.0 * lo;
  guard = 0;
  while (classify(hi) == -1) {
    hi *= 2.0;
    if (++guard > 60) throw NumericError("shooting_local: upper bracket failure");
  }
  for (int it = 0; it < 80 && (hi - lo) > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (classify(mid) == +1 ? hi : lo) = mid;
  }
  const double alpha = 0.5 * (lo + hi);

  // Final pass: land exactly on the grid nodes. Once the solution is deep in
  // the linear regime (u below 1e-3 alpha, well before the e^{+kr} bisection
  // residue can surface) graft the matched tail c e^{-kr}/r.
  Eigen::VectorXd vals(grid->size());
  double u, v, r = r_start;
  series_start(alpha, u, v);
  bool tail = false;
  double tail_c = 0.0;
  for (int i = 0; i < grid->size(); ++i) {
    const double target = grid->nodes()[i];
    if (!tail && target > r) {
      const int steps = std::max(1, static_cast<int>(std::ceil((target - r) / h)));
      const double dr = (target - r) / steps;
      for (int sgm = 0; sgm < steps; ++sgm) rk4(r + sgm * dr, u, v, dr);
      r = target;
      if (u <= 0.0) throw NumericError("shooting_local: profile crossed zero before tail matching");
      if (u < 1e-3 * alpha) {
        tail = true;
        tail_c = u * r * std::exp(k * r);
      }
    }
    vals[i] = tail ? tail_c * std::exp(-k * target) / target : u;
  }
  return RadialFunction(grid, std::move(vals));
}

namespace detail {

inline Solution make_solution(const DescentOutcome& d, const Params& prm, System sys,
                              const std::string& method) {
  const PotentialResult pot =
      sys == System::bopp_podolsky ? bp_potential(d.u, prm.kernel()) : coulomb_potential(d.u);
  Solution sol(d.u, pot.phi, prm);
  sol.diagnostics = diagnostics(d.u, prm, sys);
  sol.iterations = d.iterations;
  sol.method = method;
  sol.system = sys;
  sol.trace = d.trace;
  const double h1sq = sol.diagnostics.h1_norm * sol.diagnostics.h1_norm;
  sol.converged = d.converged &&
                  std::abs(sol.diagnostics.nehari_residual) <= 1e-6 * h1sq;
  return sol;
}

inline DescentProblem full_problem(const Params& prm, System sys) {
  DescentProblem prob;
  prob.omega = prm.omega;
  prob.value = [prm, sys](const RadialFunction& w) { return detail::j_q_impl(w, prm, sys); };
  prob.gradient = [prm, sys](const RadialFunction& w) {
    return detail::grad_j_q_impl(w, prm, sys);
  };
  prob.project = [prm, sys](const RadialFunction& w) { return nehari_project(w, prm, sys); };
  return prob;
}

}  // namespace detail

/// Self-consistent field iteration: freeze phi = phi_u, solve the local
/// problem -Delta v + omega v + q^2 phi v = |v|^{p-2} v by projected descent
/// (its fibering map has the closed-form root t = (A/C)^{1/(p-2)} for every
/// p in (2,6)), then damp u <- (1-theta) u + theta v, halving theta whenever
/// J_q increases.
inline Solution solve_scf(const Params& prm, const SolverConfig& cfg,
                          const GridPtr& grid, System sys = System::bopp_podolsky) {
  cfg.validate();
  if (!(prm.p > 2.0 && prm.p < 6.0)) throw DomainError("solve_scf: p must lie in (2, 6)");
  const auto riesz = riesz_operator(grid, prm.omega);

  RadialFunction u = cfg.seed_profile.realize(grid);
  u.values = u.values.cwiseAbs();

  std::shared_ptr<const KernelOps> hb;
  std::shared_ptr<const CoulombOps> hg;
  const Eigen::MatrixXd* m =
      prm.q != 0.0 ? &detail::interaction_matrix(grid, prm, sys, hb, hg) : nullptr;

  auto local_problem = [&](const Eigen::VectorXd& phi) {
    detail::DescentProblem prob;
    prob.omega = prm.omega;
    const double q2 = prm.q * prm.q;
    auto parts = [phi, q2, &prm](const RadialFunction& w) {
      const auto& g = *w.grid;
      const double grad2 = grad_l2_sq(w);
      const double l22 = l2_sq(w);
      const double pw =
          kFourPi * (g.weights().array() * phi.array() * w.values.array().square()).sum();
      const double lp = lp_pow_p(w, prm.p);
      return std::array<double, 4>{grad2, l22, pw, lp};
    };
    prob.value = [parts, q2, &prm](const RadialFunction& w) {
      const auto f = parts(w);
      return 0.5 * f[0] + 0.5 * prm.omega * f[1] + 0.5 * q2 * f[2] - f[3] / prm.p;
    };
    prob.gradient = [phi, q2, &prm, riesz](const RadialFunction& w) {
      const auto& g = *w.grid;
      Eigen::VectorXd extra =
          q2 * kFourPi * (g.weights().array() * phi.array() * w.values.array()).matrix();
      const Eigen::VectorXd up =
          w.values.array().abs().pow(prm.p - 2.0) * w.values.array();
      extra -= kFourPi * (g.weights().array() * up.array()).matrix();
      return RadialFunction(w.grid, w.values + riesz->solve(extra));
    };
    prob.project = [parts, q2, &prm](const RadialFunction& w) {
      const auto f = parts(w);
      const double A = f[0] + prm.omega * f[1] + q2 * f[2];
      const double C = f[3];
      if (!(C > 0.0) || !(A > 0.0)) throw ProjectionError("scf local projection: trivial iterate");
      const double t = std::pow(A / C, 1.0 / (prm.p - 2.0));
      return RadialFunction(w.grid, t * w.values);
    };
    return prob;
  };

  SolverConfig inner_cfg = cfg;
  inner_cfg.max_iter = 400;
  inner_cfg.grad_tol = std::max(cfg.grad_tol * 0.1, 1e-11);

  const auto full = detail::full_problem(prm, sys);
  double jcur = std::numeric_limits<double>::infinity();
  double theta = 1.0;
  std::vector<IterationRecord> trace;
  int iters = 0;
  bool converged = false;
  double grad_rel = 0.0;

  const int outer_max = std::max(1, cfg.max_iter / 50);
  for (int outer = 1; outer <= outer_max; ++outer) {
    iters = outer;
    const Eigen::VectorXd u2 = u.values.array().square();
    const Eigen::VectorXd phi = m == nullptr ? Eigen::VectorXd::Zero(grid->size())
                                             : Eigen::VectorXd(kFourPi * (*m * u2));
    auto local = local_problem(phi);
    auto inner = detail::projected_descent(u, local, inner_cfg, false);

    bool stepped = false;
    double jnew = jcur;
    RadialFunction unew = u;
    while (theta >= 1.0 / 1024.0) {
      RadialFunction cand(u.grid,
                          ((1.0 - theta) * u.values + theta * inner.u.values).cwiseAbs());
      const double jc = full.value(cand);
      if (jc <= jcur || outer == 1) {
        unew = std::move(cand);
        jnew = jc;
        stepped = true;
        break;
      }
      theta *= 0.5;
    }
    if (!stepped) break;  // damping exhausted: oscillation flag
    u = std::move(unew);
    jcur = jnew;
    theta = std::min(1.0, theta * 1.5);

    const RadialFunction g = full.gradient(u);
    grad_rel = std::sqrt(inner_h1(g, g, prm.omega)) /
               std::sqrt(inner_h1(u, u, prm.omega));
    trace.push_back({outer, jcur, grad_rel, theta});
    if (grad_rel <= cfg.grad_tol) {
      converged = true;
      break;
    }
  }

  detail::DescentOutcome out;
  out.u = u;
  out.j = jcur;
  out.iterations = iters;
  out.converged = converged;
  out.grad_rel = grad_rel;
  out.trace = std::move(trace);
  return detail::make_solution(out, prm, sys, "scf");
}

/// Nontrivial positive radial critical point of J_q by Nehari-projected
/// Sobolev-gradient descent; p in (2,4] routes to SCF, and a projection
/// failure cascade falls back to SCF as well.
inline Solution solve_ground_state(const Params& prm, const SolverConfig& cfg,
                                   const GridPtr& grid, System sys = System::bopp_podolsky) {
  cfg.validate();
  if (!(prm.p > 2.0 && prm.p < 6.0)) throw DomainError("solve_ground_state: p must lie in (2, 6)");
  SolverConfig::Method method = cfg.method;
  if (method == SolverConfig::Method::auto_select)
    method = prm.p > 4.0 ? SolverConfig::Method::nehari_descent : SolverConfig::Method::scf;
  if (method == SolverConfig::Method::scf) return solve_scf(prm, cfg, grid, sys);

  RadialFunction seed = cfg.seed_profile.realize(grid);
  try {
    auto out = detail::projected_descent(seed, detail::full_problem(prm, sys), cfg, true);
    return detail::make_solution(out, prm, sys, "nehari_descent");
  } catch (const ProjectionError&) {
    Solution sol = solve_scf(prm, cfg, grid, sys);
    if (!sol.converged)
      throw NumericError("solve_ground_state: projection failed and SCF fallback unconverged");
    return sol;
  }
}

}  // namespace sbp
