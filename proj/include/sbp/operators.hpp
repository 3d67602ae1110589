#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

#include "sbp/grid.hpp"
#include "sbp/kernel.hpp"
#include "sbp/space.hpp"

namespace sbp {

/// Dense product-quadrature matrix for a sphere-averaged kernel A(r, s):
///   (M f)_i ~= int_0^{r_max} A(r_i, s) f(s) s^2 ds,
/// with per-row Gregory corrections on both sides of the diagonal kink.
template <class Kernel>
Eigen::MatrixXd kernel_matrix(const RadialGrid& grid, Kernel&& A) {
  const int n = grid.size();
  const auto& r = grid.nodes();
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    const auto v = grid.kernel_row_base(i);
    for (int k = 0; k < n; ++k) m(i, k) = v[k] * A(r[i], r[k]);
    // leading cells: kernel evaluated at Gauss sub-points, source interpolated
    for (int j = 0; j < grid.sub_cell_count(i); ++j) {
      const auto& c = grid.cell_rule(j);
      for (int g = 0; g < 6; ++g) {
        const double aw = c.sub_w[g] * A(r[i], c.sub_r[g]);
        for (int k = 0; k < 6; ++k) m(i, c.stencil_lo + k) += aw * c.lagrange[g][k];
      }
    }
  }
  return m;
}

/// The H^1(omega) operator S + omega M assembled from the grid's staggered
/// derivative and quadrature weights, with a cached factorization. Used both
/// as the discrete -Delta + omega (weak form) and as the Riesz isomorphism
/// for Sobolev gradients.
class RieszOperator {
 public:
  RieszOperator(GridPtr grid, double omega) : grid_(std::move(grid)), omega_(omega) {
    const auto& g = *grid_;
    const int n = g.size();
    Eigen::SparseMatrix<double> wm(n - 1, n - 1);
    {
      std::vector<Eigen::Triplet<double>> t;
      t.reserve(n - 1);
      for (int k = 0; k < n - 1; ++k) t.emplace_back(k, k, kFourPi * g.midpoint_weights()[k]);
      wm.setFromTriplets(t.begin(), t.end());
    }
    stiffness_ = g.d_stag().transpose() * wm * g.d_stag();
    Eigen::SparseMatrix<double> op = stiffness_;
    for (int k = 0; k < n; ++k) op.coeffRef(k, k) += omega_ * kFourPi * g.weights()[k];
    op.makeCompressed();
    op_ = op;
    solver_.compute(op_);
    if (solver_.info() != Eigen::Success) throw NumericError("RieszOperator: factorization failed");
  }

  double omega() const { return omega_; }
  const GridPtr& grid() const { return grid_; }

  /// (S + omega M) u — the weak-form action of -Delta + omega.
  Eigen::VectorXd apply(const Eigen::VectorXd& u) const {
    Eigen::VectorXd v = stiffness_ * u;
    v.array() += omega_ * kFourPi * grid_->weights().array() * u.array();
    return v;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = solver_.solve(rhs);
    if (solver_.info() != Eigen::Success) throw NumericError("RieszOperator: solve failed");
    return x;
  }

 private:
  GridPtr grid_;
  double omega_;
  Eigen::SparseMatrix<double> stiffness_, op_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

/// Corrected kernel matrices for one (grid, a) pair.
struct KernelOps {
  GridPtr grid;
  double a;
  Eigen::MatrixXd bp;      // (1 - e^{-d/a})/d
  Eigen::MatrixXd yukawa;  // e^{-d/a}/d
  Eigen::MatrixXd expk;    // e^{-d/a}

  KernelOps(GridPtr g, double a_) : grid(std::move(g)), a(a_) {
    const KernelParams kp(a);
    bp = kernel_matrix(*grid, [&](double r, double s) { return bp_sphere_avg(r, s, kp); });
    yukawa = kernel_matrix(*grid, [&](double r, double s) { return yukawa_sphere_avg(r, s, kp); });
    expk = kernel_matrix(*grid, [&](double r, double s) { return exp_sphere_avg(r, s, kp); });
  }
};

/// Coulomb kernel matrix for one grid.
struct CoulombOps {
  GridPtr grid;
  Eigen::MatrixXd coulomb;  // 1/max(r, s)

  explicit CoulombOps(GridPtr g) : grid(std::move(g)) {
    coulomb = kernel_matrix(*grid, [](double r, double s) { return coulomb_sphere_avg(r, s); });
  }
};

namespace detail {

/// Keyed cache; entries are invalidated when their grid dies.
template <class V>
class GridCache {
 public:
  template <class... Args>
  std::shared_ptr<const V> get(const GridPtr& grid, double key, Args&&... args) {
    const Entry id{grid.get(), key};
    {
      std::lock_guard<std::mutex> lk(mu_);
      auto it = map_.find(id);
      if (it != map_.end()) {
        if (auto g = it->second.first.lock(); g.get() == grid.get()) return it->second.second;
        map_.erase(it);
      }
    }
    auto v = std::make_shared<const V>(grid, std::forward<Args>(args)...);
    std::lock_guard<std::mutex> lk(mu_);
    map_[id] = {std::weak_ptr<const RadialGrid>(grid), v};
    return v;
  }

 private:
  using Entry = std::pair<const RadialGrid*, double>;
  std::mutex mu_;
  std::map<Entry, std::pair<std::weak_ptr<const RadialGrid>, std::shared_ptr<const V>>> map_;
};

}  // namespace detail

inline std::shared_ptr<const KernelOps> kernel_ops(const GridPtr& grid, double a) {
  static detail::GridCache<KernelOps> cache;
  return cache.get(grid, a, a);
}

inline std::shared_ptr<const CoulombOps> coulomb_ops(const GridPtr& grid) {
  static detail::GridCache<CoulombOps> cache;
  return cache.get(grid, 0.0);
}

inline std::shared_ptr<const RieszOperator> riesz_operator(const GridPtr& grid, double omega) {
  static detail::GridCache<RieszOperator> cache;
  return cache.get(grid, omega, omega);
}

/// Double radial form f^T B g with B_ij = (4 pi)^2 w_i M_ij, approximating
/// (4 pi)^2 int int A(r, s) f(r) g(s) r^2 s^2 dr ds.
inline double double_form(const RadialGrid& grid, const Eigen::MatrixXd& m,
                          const Eigen::VectorXd& f, const Eigen::VectorXd& g) {
  const Eigen::VectorXd mg = m * g;
  return kFourPi * kFourPi * (grid.weights().array() * f.array() * mg.array()).sum();
}

/// Symmetrized action (B + B^T) x / 2 scaled back to node values:
/// returns y with y_i = [(B + B^T) x]_i / (2 * 4 pi w_i); the exact weak-form
/// potential appearing in the discrete derivative of the interaction term.
inline Eigen::VectorXd sym_kernel_apply(const RadialGrid& grid, const Eigen::MatrixXd& m,
                                        const Eigen::VectorXd& x) {
  const auto& w = grid.weights();
  Eigen::VectorXd left = m * x;                                      // M x
  Eigen::VectorXd right = m.transpose() * (w.array() * x.array()).matrix();
  return 0.5 * kFourPi * (left + (right.array() / w.array()).matrix());
}

}  // namespace sbp
