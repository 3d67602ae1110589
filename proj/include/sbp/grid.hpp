#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "sbp/errors.hpp"
#include "sbp/numerics.hpp"

namespace sbp {

/// Discretization of [0, r_max] for radial integrals against the r^2 measure.
///
/// Nodes are the images of a uniform grid xi_k = k/n, k = 1..n under the
/// exponentially graded map r = r_max * (e^{c xi} - 1)/(e^c - 1), so they
/// cluster near the origin and r_1 > 0 always. Quadrature weights are
/// Gregory-corrected trapezoid weights in xi (the xi = 0 endpoint carries a
/// known zero integrand because of the r^2 factor), giving
///   sum_i w_i f(r_i) ~= int_0^{r_max} f(r) r^2 dr
/// at order h^8 for smooth f.
///
/// Dirichlet energies use staggered 6th-order first-derivative stencils at
/// the cell midpoints with the composite midpoint rule in between; stencils
/// that would run past the origin are closed by even reflection (radial
/// functions satisfy u(-r) = u(r)), which keeps the assembled weak form
/// consistent up to the first node. Node-centered stencils provide the
/// radial Laplacian.
class RadialGrid {
 public:
  static constexpr int kGregoryOrder = 6;
  static constexpr int kSubCells = 13;

  RadialGrid(int n, double r_max, double grading = 4.0)
      : n_(n), r_max_(r_max), grading_(grading) {
    if (n < 64) throw GridError("RadialGrid: n must be at least 64");
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw GridError("RadialGrid: r_max must be positive");
    if (!(grading > 0.0) || grading > 12.0) throw GridError("RadialGrid: grading out of (0, 12]");
    build();
  }

  int size() const { return n_; }
  double r_max() const { return r_max_; }
  double grading() const { return grading_; }

  const Eigen::VectorXd& nodes() const { return r_; }
  const Eigen::VectorXd& weights() const { return w_; }
  /// Radii of the cell midpoints (between consecutive nodes).
  const Eigen::VectorXd& midpoints() const { return rm_; }
  /// Midpoint weights carrying the r^2 measure: sum_m wm_m g(rm_m) ~=
  /// int g r^2 dr over [r_1, r_max].
  const Eigen::VectorXd& midpoint_weights() const { return wm_; }

  /// Staggered first-derivative operator: node values -> d/dr at midpoints.
  const Eigen::SparseMatrix<double>& d_stag() const { return d_stag_; }
  /// Node-centered first derivative d/dr.
  const Eigen::SparseMatrix<double>& d1() const { return d1_; }
  /// Node-centered second derivative d^2/dr^2.
  const Eigen::SparseMatrix<double>& d2() const { return d2_; }

  double min_spacing() const { return min_spacing_; }

  /// Number of leading xi-cells of kernel row i integrated by the product
  /// sub-rule (kernel evaluated exactly, source interpolated). Always covers
  /// [0, xi_1]; when the diagonal kink lies within the first kSubCells cells
  /// the sub-rule reaches it exactly, so the trapezoid stretch to its right
  /// always spans enough cells for full-order Gregory corrections.
  int sub_cell_count(int i) const { return i + 1 <= kSubCells ? i + 1 : kGregoryOrder + 1; }

  /// Product-quadrature data for xi-cell j (endpoints xi_j, xi_{j+1}).
  struct CellRule {
    std::array<double, 6> sub_r;    // radii of the Gauss sub-points
    std::array<double, 6> sub_w;    // GL weight * jacobian * r^2 at sub-points
    int stencil_lo;                 // first node index of the source stencil
    std::array<std::array<double, 6>, 6> lagrange;  // [sub-point][stencil node]
  };
  const CellRule& cell_rule(int j) const { return cells_[j]; }

  /// Trapezoid + Gregory coefficients (per node, including the r^2 jacobian)
  /// for kernel row i over [xi_L, xi_n], L = sub_cell_count(i), with
  /// corrections on both sides of the diagonal kink s = r_i:
  ///   sum_k v_k A(r_i, s_k) f(s_k) + (sub-rule cells)
  ///     ~= int_0^{r_max} A(r_i, s) f(s) s^2 ds.
  std::vector<double> kernel_row_base(int i) const {
    const int vi = i + 1;  // virtual sample index of the kink
    const int L = sub_cell_count(i);
    std::vector<double> cv(static_cast<std::size_t>(n_) + 1, 0.0);
    for (int v = L; v <= n_; ++v) cv[v] = h_;
    cv[L] = 0.5 * h_;
    cv[n_] = 0.5 * h_;
    if (vi <= L || vi >= n_) {
      gregory_left(cv, L, n_, kGregoryOrder, h_);
      gregory_right(cv, n_, L, kGregoryOrder, h_);
    } else {
      gregory_left(cv, L, vi, kGregoryOrder, h_);
      gregory_right(cv, vi, L, kGregoryOrder, h_);
      gregory_left(cv, vi, n_, kGregoryOrder, h_);
      gregory_right(cv, n_, vi, kGregoryOrder, h_);
    }
    std::vector<double> v(n_);
    for (int k = 0; k < n_; ++k) v[k] = cv[k + 1] * jac_[k];
    return v;
  }

  /// Interpolates node values at an arbitrary radius in [0, r_max] with a
  /// local degree-7 Lagrange stencil.
  double interpolate(const Eigen::VectorXd& values, double r) const {
    if (!(r >= 0.0) || r > r_max_ * (1.0 + 1e-12))
      throw DomainError("RadialGrid::interpolate: radius outside [0, r_max]");
    r = std::min(r, r_max_);
    const double xi = map_inverse(r);
    int lo = static_cast<int>(std::floor(xi / h_)) - 4;  // node index, 0-based
    lo = std::clamp(lo, 0, n_ - 8);
    std::vector<double> xs(8);
    for (int j = 0; j < 8; ++j) xs[j] = (lo + j + 1) * h_;
    const auto wts = fornberg_weights(xi, xs, 0);
    double v = 0.0;
    for (int j = 0; j < 8; ++j) v += wts[j][0] * values[lo + j];
    return v;
  }

  double map(double xi) const { return r_max_ * std::expm1(grading_ * xi) / std::expm1(grading_); }
  double map_inverse(double r) const {
    return std::log1p(r / r_max_ * std::expm1(grading_)) / grading_;
  }

 private:
  double map_deriv(double xi) const {
    return r_max_ * grading_ * std::exp(grading_ * xi) / std::expm1(grading_);
  }

  void build() {
    h_ = 1.0 / n_;
    r_.resize(n_);
    jac_.resize(n_);
    for (int k = 0; k < n_; ++k) {
      const double xi = (k + 1) * h_;
      r_[k] = map(xi);
      jac_[k] = map_deriv(xi) * r_[k] * r_[k];
    }
    min_spacing_ = r_[0];
    for (int k = 1; k < n_; ++k) min_spacing_ = std::min(min_spacing_, r_[k] - r_[k - 1]);

    // Node quadrature weights (Gregory-corrected trapezoid in xi).
    {
      std::vector<double> cv(static_cast<std::size_t>(n_) + 1, h_);
      cv[0] = 0.5 * h_;
      cv[n_] = 0.5 * h_;
      gregory_left(cv, 0, n_, kGregoryOrder, h_);
      gregory_right(cv, n_, 0, kGregoryOrder, h_);
      w_.resize(n_);
      for (int k = 0; k < n_; ++k) w_[k] = cv[k + 1] * jac_[k];
    }
    for (int k = 0; k < n_; ++k)
      if (!(w_[k] > 0.0)) throw GridError("RadialGrid: nonpositive quadrature weight");
    const double exact = r_max_ * r_max_ * r_max_ / 3.0;
    if (std::abs(w_.sum() - exact) > 1e-10 * exact)
      throw GridError("RadialGrid: quadrature exactness check failed; refine n or reduce grading");

    build_midpoints();
    build_derivatives();
    build_cell_rules();
  }

  void build_cell_rules() {
    static constexpr std::array<double, 6> gx = {
        -0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
        0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
    static constexpr std::array<double, 6> gw = {
        0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
        0.4679139345726910, 0.3607615730481386, 0.1713244923791704};
    std::vector<double> xs(6);
    for (int j = 0; j < kSubCells; ++j) {
      CellRule& c = cells_[j];
      c.stencil_lo = std::clamp(j - 3, 0, n_ - 6);
      for (int k = 0; k < 6; ++k) xs[k] = (c.stencil_lo + k + 1) * h_;
      const double mid = (j + 0.5) * h_, half = 0.5 * h_;
      for (int g = 0; g < 6; ++g) {
        const double xi = mid + half * gx[g];
        c.sub_r[g] = map(xi);
        c.sub_w[g] = gw[g] * half * map_deriv(xi) * c.sub_r[g] * c.sub_r[g];
        const auto lw = fornberg_weights(xi, xs, 0);
        for (int k = 0; k < 6; ++k) c.lagrange[g][k] = lw[k][0];
      }
    }
  }

  void build_midpoints() {
    const int nm = n_ - 1;
    rm_.resize(nm);
    wm_.resize(nm);
    // Composite midpoint rule in xi; endpoint Euler-Maclaurin terms carry an
    // r^2 weight at the origin and boundary decay at r_max, so they are
    // negligible for admissible functions, and every weight stays positive.
    // The first cell [0, r_1] contributes O(r_1^5) to gradient integrals.
    for (int k = 0; k < nm; ++k) {
      const double xi = (k + 1.5) * h_;
      rm_[k] = map(xi);
      wm_[k] = h_ * map_deriv(xi) * rm_[k] * rm_[k];
      if (!(wm_[k] > 0.0)) throw GridError("RadialGrid: nonpositive midpoint weight");
    }
  }

  /// Derivative stencil in r over 0-based node indices lo..lo+width-1, with
  /// negative indices folded back by even reflection: node -1-j sits at
  /// -r_j and carries the value u_j.
  void reflected_stencil(double r_eval, int lo, int width, int order,
                         std::vector<Eigen::Triplet<double>>& out, int row) {
    std::vector<double> xs(width);
    for (int j = 0; j < width; ++j) {
      const int k = lo + j;
      xs[j] = k >= 0 ? r_[k] : -r_[-1 - k];
    }
    const auto wts = fornberg_weights(r_eval, xs, order);
    for (int j = 0; j < width; ++j) {
      const int k = lo + j;
      out.emplace_back(row, k >= 0 ? k : -1 - k, wts[j][order]);
    }
  }

  void build_derivatives() {
    using T = Eigen::Triplet<double>;
    // staggered: 6-node stencils in r at cell midpoints, even-reflected
    // through the origin on the left, shifted inside on the right
    {
      std::vector<T> trip;
      trip.reserve(6 * (n_ - 1));
      for (int k = 0; k < n_ - 1; ++k) {
        const int lo = std::min(k - 2, n_ - 6);
        reflected_stencil(rm_[k], lo, 6, 1, trip, k);
      }
      d_stag_.resize(n_ - 1, n_);
      d_stag_.setFromTriplets(trip.begin(), trip.end());
    }
    // node-centered first and second derivatives, 7-node stencils
    {
      std::vector<T> t1, t2;
      t1.reserve(7 * n_);
      t2.reserve(7 * n_);
      for (int k = 0; k < n_; ++k) {
        const int lo = std::min(k - 3, n_ - 7);
        reflected_stencil(r_[k], lo, 7, 1, t1, k);
        reflected_stencil(r_[k], lo, 7, 2, t2, k);
      }
      d1_.resize(n_, n_);
      d1_.setFromTriplets(t1.begin(), t1.end());
      d2_.resize(n_, n_);
      d2_.setFromTriplets(t2.begin(), t2.end());
    }
  }

  int n_;
  double r_max_, grading_, h_ = 0.0, min_spacing_ = 0.0;
  Eigen::VectorXd r_, w_, rm_, wm_;
  std::vector<double> jac_;
  Eigen::SparseMatrix<double> d_stag_, d1_, d2_;
  std::array<CellRule, kSubCells> cells_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_grid(int n, double r_max, double grading = 4.0) {
  return std::make_shared<const RadialGrid>(n, r_max, grading);
}

/// Real values on the nodes of a RadialGrid; represents u, phi and auxiliary
/// radial fields.
struct RadialFunction {
  GridPtr grid;
  Eigen::VectorXd values;

  RadialFunction() = default;
  RadialFunction(GridPtr g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid || values.size() != grid->size())
      throw GridError("RadialFunction: values/grid size mismatch");
  }

  static RadialFunction zero(GridPtr g) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(g->size());
    return RadialFunction(std::move(g), std::move(v));
  }

  template <class F>
  static RadialFunction from_function(GridPtr g, F&& f) {
    Eigen::VectorXd v(g->size());
    for (int i = 0; i < g->size(); ++i) v[i] = f(g->nodes()[i]);
    return RadialFunction(std::move(g), std::move(v));
  }

  bool finite() const { return values.allFinite(); }

  /// Boundary decay test: |u(r_max)| <= 1e-6 * max |u| (zero functions pass).
  bool h1_admissible() const {
    if (!finite()) return false;
    const double m = values.cwiseAbs().maxCoeff();
    if (m == 0.0) return true;
    return std::abs(values[values.size() - 1]) <= 1e-6 * m;
  }

  double operator()(double r) const { return grid->interpolate(values, r); }
};

inline void require_admissible(const RadialFunction& u, const char* where) {
  if (!u.finite()) throw AdmissibilityError(std::string(where) + ": non-finite values");
  if (!u.h1_admissible())
    throw AdmissibilityError(std::string(where) + ": boundary decay check failed");
}

inline void require_same_grid(const RadialFunction& a, const RadialFunction& b, const char* where) {
  if (a.grid.get() != b.grid.get()) throw GridError(std::string(where) + ": grid mismatch");
}

}  // namespace sbp
