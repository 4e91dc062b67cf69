#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "spst/linalg.hpp"
#include "spst/matrix.hpp"

namespace spst {

// Feasibility / tangency certification tolerances shared across the toolkit.
inline constexpr double tol_feas = 1e-8;
inline constexpr double tol_tan = 1e-8;

// --- Poisson-matrix helpers ------------------------------------------------
//
// J denotes the canonical skew form [[0, I], [-I, 0]]. Products with J are
// row/column shuffles with sign flips, so never materialize J in hot paths.

inline void require_even_rows(const DenseMatrix& m, const char* who) {
  if (m.rows() % 2 != 0)
    throw OddDimension(std::string(who) + ": row count " + std::to_string(m.rows()) +
                       " is odd");
}

inline void require_even_cols(const DenseMatrix& m, const char* who) {
  if (m.cols() % 2 != 0)
    throw OddDimension(std::string(who) + ": column count " +
                       std::to_string(m.cols()) + " is odd");
}

// J * X  (top half of the result is the bottom half of X, negated bottom).
inline DenseMatrix jmul(const DenseMatrix& x) {
  require_even_rows(x, "jmul");
  const std::size_t m = x.rows() / 2, c = x.cols();
  DenseMatrix out(2 * m, c);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      out(i, j) = x(m + i, j);
      out(m + i, j) = -x(i, j);
    }
  return out;
}

// J^T * X = -J * X.
inline DenseMatrix jtmul(const DenseMatrix& x) {
  DenseMatrix out = jmul(x);
  out *= -1.0;
  return out;
}

// X * J.
inline DenseMatrix mulj(const DenseMatrix& x) {
  require_even_cols(x, "mulj");
  const std::size_t r = x.rows(), m = x.cols() / 2;
  DenseMatrix out(r, 2 * m);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      out(i, j) = -x(i, m + j);
      out(i, m + j) = x(i, j);
    }
  return out;
}

// X * J^T = -X * J.
inline DenseMatrix muljt(const DenseMatrix& x) {
  DenseMatrix out = mulj(x);
  out *= -1.0;
  return out;
}

// Materialized J, for tests and small dense work.
inline DenseMatrix symplectic_j(std::size_t two_m) {
  if (two_m % 2 != 0) throw OddDimension("symplectic_j: odd size");
  return jmul(DenseMatrix::identity(two_m));
}

struct SymplecticStructure {
  std::size_t n = 0;  // half dimension
  DenseMatrix j() const { return symplectic_j(2 * n); }
};

// Symplectic inverse W^+ = J^T W^T J for W of shape 2m x 2l.
inline DenseMatrix sympl_inverse(const DenseMatrix& w) {
  require_even_rows(w, "sympl_inverse");
  require_even_cols(w, "sympl_inverse");
  return jtmul(mulj(w.transpose()));
}

// Canonical selector basis point: columns e_1..e_k, e_{n+1}..e_{n+k}.
inline DenseMatrix selector_point(std::size_t n, std::size_t k) {
  if (k > n) throw ShapeMismatch("selector_point: k > n");
  DenseMatrix e(2 * n, 2 * k);
  for (std::size_t j = 0; j < k; ++j) {
    e(j, j) = 1.0;
    e(n + j, k + j) = 1.0;
  }
  return e;
}

// Feasibility defect ||U^+ U - I||_F.
inline double check_point(const DenseMatrix& u) {
  require_even_rows(u, "check_point");
  require_even_cols(u, "check_point");
  if (u.cols() > u.rows()) throw ShapeMismatch("check_point: more columns than rows");
  DenseMatrix r = sympl_inverse(u) * u;
  for (std::size_t i = 0; i < r.rows(); ++i) r(i, i) -= 1.0;
  return r.frobenius_norm();
}

// --- Certified point / tangent types ---------------------------------------

class ManifoldPoint {
 public:
  explicit ManifoldPoint(DenseMatrix u) : u_(std::move(u)) {
    init_dims();
    double feas = check_point(u_);
    if (!(feas <= tol_feas))
      throw InfeasibleBase("feasibility defect " + std::to_string(feas));
  }

  // Wrap without the feasibility certificate; structural checks still apply.
  // Retraction outputs use this so large-step drift stays observable.
  static ManifoldPoint uncertified(DenseMatrix u) {
    ManifoldPoint p;
    p.u_ = std::move(u);
    p.init_dims();
    return p;
  }

  const DenseMatrix& matrix() const { return u_; }
  std::size_t n() const { return n_; }
  std::size_t k() const { return k_; }
  double feasibility() const { return check_point(u_); }

 private:
  ManifoldPoint() = default;

  void init_dims() {
    require_even_rows(u_, "ManifoldPoint");
    require_even_cols(u_, "ManifoldPoint");
    if (u_.cols() > u_.rows())
      throw ShapeMismatch("ManifoldPoint: more columns than rows");
    n_ = u_.rows() / 2;
    k_ = u_.cols() / 2;
  }

  DenseMatrix u_;
  std::size_t n_ = 0, k_ = 0;
};

// Tangency defect via the restriction-of-form identity: Delta is tangent at U
// iff Delta^+ U + U^+ Delta = 0.
inline double check_tangent(const DenseMatrix& u, const DenseMatrix& delta) {
  if (!u.same_shape(delta)) throw ShapeMismatch("check_tangent: shape mismatch");
  DenseMatrix s = sympl_inverse(delta) * u + sympl_inverse(u) * delta;
  return s.frobenius_norm();
}

class TangentVector {
 public:
  TangentVector(ManifoldPoint base, DenseMatrix delta)
      : base_(std::move(base)), delta_(std::move(delta)) {
    if (!base_.matrix().same_shape(delta_))
      throw ShapeMismatch("TangentVector: base/delta shape mismatch");
    double defect = check_tangent(base_.matrix(), delta_);
    if (!(defect <= tol_tan * (1.0 + delta_.frobenius_norm())))
      throw NotTangent("tangency defect " + std::to_string(defect));
  }

  static TangentVector trusted(ManifoldPoint base, DenseMatrix delta) {
    return TangentVector(std::move(base), std::move(delta), 0);
  }

  const DenseMatrix& matrix() const { return delta_; }
  const ManifoldPoint& base() const { return base_; }

 private:
  TangentVector(ManifoldPoint base, DenseMatrix delta, int)
      : base_(std::move(base)), delta_(std::move(delta)) {}

  ManifoldPoint base_;
  DenseMatrix delta_;
};

// --- Metric ------------------------------------------------------------------

// Per-point cache for the right-invariant metric: one Cholesky of U^T U plus
// the rotated frame J^T U serve every inner product at that point.
struct MetricContext {
  explicit MetricContext(const DenseMatrix& u)
      : u_mat(u), chol(u.transpose() * u), b(jtmul(u)) {}

  DenseMatrix u_mat;
  CholeskyFactor chol;
  DenseMatrix b;  // J^T U
};

inline double metric(const MetricContext& ctx, const DenseMatrix& x1,
                     const DenseMatrix& x2) {
  if (!x1.same_shape(x2) || !x1.same_shape(ctx.u_mat))
    throw ShapeMismatch("metric: shape mismatch");
  DenseMatrix w2 = ctx.chol.solve_right(x2);  // X2 (U^T U)^{-1}
  double t1 = dot(x1, w2);
  DenseMatrix m1 = x1.transpose() * ctx.b;            // X1^T J^T U
  DenseMatrix m2 = ctx.b.transpose() * w2;            // U^T J X2 (U^T U)^{-1}
  DenseMatrix n2 = ctx.chol.solve(m2);                // (U^T U)^{-1} ...
  return t1 - 0.5 * dot(m1.transpose(), n2);
}

inline double metric(const DenseMatrix& u, const DenseMatrix& x1,
                     const DenseMatrix& x2) {
  return metric(MetricContext(u), x1, x2);
}

inline double metric(const ManifoldPoint& u, const TangentVector& x1,
                     const TangentVector& x2) {
  if (!(x1.base().matrix() == u.matrix()) || !(x2.base().matrix() == u.matrix()))
    throw BaseMismatch("metric: tangent vectors rooted at a different point");
  return metric(u.matrix(), x1.matrix(), x2.matrix());
}

inline double norm_g(const MetricContext& ctx, const DenseMatrix& x) {
  return std::sqrt(std::max(0.0, metric(ctx, x, x)));
}

inline double norm_g(const DenseMatrix& u, const DenseMatrix& x) {
  return norm_g(MetricContext(u), x);
}

// --- Projections and the Riemannian gradient ---------------------------------

// Tangent projection onto the symplectic group at M (square feasible M).
inline DenseMatrix proj_sp(const DenseMatrix& m, const DenseMatrix& v) {
  if (m.rows() != m.cols()) throw ShapeMismatch("proj_sp: base must be square");
  double feas = check_point(m);
  if (!(feas <= tol_feas))
    throw InfeasibleBase("proj_sp base defect " + std::to_string(feas));
  return 0.5 * v - 0.5 * (m * (sympl_inverse(v) * m));
}

// Tangent projection at U: V - (1/2) J^T U (U^T U)^{-1} J (V^+ U + U^+ V).
inline DenseMatrix proj_spst(const DenseMatrix& u, const DenseMatrix& v) {
  if (!u.same_shape(v)) throw ShapeMismatch("proj_spst: shape mismatch");
  DenseMatrix s = sympl_inverse(v) * u + sympl_inverse(u) * v;
  DenseMatrix t = cholesky_solve(u.transpose() * u, jmul(s));
  return v - 0.5 * jtmul(u * t);
}

inline TangentVector proj_spst(const ManifoldPoint& u, const DenseMatrix& v) {
  return TangentVector::trusted(u, proj_spst(u.matrix(), v));
}

// Riemannian gradient from the Euclidean one: G (U^T U) + J U G^T J U.
inline DenseMatrix egrad_to_rgrad(const DenseMatrix& u, const DenseMatrix& egrad) {
  if (!u.same_shape(egrad)) throw ShapeMismatch("egrad_to_rgrad: shape mismatch");
  DenseMatrix ju = jmul(u);
  return egrad * (u.transpose() * u) + ju * (egrad.transpose() * ju);
}

inline TangentVector egrad_to_rgrad(const ManifoldPoint& u,
                                    const DenseMatrix& egrad) {
  return TangentVector::trusted(u, egrad_to_rgrad(u.matrix(), egrad));
}

// --- Horizontal lift ----------------------------------------------------------
//
// The lift of a tangent Delta is the Hamiltonian 2n x 2n field Omega with
// Omega U = Delta, stored in factored form Omega = Y X^T with 4k-column
// factors. The auxiliary splitting U A + H (A Hamiltonian, U^+ H = 0) is what
// makes the factors this thin.
struct HorizontalLift {
  DenseMatrix x;  // 2n x 4k
  DenseMatrix y;  // 2n x 4k
  DenseMatrix a;  // 2k x 2k, Hamiltonian
  DenseMatrix h;  // 2n x 2k, U^+ H = 0

  DenseMatrix apply(const DenseMatrix& m) const {  // Omega m
    return y * (x.transpose() * m);
  }
  DenseMatrix apply_t(const DenseMatrix& m) const {  // Omega^T m
    return x * (y.transpose() * m);
  }
  DenseMatrix apply_skew(const DenseMatrix& m) const {  // (Omega - Omega^T) m
    return apply(m) - apply_t(m);
  }
  DenseMatrix dense() const { return y * x.transpose(); }
  DenseMatrix xhat() const { return hcat(y, -1.0 * x); }  // skew part = xhat yhat^T
  DenseMatrix yhat() const { return hcat(x, y); }
};

inline HorizontalLift omega_bar(const DenseMatrix& u, const DenseMatrix& delta) {
  if (!u.same_shape(delta)) throw ShapeMismatch("omega_bar: shape mismatch");
  double defect = check_tangent(u, delta);
  if (!(defect <= tol_tan * (1.0 + delta.frobenius_norm())))
    throw NotTangent("omega_bar: tangency defect " + std::to_string(defect));

  CholeskyFactor chol(u.transpose() * u);
  DenseMatrix up = sympl_inverse(u);   // U^+
  DenseMatrix b = jtmul(u);            // J^T U

  // A = J U^T Delta G^{-1} J + G^{-1} Delta^T U - G^{-1} Delta^T J^T U G^{-1} J.
  DenseMatrix utd = u.transpose() * delta;
  DenseMatrix term1 = jmul(mulj(chol.solve_right(utd)));
  DenseMatrix term2 = chol.solve(delta.transpose() * u);
  DenseMatrix term3 = mulj(chol.solve_right(chol.solve(delta.transpose() * b)));
  DenseMatrix a = term1 + term2 - term3;

  // H = (I - U U^+) J Delta G^{-1} J.
  DenseMatrix w = mulj(chol.solve_right(jmul(delta)));
  DenseMatrix h = w - u * (up * w);

  DenseMatrix dbar = u * a + h;
  DenseMatrix dbar_p = sympl_inverse(dbar);

  // X = [(I - U U^+ / 2) Dbar, -U],  Y = [J^T U J, ((Dbar^+ (I - U U^+ / 2))^T].
  DenseMatrix x = hcat(dbar - 0.5 * (u * (up * dbar)), -1.0 * u);
  DenseMatrix ncol = dbar_p - 0.5 * ((dbar_p * u) * up);
  DenseMatrix y = hcat(mulj(b), ncol.transpose());

  return HorizontalLift{std::move(x), std::move(y), std::move(a), std::move(h)};
}

inline HorizontalLift omega_bar(const ManifoldPoint& u, const TangentVector& delta) {
  if (!(delta.base().matrix() == u.matrix()))
    throw BaseMismatch("omega_bar: tangent rooted elsewhere");
  return omega_bar(u.matrix(), delta.matrix());
}

// Manifold dimension of the constraint set for 2n x 2k points.
inline std::size_t manifold_dim(std::size_t n, std::size_t k) {
  return (4 * n - 2 * k + 1) * k;
}

}  // namespace spst
