#pragma once

#include <cmath>
#include <utility>

#include "spst/manifold.hpp"
#include "spst/matrix.hpp"
#include "spst/problems.hpp"
#include "spst/retraction.hpp"

namespace spst {

// Christoffel form with both slots equal:
//   Gamma(D, D) = -(Omega - Omega^T)(D + Omega^T U) - (Omega^T)^2 U.
// Evaluated on the normalized direction and scaled back by |D|^2, which keeps
// the quadratic dependence explicit and the lift well-conditioned.
inline DenseMatrix christoffel_same(const DenseMatrix& u, const DenseMatrix& d) {
  double scale = d.frobenius_norm();
  if (scale < 1e-15) return DenseMatrix(u.rows(), u.cols());
  DenseMatrix dn = (1.0 / scale) * d;
  HorizontalLift lift = omega_bar(u, dn);
  DenseMatrix w1 = lift.apply_t(u);           // Omega^T U
  DenseMatrix p1 = dn + w1;
  DenseMatrix gamma = -1.0 * lift.apply_skew(p1) - lift.apply_t(w1);
  return (scale * scale) * gamma;
}

// General slots by polarization of the quadratic form, with both inputs
// normalized first so the identity is evaluated at unit scale.
inline DenseMatrix christoffel(const DenseMatrix& u, const DenseMatrix& d1,
                               const DenseMatrix& d2) {
  double s1 = d1.frobenius_norm();
  double s2 = d2.frobenius_norm();
  if (s1 < 1e-15 || s2 < 1e-15) return DenseMatrix(u.rows(), u.cols());
  DenseMatrix a = (1.0 / s1) * d1;
  DenseMatrix b = (1.0 / s2) * d2;
  DenseMatrix plus = christoffel_same(u, a + b);
  DenseMatrix minus = christoffel_same(u, a - b);
  return (0.25 * s1 * s2) * (plus - minus);
}

// Ambient directional derivative of the Riemannian gradient field along D,
// by the product rule on  grad = egrad (U^T U) + J U egrad^T J U.
inline DenseMatrix dgrad_product_rule(const DenseMatrix& u,
                                      const ObjectiveBundle& prob,
                                      const DenseMatrix& d) {
  DenseMatrix g0 = prob.egrad(u);
  DenseMatrix hd = prob.ehess(u, d);
  DenseMatrix ju = jmul(u);
  DenseMatrix jd = jmul(d);
  DenseMatrix out = hd * (u.transpose() * u);
  out += g0 * (d.transpose() * u + u.transpose() * d);
  out += jd * (g0.transpose() * ju);
  out += ju * (hd.transpose() * ju);
  out += ju * (g0.transpose() * jd);
  return out;
}

enum class HessianKind { ExactMetric, ProjectedEuclidean };

// Exact Riemannian Hessian action:
//   Hess f(U)[D] = P_U( D(grad f)(U)[D] + Gamma(grad f(U), D) ).
inline DenseMatrix rhess_exact(const DenseMatrix& u, const ObjectiveBundle& prob,
                               const DenseMatrix& d) {
  DenseMatrix rgrad = egrad_to_rgrad(u, prob.egrad(u));
  DenseMatrix sum = dgrad_product_rule(u, prob, d) + christoffel(u, rgrad, d);
  return proj_spst(u, sum);
}

// Projected-derivative approximation: drop the Christoffel term.
inline DenseMatrix rhess_projected(const DenseMatrix& u,
                                   const ObjectiveBundle& prob,
                                   const DenseMatrix& d) {
  return proj_spst(u, dgrad_product_rule(u, prob, d));
}

// Hessian action at a fixed point with the gradient pieces cached, for inner
// solvers that apply the operator many times per outer iteration.
class HessianOperator {
 public:
  // The gradient is re-projected: the closed-form assembly leaves an absolute
  // tangency defect at the ambient scale, which inner iterations would amplify
  // once the residual norm drops below it.
  HessianOperator(HessianKind kind, const DenseMatrix& u,
                  const ObjectiveBundle& prob)
      : kind_(kind), u_(&u), prob_(&prob),
        rgrad_(proj_spst(u, egrad_to_rgrad(u, prob.egrad(u)))) {}

  const DenseMatrix& rgrad() const { return rgrad_; }

  DenseMatrix apply(const DenseMatrix& d) const {
    DenseMatrix sum = dgrad_product_rule(*u_, *prob_, d);
    if (kind_ == HessianKind::ExactMetric) sum += christoffel(*u_, rgrad_, d);
    return proj_spst(*u_, sum);
  }

 private:
  HessianKind kind_;
  const DenseMatrix* u_;
  const ObjectiveBundle* prob_;
  DenseMatrix rgrad_;
};

// Finite-difference reference for the derivative of the gradient field along
// the exact quasi-geodesic through U with velocity D, projected at U. Used by
// tests to cross-check dgrad_product_rule and the Hessian assembly.
inline DenseMatrix fd_hess_oracle(const DenseMatrix& u, const ObjectiveBundle& prob,
                                  const DenseMatrix& d, double h) {
  DenseMatrix up = geodesic(u, d, h);
  DenseMatrix um = geodesic(u, d, -h);
  DenseMatrix gp = egrad_to_rgrad(up, prob.egrad(up));
  DenseMatrix gm = egrad_to_rgrad(um, prob.egrad(um));
  return proj_spst(u, (0.5 / h) * (gp - gm));
}

}  // namespace spst
