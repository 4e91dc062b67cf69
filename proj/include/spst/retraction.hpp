#pragma once

#include <cstddef>
#include <string>
#include <utility>

#include "spst/linalg.hpp"
#include "spst/manifold.hpp"
#include "spst/matrix.hpp"
#include "spst/random.hpp"

namespace spst {

enum class RetractionKind { Geodesic, CayleySimple, CayleyGeodesicLike };
enum class TransportKind { DiffRetraction, Projection };

// Quasi-geodesic through U with velocity Delta: two matrix exponentials of the
// lifted field. Exact curve, but feasibility drifts for large t, so the result
// is returned uncertified.
inline DenseMatrix geodesic(const DenseMatrix& u, const DenseMatrix& delta,
                            double t) {
  HorizontalLift lift = omega_bar(u, delta);
  DenseMatrix omega = lift.dense();
  DenseMatrix skew = omega - omega.transpose();
  return expm(t * skew) * (expm(t * omega.transpose()) * u);
}

inline ManifoldPoint geodesic(const ManifoldPoint& u, const TangentVector& delta,
                              double t) {
  return ManifoldPoint::uncertified(geodesic(u.matrix(), delta.matrix(), t));
}

// Single-factor Cayley retraction cay((t/2) Omega) U through the thin factors.
inline DenseMatrix cayley_simple(const DenseMatrix& u, const DenseMatrix& delta,
                                 double t) {
  HorizontalLift lift = omega_bar(u, delta);
  const std::size_t r = lift.x.cols();
  DenseMatrix core = DenseMatrix::identity(r) -
                     (0.5 * t) * (lift.x.transpose() * lift.y);
  try {
    return u + t * (lift.y * LuFactor(std::move(core)).solve(lift.x.transpose() * u));
  } catch (const SingularMatrix&) {
    throw CayleyPoleHit("single-factor Cayley pole at t = " + std::to_string(t));
  }
}

inline ManifoldPoint cayley_simple(const ManifoldPoint& u,
                                   const TangentVector& delta, double t) {
  return ManifoldPoint::uncertified(cayley_simple(u.matrix(), delta.matrix(), t));
}

// Everything the two-factor Cayley step computes that a follow-up transport
// can reuse: the lifted factors, both core LU factorizations, and the
// mid/endpoint matrices.
struct RetractionWork {
  double t;
  HorizontalLift lift;
  DenseMatrix xhat;  // 2n x 8k
  DenseMatrix yhat;  // 2n x 8k
  LuFactor lu_big;   // I - (t/2) yhat^T xhat
  LuFactor lu_small; // I - (t/2) y^T x
  DenseMatrix mid;   // cay((t/2) Omega^T) U
  DenseMatrix point; // cay((t/2)(Omega - Omega^T)) mid
};

// Two-factor Cayley retraction approximating the quasi-geodesic. All core
// solves are k-sized; the 2n x 2n field is never formed.
inline RetractionWork cayley_retraction_work(const DenseMatrix& u,
                                             const DenseMatrix& delta, double t) {
  HorizontalLift lift = omega_bar(u, delta);
  const std::size_t k2 = u.cols();
  try {
    // Inner factor via the Schur-reduced 2k x 2k core.
    DenseMatrix theta = DenseMatrix::identity(k2) - (0.5 * t) * lift.a +
                        (0.25 * t * t) * (sympl_inverse(lift.h) * lift.h);
    DenseMatrix mid = lu_solve_right(theta, t * lift.h + 2.0 * u) - u;

    // Outer factor applied to mid through the stacked skew factors.
    DenseMatrix xhat = lift.xhat();
    DenseMatrix yhat = lift.yhat();
    LuFactor lu_big(DenseMatrix::identity(xhat.cols()) -
                    (0.5 * t) * (yhat.transpose() * xhat));
    LuFactor lu_small(DenseMatrix::identity(lift.x.cols()) -
                      (0.5 * t) * (lift.y.transpose() * lift.x));
    DenseMatrix point = mid + t * (xhat * lu_big.solve(yhat.transpose() * mid));
    return RetractionWork{t,
                          std::move(lift),
                          std::move(xhat),
                          std::move(yhat),
                          std::move(lu_big),
                          std::move(lu_small),
                          std::move(mid),
                          std::move(point)};
  } catch (const SingularMatrix&) {
    throw CayleyPoleHit("two-factor Cayley pole at t = " + std::to_string(t));
  }
}

inline DenseMatrix cayley_retraction(const DenseMatrix& u, const DenseMatrix& delta,
                                     double t) {
  return cayley_retraction_work(u, delta, t).point;
}

inline ManifoldPoint cayley_retraction(const ManifoldPoint& u,
                                       const TangentVector& delta, double t) {
  return ManifoldPoint::uncertified(
      cayley_retraction(u.matrix(), delta.matrix(), t));
}

inline DenseMatrix retract(const DenseMatrix& u, const DenseMatrix& delta, double t,
                           RetractionKind kind) {
  switch (kind) {
    case RetractionKind::Geodesic:
      return geodesic(u, delta, t);
    case RetractionKind::CayleySimple:
      return cayley_simple(u, delta, t);
    case RetractionKind::CayleyGeodesicLike:
    default:
      return cayley_retraction(u, delta, t);
  }
}

inline ManifoldPoint retract(const ManifoldPoint& u, const TangentVector& delta,
                             double t, RetractionKind kind) {
  return ManifoldPoint::uncertified(retract(u.matrix(), delta.matrix(), t, kind));
}

// Differential of the two-factor retraction at t*eta in direction xi,
// evaluated with the factored resolvents recycled from the retraction step.
// With F1 = (t/2)(Omega_eta - Omega_eta^T) and F2 = (t/2) Omega_eta^T:
//   D = (I-F1)^{-1} (Omega_xi - Omega_xi^T) (I-F1)^{-1} mid
//     + cay(F1) (I-F2)^{-1} Omega_xi^T (I-F2)^{-1} U.
inline DenseMatrix diff_retraction_raw(const RetractionWork& work,
                                       const DenseMatrix& u,
                                       const HorizontalLift& lift_xi) {
  const double t = work.t;
  auto inv_skew = [&](const DenseMatrix& m) {  // (I - F1)^{-1} m
    return m + (0.5 * t) * (work.xhat * work.lu_big.solve(work.yhat.transpose() * m));
  };
  auto cay_skew = [&](const DenseMatrix& m) {  // cay(F1) m
    return m + t * (work.xhat * work.lu_big.solve(work.yhat.transpose() * m));
  };
  auto inv_upper = [&](const DenseMatrix& m) {  // (I - F2)^{-1} m
    return m + (0.5 * t) *
                   (work.lift.x * work.lu_small.solve(work.lift.y.transpose() * m));
  };
  DenseMatrix term1 = inv_skew(lift_xi.apply_skew(inv_skew(work.mid)));
  DenseMatrix term2 = cay_skew(inv_upper(lift_xi.apply_t(inv_upper(u))));
  return term1 + term2;
}

inline TangentVector diff_retraction(const ManifoldPoint& u,
                                     const TangentVector& eta,
                                     const TangentVector& xi, double t) {
  RetractionWork work = cayley_retraction_work(u.matrix(), eta.matrix(), t);
  HorizontalLift lift_xi = omega_bar(u.matrix(), xi.matrix());
  DenseMatrix out = diff_retraction_raw(work, u.matrix(), lift_xi);
  return TangentVector::trusted(ManifoldPoint::uncertified(work.point),
                                std::move(out));
}

// Transport by re-projection onto the target tangent space.
inline DenseMatrix transport_proj(const DenseMatrix& target, const DenseMatrix& xi) {
  return proj_spst(target, xi);
}

inline TangentVector transport_proj(const ManifoldPoint& target,
                                    const TangentVector& xi) {
  return TangentVector::trusted(target, proj_spst(target.matrix(), xi.matrix()));
}

// Norm-preserving transport of xi along the step t*eta: move by the chosen
// rule, then rescale so the metric length at the target matches the length at
// the source. A vanishing xi transports to the zero vector.
inline TangentVector isometric_transport(const ManifoldPoint& u,
                                         const TangentVector& eta,
                                         const TangentVector& xi, double t,
                                         TransportKind kind) {
  RetractionWork work = cayley_retraction_work(u.matrix(), eta.matrix(), t);
  ManifoldPoint target = ManifoldPoint::uncertified(work.point);
  double src_norm = norm_g(u.matrix(), xi.matrix());
  if (src_norm < 1e-15)
    return TangentVector::trusted(std::move(target),
                                  DenseMatrix(u.matrix().rows(), u.matrix().cols()));
  DenseMatrix moved;
  if (kind == TransportKind::DiffRetraction) {
    HorizontalLift lift_xi = omega_bar(u.matrix(), xi.matrix());
    moved = diff_retraction_raw(work, u.matrix(), lift_xi);
  } else {
    moved = proj_spst(target.matrix(), xi.matrix());
  }
  double dst_norm = norm_g(target.matrix(), moved);
  if (dst_norm < 1e-15)
    return TangentVector::trusted(std::move(target),
                                  DenseMatrix(u.matrix().rows(), u.matrix().cols()));
  moved *= src_norm / dst_norm;
  return TangentVector::trusted(std::move(target), std::move(moved));
}

// --- Random generators -------------------------------------------------------

inline TangentVector random_tangent(const ManifoldPoint& u, Seed seed) {
  Rng rng(seed);
  DenseMatrix d = proj_spst(u.matrix(),
                            gaussian_matrix(u.matrix().rows(), u.matrix().cols(), rng));
  double nrm = d.frobenius_norm();
  if (nrm < 1e-15) throw ZeroVector("random tangent collapsed under projection");
  d *= 1.0 / nrm;
  return TangentVector::trusted(u, std::move(d));
}

// Random feasible point: a moderate Cayley step from the selector basis point
// along a normalized random tangent. Certified on return.
inline ManifoldPoint random_point(std::size_t n, std::size_t k, Seed seed) {
  DenseMatrix e = selector_point(n, k);
  Rng rng(seed);
  DenseMatrix d = proj_spst(e, gaussian_matrix(2 * n, 2 * k, rng));
  double nrm = d.frobenius_norm();
  if (nrm < 1e-15) throw ZeroVector("random direction collapsed under projection");
  d *= 1.0 / nrm;
  return ManifoldPoint(cayley_simple(e, d, 0.5));
}

}  // namespace spst
