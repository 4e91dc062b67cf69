#include <gtest/gtest.h>

#include <cmath>

#include "spst/linalg.hpp"
#include "spst/manifold.hpp"
#include "spst/matrix.hpp"
#include "spst/random.hpp"

namespace {

using spst::DenseMatrix;

// Test-local generators built from dense formulas only, so the library's
// factored code paths are exercised against an independent construction.

DenseMatrix dense_omega(const DenseMatrix& u, const DenseMatrix& d) {
  const std::size_t n2 = u.rows();
  DenseMatrix g = u.transpose() * u;
  DenseMatrix gi = spst::lu_solve(g, DenseMatrix::identity(g.rows()));
  DenseMatrix jn = spst::symplectic_j(n2);
  DenseMatrix core = DenseMatrix::identity(n2) -
                     jn.transpose() * u * gi * u.transpose() * jn;
  return d * gi * u.transpose() + jn * u * gi * d.transpose() * core * jn;
}

DenseMatrix dense_cay(const DenseMatrix& m) {
  DenseMatrix ident = DenseMatrix::identity(m.rows());
  return spst::lu_solve(ident - m, ident + m);
}

DenseMatrix random_feasible(std::size_t n, std::size_t k, std::uint64_t seed) {
  spst::Rng rng(spst::Seed{seed});
  DenseMatrix e = spst::selector_point(n, k);
  DenseMatrix d = spst::proj_spst(e, spst::gaussian_matrix(2 * n, 2 * k, rng));
  d *= 1.0 / d.frobenius_norm();
  return dense_cay(0.25 * dense_omega(e, d)) * e;
}

DenseMatrix random_tangent_at(const DenseMatrix& u, spst::Rng& rng) {
  return spst::proj_spst(u, spst::gaussian_matrix(u.rows(), u.cols(), rng));
}

TEST(JHelpersTest, MatchDenseProducts) {
  spst::Rng rng(spst::Seed{1});
  DenseMatrix x = spst::gaussian_matrix(6, 4, rng);
  DenseMatrix j6 = spst::symplectic_j(6);
  DenseMatrix j4 = spst::symplectic_j(4);
  EXPECT_LE((spst::jmul(x) - j6 * x).frobenius_norm(), 1e-15);
  EXPECT_LE((spst::jtmul(x) - j6.transpose() * x).frobenius_norm(), 1e-15);
  EXPECT_LE((spst::mulj(x) - x * j4).frobenius_norm(), 1e-15);
  EXPECT_LE((spst::muljt(x) - ((x * j4) * -1.0)).frobenius_norm(), 1e-15);
  EXPECT_LE((j6 * j6 + DenseMatrix::identity(6)).frobenius_norm(), 1e-15);
  EXPECT_LE((j6 + j6.transpose()).frobenius_norm(), 1e-15);
  EXPECT_THROW(spst::jmul(spst::gaussian_matrix(5, 2, rng)), spst::OddDimension);
  EXPECT_THROW(spst::symplectic_j(7), spst::OddDimension);
  spst::SymplecticStructure s{3};
  EXPECT_TRUE(s.j() == j6);
}

TEST(SympInverseTest, MatchesDefinitionAndInverts) {
  spst::Rng rng(spst::Seed{2});
  DenseMatrix w = spst::gaussian_matrix(8, 4, rng);
  DenseMatrix want =
      spst::symplectic_j(4).transpose() * w.transpose() * spst::symplectic_j(8);
  EXPECT_LE((spst::sympl_inverse(w) - want).frobenius_norm(), 1e-14);

  DenseMatrix u = random_feasible(5, 2, 3);
  DenseMatrix gram = spst::sympl_inverse(u) * u;
  EXPECT_LE((gram - DenseMatrix::identity(4)).frobenius_norm(), 1e-12);

  DenseMatrix m = random_feasible(4, 4, 4);  // square: group element
  EXPECT_LE((spst::sympl_inverse(m) * m - DenseMatrix::identity(8)).frobenius_norm(),
            1e-11);
  EXPECT_LE((m * spst::sympl_inverse(m) - DenseMatrix::identity(8)).frobenius_norm(),
            1e-11);
  EXPECT_THROW(spst::sympl_inverse(spst::gaussian_matrix(3, 2, rng)),
               spst::OddDimension);
}

TEST(SelectorTest, CanonicalBasisPoint) {
  DenseMatrix e = spst::selector_point(5, 2);
  EXPECT_EQ(spst::check_point(e), 0.0);
  EXPECT_DOUBLE_EQ(e(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(e(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(e(5, 2), 1.0);
  EXPECT_DOUBLE_EQ(e(6, 3), 1.0);
  EXPECT_NEAR(e.frobenius_norm(), 2.0, 1e-15);
  EXPECT_THROW(spst::selector_point(2, 3), spst::ShapeMismatch);
}

TEST(CheckPointTest, DetectsInfeasibility) {
  DenseMatrix u = random_feasible(6, 2, 5);
  EXPECT_LE(spst::check_point(u), 1e-12);
  u(0, 0) += 0.01;
  EXPECT_GT(spst::check_point(u), 1e-4);
  spst::Rng rng(spst::Seed{6});
  EXPECT_THROW(spst::check_point(spst::gaussian_matrix(5, 4, rng)),
               spst::OddDimension);
  EXPECT_THROW(spst::check_point(spst::gaussian_matrix(4, 6, rng)),
               spst::ShapeMismatch);
}

TEST(ManifoldPointTest, CertifiesAtConstruction) {
  DenseMatrix u = random_feasible(5, 2, 7);
  spst::ManifoldPoint p(u);
  EXPECT_EQ(p.n(), 5u);
  EXPECT_EQ(p.k(), 2u);
  EXPECT_LE(p.feasibility(), 1e-12);

  spst::Rng rng(spst::Seed{8});
  DenseMatrix bad = spst::gaussian_matrix(10, 4, rng);
  EXPECT_THROW(spst::ManifoldPoint{bad}, spst::InfeasibleBase);
  EXPECT_NO_THROW(spst::ManifoldPoint::uncertified(bad));
}

TEST(TangentVectorTest, CertifiesTangency) {
  DenseMatrix u = random_feasible(5, 2, 9);
  spst::ManifoldPoint p(u);
  spst::Rng rng(spst::Seed{10});
  DenseMatrix v = spst::gaussian_matrix(10, 4, rng);
  EXPECT_THROW(spst::TangentVector(p, v), spst::NotTangent);
  DenseMatrix t = spst::proj_spst(u, v);
  EXPECT_NO_THROW(spst::TangentVector(p, t));
  EXPECT_THROW(spst::TangentVector(p, spst::gaussian_matrix(10, 2, rng)),
               spst::ShapeMismatch);
}

TEST(ProjSpStTest, IdempotentTangentOutput) {
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    DenseMatrix u = random_feasible(6, 2, seed);
    spst::Rng rng(spst::Seed{seed + 100});
    DenseMatrix v = spst::gaussian_matrix(12, 4, rng);
    DenseMatrix p = spst::proj_spst(u, v);
    EXPECT_LE(spst::check_tangent(u, p), 1e-11 * (1.0 + p.frobenius_norm()));
    DenseMatrix pp = spst::proj_spst(u, p);
    EXPECT_LE((pp - p).frobenius_norm(), 1e-12 * (1.0 + p.frobenius_norm()));
  }
}

TEST(ProjSpStTest, KillsNormalVectors) {
  DenseMatrix u = random_feasible(6, 2, 14);
  spst::Rng rng(spst::Seed{15});
  DenseMatrix t = spst::gaussian_matrix(4, 4, rng);
  DenseMatrix skew = t - t.transpose();
  DenseMatrix normal = spst::jmul(u) * skew * (u.transpose() * u);
  EXPECT_LE(spst::proj_spst(u, normal).frobenius_norm(),
            1e-10 * (1.0 + normal.frobenius_norm()));
}

TEST(ProjSpStTest, MetricOrthogonalComplement) {
  DenseMatrix u = random_feasible(6, 2, 16);
  spst::Rng rng(spst::Seed{17});
  DenseMatrix v = spst::gaussian_matrix(12, 4, rng);
  DenseMatrix resid = v - spst::proj_spst(u, v);
  for (int i = 0; i < 5; ++i) {
    DenseMatrix t = random_tangent_at(u, rng);
    EXPECT_LE(std::fabs(spst::metric(u, resid, t)),
              1e-10 * (1.0 + resid.frobenius_norm() * t.frobenius_norm()));
  }
}

TEST(ProjSpTest, GroupProjection) {
  DenseMatrix m = random_feasible(4, 4, 18);
  spst::Rng rng(spst::Seed{19});
  DenseMatrix v = spst::gaussian_matrix(8, 8, rng);
  DenseMatrix p = spst::proj_sp(m, v);
  EXPECT_LE(spst::check_tangent(m, p), 1e-10 * (1.0 + p.frobenius_norm()));
  EXPECT_LE((spst::proj_sp(m, p) - p).frobenius_norm(),
            1e-10 * (1.0 + p.frobenius_norm()));

  DenseMatrix s = spst::gaussian_matrix(8, 8, rng);
  s -= s.transpose();
  DenseMatrix normal = s * spst::muljt(DenseMatrix::identity(8)) * m;
  EXPECT_LE(spst::proj_sp(m, normal).frobenius_norm(),
            1e-10 * (1.0 + normal.frobenius_norm()));

  EXPECT_THROW(spst::proj_sp(spst::gaussian_matrix(8, 8, rng), v),
               spst::InfeasibleBase);
  EXPECT_THROW(spst::proj_sp(random_feasible(4, 2, 1), v), spst::ShapeMismatch);
}

TEST(MetricTest, SymmetricBilinearPositive) {
  DenseMatrix u = random_feasible(6, 2, 20);
  spst::Rng rng(spst::Seed{21});
  DenseMatrix x1 = random_tangent_at(u, rng);
  DenseMatrix x2 = random_tangent_at(u, rng);
  DenseMatrix x3 = random_tangent_at(u, rng);
  spst::MetricContext ctx(u);
  EXPECT_NEAR(spst::metric(ctx, x1, x2), spst::metric(ctx, x2, x1),
              1e-12 * (1.0 + std::fabs(spst::metric(ctx, x1, x2))));
  double lhs = spst::metric(ctx, x1 + 2.0 * x2, x3);
  double rhs = spst::metric(ctx, x1, x3) + 2.0 * spst::metric(ctx, x2, x3);
  EXPECT_NEAR(lhs, rhs, 1e-11 * (1.0 + std::fabs(lhs)));
  EXPECT_GT(spst::metric(ctx, x1, x1), 0.0);
  EXPECT_NEAR(spst::norm_g(ctx, x1), std::sqrt(spst::metric(ctx, x1, x1)), 1e-13);
}

TEST(MetricTest, GroupCaseCoincidesWithQuarterTrace) {
  // At k = n the metric must equal (1/2) tr((X1 M^+)^T X2 M^+).
  DenseMatrix m = random_feasible(4, 4, 22);
  spst::Rng rng(spst::Seed{23});
  DenseMatrix x1 = random_tangent_at(m, rng);
  DenseMatrix x2 = random_tangent_at(m, rng);
  DenseMatrix mp = spst::sympl_inverse(m);
  double want = 0.5 * spst::dot(x1 * mp, x2 * mp);
  double got = spst::metric(m, x1, x2);
  EXPECT_NEAR(got, want, 1e-11 * (1.0 + std::fabs(want)));
}

TEST(MetricTest, RightInvarianceOnGroup) {
  DenseMatrix m = random_feasible(4, 4, 24);
  DenseMatrix q = random_feasible(4, 4, 25);
  spst::Rng rng(spst::Seed{26});
  DenseMatrix x1 = random_tangent_at(m, rng);
  DenseMatrix x2 = random_tangent_at(m, rng);
  double before = spst::metric(m, x1, x2);
  double after = spst::metric(m * q, x1 * q, x2 * q);
  EXPECT_NEAR(before, after, 1e-10 * (1.0 + std::fabs(before)));
}

TEST(MetricTest, TypedOverloadChecksBases) {
  spst::ManifoldPoint p1(random_feasible(5, 2, 27));
  spst::ManifoldPoint p2(random_feasible(5, 2, 28));
  spst::Rng rng(spst::Seed{29});
  spst::TangentVector t1 = spst::proj_spst(p1, spst::gaussian_matrix(10, 4, rng));
  spst::TangentVector t2 = spst::proj_spst(p2, spst::gaussian_matrix(10, 4, rng));
  EXPECT_NO_THROW(spst::metric(p1, t1, t1));
  EXPECT_THROW(spst::metric(p1, t1, t2), spst::BaseMismatch);
}

TEST(RgradTest, DualityAgainstFrobeniusDifferential) {
  for (std::uint64_t seed : {30ull, 31ull}) {
    DenseMatrix u = random_feasible(6, 2, seed);
    spst::Rng rng(spst::Seed{seed + 50});
    DenseMatrix egrad = spst::gaussian_matrix(12, 4, rng);
    DenseMatrix rgrad = spst::egrad_to_rgrad(u, egrad);
    EXPECT_LE(spst::check_tangent(u, rgrad), 1e-10 * (1.0 + rgrad.frobenius_norm()));
    spst::MetricContext ctx(u);
    for (int i = 0; i < 10; ++i) {
      DenseMatrix t = random_tangent_at(u, rng);
      double pairing = spst::dot(egrad, t);
      double riem = spst::metric(ctx, rgrad, t);
      EXPECT_NEAR(riem, pairing, 1e-10 * (1.0 + std::fabs(pairing)));
    }
  }
}

TEST(OmegaBarTest, ReproducesTangentAndDenseForm) {
  for (std::uint64_t seed : {32ull, 33ull, 34ull}) {
    DenseMatrix u = random_feasible(6, 2, seed);
    spst::Rng rng(spst::Seed{seed + 60});
    DenseMatrix d = random_tangent_at(u, rng);
    spst::HorizontalLift lift = spst::omega_bar(u, d);

    EXPECT_LE((lift.apply(u) - d).frobenius_norm(),
              1e-11 * (1.0 + d.frobenius_norm()));
    DenseMatrix dense = lift.dense();
    DenseMatrix oracle = dense_omega(u, d);
    EXPECT_LE((dense - oracle).frobenius_norm(),
              1e-10 * (1.0 + oracle.frobenius_norm()));
    // Hamiltonian: Omega^+ = -Omega.
    EXPECT_LE((spst::sympl_inverse(dense) + dense).frobenius_norm(),
              1e-10 * (1.0 + dense.frobenius_norm()));
    EXPECT_LE((spst::sympl_inverse(lift.a) + lift.a).frobenius_norm(),
              1e-10 * (1.0 + lift.a.frobenius_norm()));
    EXPECT_LE((spst::sympl_inverse(u) * lift.h).frobenius_norm(),
              1e-11 * (1.0 + lift.h.frobenius_norm()));
    // The auxiliary vector U A + H is itself tangent at U.
    DenseMatrix dbar = u * lift.a + lift.h;
    EXPECT_LE(spst::check_tangent(u, dbar), 1e-10 * (1.0 + dbar.frobenius_norm()));
    // Skew part in factored form.
    DenseMatrix skew = dense - dense.transpose();
    EXPECT_LE((lift.xhat() * lift.yhat().transpose() - skew).frobenius_norm(),
              1e-10 * (1.0 + skew.frobenius_norm()));
  }
}

TEST(OmegaBarTest, CoreBlockStructure) {
  DenseMatrix u = random_feasible(5, 2, 35);
  spst::Rng rng(spst::Seed{36});
  DenseMatrix d = random_tangent_at(u, rng);
  spst::HorizontalLift lift = spst::omega_bar(u, d);
  const std::size_t k2 = 4;
  DenseMatrix core = lift.y.transpose() * lift.x;  // 4k x 4k
  DenseMatrix hp_h = spst::sympl_inverse(lift.h) * lift.h;
  DenseMatrix a2 = lift.a * lift.a;
  DenseMatrix want(2 * k2, 2 * k2);
  want.set_block(0, 0, 0.5 * lift.a);
  want.set_block(0, k2, -1.0 * DenseMatrix::identity(k2));
  want.set_block(k2, 0, hp_h - 0.25 * a2);
  want.set_block(k2, k2, 0.5 * lift.a);
  EXPECT_LE((core - want).frobenius_norm(), 1e-10 * (1.0 + want.frobenius_norm()));
}

TEST(OmegaBarTest, HorizontalFixedPoint) {
  DenseMatrix u = random_feasible(5, 2, 37);
  spst::Rng rng(spst::Seed{38});
  DenseMatrix d = random_tangent_at(u, rng);
  DenseMatrix omega = spst::omega_bar(u, d).dense();
  DenseMatrix jn = spst::symplectic_j(10);
  DenseMatrix p = jn.transpose() * u * spst::sympl_inverse(u) * jn;
  DenseMatrix fixed = omega * p + p * omega - p * omega * p;
  EXPECT_LE((fixed - omega).frobenius_norm(),
            1e-10 * (1.0 + omega.frobenius_norm()));
}

TEST(OmegaBarTest, RejectsNonTangentInput) {
  DenseMatrix u = random_feasible(5, 2, 39);
  spst::Rng rng(spst::Seed{40});
  EXPECT_THROW(spst::omega_bar(u, spst::gaussian_matrix(10, 4, rng)),
               spst::NotTangent);
}

TEST(SymplInverseRulesTest, CalculationIdentities) {
  for (std::uint64_t seed : {41ull, 42ull, 43ull, 44ull}) {
    for (auto [n, k] : {std::pair<std::size_t, std::size_t>{5, 2}, {20, 3}}) {
      DenseMatrix u = random_feasible(n, k, seed * 31 + n);
      spst::Rng rng(spst::Seed{seed});
      DenseMatrix v = spst::gaussian_matrix(2 * n, 2 * k, rng);
      DenseMatrix g = u.transpose() * u;
      DenseMatrix gi = spst::lu_solve(g, DenseMatrix::identity(2 * k));

      DenseMatrix lhs1 = spst::sympl_inverse(gi);
      DenseMatrix rhs1 =
          spst::lu_solve(spst::sympl_inverse(g), DenseMatrix::identity(2 * k));
      EXPECT_LE((lhs1 - rhs1).frobenius_norm(), 1e-12 * rhs1.frobenius_norm());

      DenseMatrix s = spst::sympl_inverse(v) * u + spst::sympl_inverse(u) * v;
      EXPECT_LE((spst::sympl_inverse(s) - s).frobenius_norm(),
                1e-12 * (1.0 + s.frobenius_norm()));

      DenseMatrix lhs3 = spst::sympl_inverse(u) * spst::sympl_inverse(u.transpose());
      DenseMatrix rhs3 = spst::sympl_inverse(g);
      EXPECT_LE((lhs3 - rhs3).frobenius_norm(), 1e-12 * rhs3.frobenius_norm());
    }
  }
}

TEST(DimensionTest, TangentSpaceRankMatchesFormula) {
  // Map V -> P(V) on 4x2 ambient space as an 8x8 matrix; its rank must equal
  // the manifold dimension (4n - 2k + 1)k = 7 at n = 2, k = 1.
  DenseMatrix u = random_feasible(2, 1, 45);
  const std::size_t dim = 8;
  DenseMatrix pmat(dim, dim);
  for (std::size_t c = 0; c < dim; ++c) {
    DenseMatrix basis(4, 2);
    basis(c / 2, c % 2) = 1.0;
    DenseMatrix img = spst::proj_spst(u, basis);
    for (std::size_t r = 0; r < dim; ++r) pmat(r, c) = img(r / 2, r % 2);
  }
  spst::SymEig eig = spst::sym_eig_jacobi(pmat.transpose() * pmat);
  std::size_t rank = 0;
  for (double lam : eig.values)
    if (lam > 0.25) ++rank;
  EXPECT_EQ(rank, spst::manifold_dim(2, 1));
  EXPECT_EQ(spst::manifold_dim(2, 1), 7u);
  EXPECT_EQ(spst::manifold_dim(100, 10), 3810u);
}

}  // namespace
