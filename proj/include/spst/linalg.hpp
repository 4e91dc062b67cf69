#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <vector>

#include "spst/matrix.hpp"

namespace spst {

// Default residual tolerance for the direct solvers: ||A X - B||_F must come
// out <= tol_solve * (1 + ||B||_F) for well-conditioned inputs.
inline constexpr double tol_solve = 1e-10;

// LU factorization with partial pivoting, kept around so one factorization
// can serve many right-hand sides.
class LuFactor {
 public:
  explicit LuFactor(DenseMatrix a) : lu_(std::move(a)) {
    if (lu_.rows() != lu_.cols()) throw ShapeMismatch("LU needs a square matrix");
    const std::size_t n = lu_.rows();
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    const double pivot_floor = 1e-14 * lu_.frobenius_norm();
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t best = col;
      double best_val = std::fabs(lu_(col, col));
      for (std::size_t i = col + 1; i < n; ++i) {
        double v = std::fabs(lu_(i, col));
        if (v > best_val) {
          best_val = v;
          best = i;
        }
      }
      if (best_val < pivot_floor || best_val == 0.0)
        throw SingularMatrix("pivot " + std::to_string(best_val) + " at column " +
                             std::to_string(col));
      if (best != col) {
        for (std::size_t j = 0; j < n; ++j) std::swap(lu_(col, j), lu_(best, j));
        std::swap(perm_[col], perm_[best]);
      }
      const double inv_piv = 1.0 / lu_(col, col);
      for (std::size_t i = col + 1; i < n; ++i) {
        const double f = lu_(i, col) * inv_piv;
        lu_(i, col) = f;
        if (f == 0.0) continue;
        const double* prow = lu_.row_ptr(col);
        double* irow = lu_.row_ptr(i);
        for (std::size_t j = col + 1; j < n; ++j) irow[j] -= f * prow[j];
      }
    }
  }

  // Solve A X = B.
  DenseMatrix solve(const DenseMatrix& b) const {
    const std::size_t n = lu_.rows();
    if (b.rows() != n) throw ShapeMismatch("LU solve rhs row mismatch");
    const std::size_t m = b.cols();
    DenseMatrix x(n, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) x(i, j) = b(perm_[i], j);
    // Forward substitution with unit lower triangle.
    for (std::size_t i = 1; i < n; ++i) {
      const double* lrow = lu_.row_ptr(i);
      double* xrow = x.row_ptr(i);
      for (std::size_t p = 0; p < i; ++p) {
        const double f = lrow[p];
        if (f == 0.0) continue;
        const double* prow = x.row_ptr(p);
        for (std::size_t j = 0; j < m; ++j) xrow[j] -= f * prow[j];
      }
    }
    // Back substitution.
    for (std::size_t ii = n; ii-- > 0;) {
      const double* urow = lu_.row_ptr(ii);
      double* xrow = x.row_ptr(ii);
      for (std::size_t p = ii + 1; p < n; ++p) {
        const double f = urow[p];
        if (f == 0.0) continue;
        const double* prow = x.row_ptr(p);
        for (std::size_t j = 0; j < m; ++j) xrow[j] -= f * prow[j];
      }
      const double inv_d = 1.0 / urow[ii];
      for (std::size_t j = 0; j < m; ++j) xrow[j] *= inv_d;
    }
    return x;
  }

 private:
  DenseMatrix lu_;
  std::vector<std::size_t> perm_;
};

inline DenseMatrix lu_solve(const DenseMatrix& a, const DenseMatrix& b) {
  return LuFactor(a).solve(b);
}

// Solve X A = B, i.e. X = B A^{-1}.
inline DenseMatrix lu_solve_right(const DenseMatrix& a, const DenseMatrix& b) {
  return LuFactor(a.transpose()).solve(b.transpose()).transpose();
}

// Cholesky factorization of a symmetric positive definite matrix.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const DenseMatrix& a) : l_(a.rows(), a.rows()) {
    if (a.rows() != a.cols()) throw ShapeMismatch("Cholesky needs a square matrix");
    const std::size_t n = a.rows();
    const double sym_tol = 1e-12 * (1.0 + a.max_abs());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (std::fabs(a(i, j) - a(j, i)) > sym_tol)
          throw NotSymmetric("Cholesky input asymmetric at (" + std::to_string(i) +
                             "," + std::to_string(j) + ")");
    for (std::size_t j = 0; j < n; ++j) {
      double d = a(j, j);
      for (std::size_t p = 0; p < j; ++p) d -= l_(j, p) * l_(j, p);
      if (!(d > 0.0)) throw NotPositiveDefinite("pivot " + std::to_string(d) +
                                                " at index " + std::to_string(j));
      const double ljj = std::sqrt(d);
      l_(j, j) = ljj;
      for (std::size_t i = j + 1; i < n; ++i) {
        double s = a(i, j);
        for (std::size_t p = 0; p < j; ++p) s -= l_(i, p) * l_(j, p);
        l_(i, j) = s / ljj;
      }
    }
  }

  // Solve A X = B with A = L L^T.
  DenseMatrix solve(const DenseMatrix& b) const {
    const std::size_t n = l_.rows();
    if (b.rows() != n) throw ShapeMismatch("Cholesky solve rhs row mismatch");
    const std::size_t m = b.cols();
    DenseMatrix x = b;
    for (std::size_t i = 0; i < n; ++i) {
      double* xrow = x.row_ptr(i);
      const double* lrow = l_.row_ptr(i);
      for (std::size_t p = 0; p < i; ++p) {
        const double f = lrow[p];
        const double* prow = x.row_ptr(p);
        for (std::size_t j = 0; j < m; ++j) xrow[j] -= f * prow[j];
      }
      const double inv_d = 1.0 / lrow[i];
      for (std::size_t j = 0; j < m; ++j) xrow[j] *= inv_d;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double* xrow = x.row_ptr(ii);
      for (std::size_t p = ii + 1; p < n; ++p) {
        const double f = l_(p, ii);
        const double* prow = x.row_ptr(p);
        for (std::size_t j = 0; j < m; ++j) xrow[j] -= f * prow[j];
      }
      const double inv_d = 1.0 / l_(ii, ii);
      for (std::size_t j = 0; j < m; ++j) xrow[j] *= inv_d;
    }
    return x;
  }

  // Solve X A = B for symmetric A (so X = B A^{-1} = (A^{-1} B^T)^T).
  DenseMatrix solve_right(const DenseMatrix& b) const {
    return solve(b.transpose()).transpose();
  }

 private:
  DenseMatrix l_;
};

inline DenseMatrix cholesky_solve(const DenseMatrix& a, const DenseMatrix& b) {
  return CholeskyFactor(a).solve(b);
}

struct SymEig {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // columns are eigenvectors, orthonormal
};

// Cyclic Jacobi eigenvalue iteration for symmetric matrices.
inline SymEig sym_eig_jacobi(const DenseMatrix& a_in) {
  if (a_in.rows() != a_in.cols()) throw ShapeMismatch("sym_eig needs square input");
  const std::size_t n = a_in.rows();
  const double sym_tol = 1e-12 * (1.0 + a_in.max_abs());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::fabs(a_in(i, j) - a_in(j, i)) > sym_tol)
        throw NotSymmetric("sym_eig input asymmetric");

  DenseMatrix a = a_in;
  // Symmetrize exactly so the sweep arithmetic sees one value per pair.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
  DenseMatrix v = DenseMatrix::identity(n);
  const double norm = std::max(a.frobenius_norm(), 1e-300);
  const double stop = 1e-13 * norm;

  auto off_norm = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
  };

  bool converged = (n <= 1) || off_norm() <= stop;
  for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj - s * aqj;
          a(q, j) = s * apj + c * aqj;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
    converged = off_norm() <= stop;
  }
  if (!converged) throw NoConvergence("Jacobi sweeps exhausted");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
  SymEig out;
  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

// Matrix exponential: degree-13 Pade approximant with scaling and squaring.
inline DenseMatrix expm(const DenseMatrix& a_in) {
  if (a_in.rows() != a_in.cols()) throw ShapeMismatch("expm needs square input");
  const std::size_t n = a_in.rows();
  static const double b[14] = {64764752532480000.0, 32382376266240000.0,
                               7771770303897600.0,  1187353796428800.0,
                               129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,
                               1323241920.0,        40840800.0,
                               960960.0,            16380.0,
                               182.0,               1.0};
  const double theta13 = 5.371920351148152;
  DenseMatrix a = a_in;
  int squarings = 0;
  const double nrm = a.one_norm();
  if (nrm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    a *= std::ldexp(1.0, -squarings);
  }
  const DenseMatrix ident = DenseMatrix::identity(n);
  const DenseMatrix a2 = a * a;
  const DenseMatrix a4 = a2 * a2;
  const DenseMatrix a6 = a2 * a4;
  DenseMatrix u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
                       b[5] * a4 + b[3] * a2 + b[1] * ident);
  DenseMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                  b[4] * a4 + b[2] * a2 + b[0] * ident;
  DenseMatrix r = lu_solve(v - u, v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

}  // namespace spst
