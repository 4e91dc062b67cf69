#pragma once

#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spst/linalg.hpp"
#include "spst/manifold.hpp"
#include "spst/matrix.hpp"
#include "spst/random.hpp"
#include "spst/retraction.hpp"

namespace spst {

// A smooth objective on the ambient 2n x 2k space: value, Euclidean gradient,
// and Euclidean Hessian action. Geometry is layered on top elsewhere.
struct ObjectiveBundle {
  std::string name;
  std::function<double(const DenseMatrix&)> f;
  std::function<DenseMatrix(const DenseMatrix&)> egrad;
  std::function<DenseMatrix(const DenseMatrix&, const DenseMatrix&)> ehess;
};

// f(U) = 1/2 ||A - U||_F^2.
inline ObjectiveBundle nearest_problem(DenseMatrix a) {
  auto target = std::make_shared<const DenseMatrix>(std::move(a));
  ObjectiveBundle b;
  b.name = "nearest";
  b.f = [target](const DenseMatrix& u) {
    DenseMatrix r = *target - u;
    double nrm = r.frobenius_norm();
    return 0.5 * nrm * nrm;
  };
  b.egrad = [target](const DenseMatrix& u) { return u - *target; };
  b.ehess = [](const DenseMatrix&, const DenseMatrix& d) { return d; };
  return b;
}

// f(X) = tr(X^T A X) with symmetric A.
inline ObjectiveBundle brockett_problem(DenseMatrix a) {
  if (a.rows() != a.cols()) throw ShapeMismatch("brockett matrix must be square");
  double asym = (a - a.transpose()).frobenius_norm();
  if (asym > 1e-12 * (1.0 + a.frobenius_norm()))
    throw NotSymmetric("brockett matrix asymmetry " + std::to_string(asym));
  auto mat = std::make_shared<const DenseMatrix>(std::move(a));
  ObjectiveBundle b;
  b.name = "brockett";
  b.f = [mat](const DenseMatrix& x) { return dot(x, *mat * x); };
  b.egrad = [mat](const DenseMatrix& x) { return 2.0 * (*mat * x); };
  b.ehess = [mat](const DenseMatrix&, const DenseMatrix& d) {
    return 2.0 * (*mat * d);
  };
  return b;
}

// f(U) = ||S - U U^+ S||_F^2, the symplectic projection residual of S.
inline ObjectiveBundle psd_problem(DenseMatrix s) {
  auto snap = std::make_shared<const DenseMatrix>(std::move(s));
  auto sst = std::make_shared<const DenseMatrix>(*snap * snap->transpose());
  ObjectiveBundle b;
  b.name = "psd";
  b.f = [snap](const DenseMatrix& u) {
    DenseMatrix r = *snap - u * (sympl_inverse(u) * *snap);
    double nrm = r.frobenius_norm();
    return nrm * nrm;
  };
  b.egrad = [sst](const DenseMatrix& u) {
    DenseMatrix up = sympl_inverse(u);
    DenseMatrix w = mulj(*sst * jtmul(u));          // S S^T J^T U J
    DenseMatrix term_a = w - u * (up * w);          // complement-projected
    DenseMatrix ipt_u = u - up.transpose() * (u.transpose() * u);
    DenseMatrix term_b = mulj(jmul(*sst * ipt_u));  // J S S^T (I - U U^+)^T U J
    return -2.0 * (term_a - term_b);
  };
  b.ehess = [sst](const DenseMatrix& u, const DenseMatrix& d) {
    DenseMatrix up = sympl_inverse(u);
    DenseMatrix dp = sympl_inverse(d);
    // The complement derivative -(D U^+ + U D^+) enters through its action.
    DenseMatrix w_u = mulj(*sst * jtmul(u));
    DenseMatrix t1 = -1.0 * (d * (up * w_u)) - u * (dp * w_u);
    DenseMatrix w_d = mulj(*sst * jtmul(d));
    DenseMatrix t2 = w_d - u * (up * w_d);
    DenseMatrix adu_t_u = -1.0 * (up.transpose() * (d.transpose() * u)) -
                          dp.transpose() * (u.transpose() * u);
    DenseMatrix t3 = mulj(jmul(*sst * adu_t_u));
    DenseMatrix ipt_d = d - up.transpose() * (u.transpose() * d);
    DenseMatrix t4 = mulj(jmul(*sst * ipt_d));
    return -2.0 * (t1 + t2) + 2.0 * (t3 + t4);
  };
  return b;
}

// --- Spectral test instances --------------------------------------------------

struct WilliamsonInstance {
  std::size_t n = 0;
  std::size_t l = 0;
  double c = 0.0;
  double d = 0.0;
  std::vector<double> diag;  // 1..n, the planted symplectic spectrum
  DenseMatrix s;             // symplectic congruence factor
  DenseMatrix a;             // SPD matrix with that spectrum
};

// SPD matrix with planted symplectic eigenvalues 1..n: a random unitary frame
// sheared by the symplectic Gauss transformation with parameters (l, c, d).
inline WilliamsonInstance gen_williamson(std::size_t n, std::size_t l, double c,
                                         double d, Seed seed) {
  if (l < 2 || l > n)
    throw BadGaussParams("shear index l = " + std::to_string(l) +
                         " outside [2, " + std::to_string(n) + "]");
  if (c == 0.0) throw BadGaussParams("shear scale c must be nonzero");

  auto [re, im] = complex_qr_unitary(n, seed);
  DenseMatrix k(2 * n, 2 * n);
  k.set_block(0, 0, re);
  k.set_block(0, n, -1.0 * im);
  k.set_block(n, 0, im);
  k.set_block(n, n, re);

  DenseMatrix lmat = DenseMatrix::identity(2 * n);
  lmat(l - 2, l - 2) = c;
  lmat(l - 1, l - 1) = c;
  lmat(n + l - 2, n + l - 2) = 1.0 / c;
  lmat(n + l - 1, n + l - 1) = 1.0 / c;
  lmat(l - 2, n + l - 1) = d;
  lmat(l - 1, n + l - 2) = d;

  WilliamsonInstance inst;
  inst.n = n;
  inst.l = l;
  inst.c = c;
  inst.d = d;
  inst.diag.resize(n);
  DenseMatrix blk(2 * n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    inst.diag[i] = static_cast<double>(i + 1);
    blk(i, i) = inst.diag[i];
    blk(n + i, n + i) = inst.diag[i];
  }
  inst.s = jmul(k * lmat);
  DenseMatrix a = inst.s * blk * inst.s.transpose();
  inst.a = 0.5 * (a + a.transpose());  // scrub roundoff skew; SPD by construction
  return inst;
}

// Symplectic spectrum of an SPD matrix B: the doubled eigenvalues of
// (B^{1/2} J B^{1/2}) (B^{1/2} J B^{1/2})^T are the squares.
inline std::vector<double> symplectic_eigs(const DenseMatrix& b) {
  require_even_rows(b, "symplectic_eigs");
  if (b.rows() != b.cols()) throw ShapeMismatch("symplectic_eigs needs square input");
  const std::size_t p = b.rows() / 2;
  SymEig eig = sym_eig_jacobi(b);
  if (eig.values.front() <= 0.0)
    throw NotPositiveDefinite("smallest eigenvalue " +
                              std::to_string(eig.values.front()));
  DenseMatrix half(2 * p, 2 * p);
  for (std::size_t j = 0; j < 2 * p; ++j) {
    double root = std::sqrt(eig.values[j]);
    for (std::size_t i = 0; i < 2 * p; ++i) half(i, j) = eig.vectors(i, j) * root;
  }
  half = half * eig.vectors.transpose();  // B^{1/2}
  DenseMatrix m = half * jmul(half);
  DenseMatrix mmt = m * m.transpose();
  mmt = 0.5 * (mmt + mmt.transpose());
  SymEig eig2 = sym_eig_jacobi(mmt);

  std::vector<double> out(p);
  for (std::size_t i = 0; i < p; ++i) {
    double lo = eig2.values[2 * i], hi = eig2.values[2 * i + 1];
    double scale = std::max(std::fabs(lo), std::fabs(hi));
    if (std::fabs(hi - lo) > 1e-6 * std::max(scale, 1e-300))
      throw PairingFailure("eigenvalue pair (" + std::to_string(lo) + ", " +
                           std::to_string(hi) + ") at index " + std::to_string(i));
    out[i] = std::sqrt(0.5 * (lo + hi));
  }
  return out;
}

struct PsdInstance {
  std::size_t n = 0, m = 0, r = 0;
  DenseMatrix t;  // feasible frame, 2n x 2r
  DenseMatrix c;  // coefficients, 2r x 2m, unit Frobenius norm
  DenseMatrix s;  // snapshot matrix T C, rank 2r
};

inline PsdInstance gen_psd_instance(std::size_t n, std::size_t m, std::size_t r,
                                    Seed seed) {
  if (r > n) throw ShapeMismatch("gen_psd_instance: r > n");
  Rng master(seed);
  Seed frame_seed = master.fork();
  Seed coeff_seed = master.fork();
  PsdInstance inst;
  inst.n = n;
  inst.m = m;
  inst.r = r;
  inst.t = random_point(n, r, frame_seed).matrix();
  Rng coeff_rng(coeff_seed);
  inst.c = gaussian_matrix(2 * r, 2 * m, coeff_rng);
  inst.c *= 1.0 / inst.c.frobenius_norm();
  inst.s = inst.t * inst.c;
  return inst;
}

// --- Plain-text matrix serialization -------------------------------------------
//
// Format: one header line "rows cols", then one line per row of
// whitespace-separated decimals with 17 significant digits.

inline void save_matrix(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << m.rows() << " " << m.cols() << "\n";
  char buf[64];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << buf << (j + 1 == m.cols() ? "" : " ");
    }
    out << "\n";
  }
  if (!out) throw Error("write failed for " + path);
}

inline DenseMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path + " for reading");
  std::size_t rows = 0, cols = 0;
  if (!(in >> rows >> cols)) throw Error("malformed header in " + path);
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (!(in >> m(i, j))) throw Error("truncated matrix data in " + path);
  return m;
}

}  // namespace spst
