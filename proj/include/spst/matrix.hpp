#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace spst {

// Error taxonomy. Everything recoverable derives from Error so callers can
// catch the whole family at an API boundary.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };
struct NotPositiveDefinite : Error { using Error::Error; };
struct NotSymmetric : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct RankDeficient : Error { using Error::Error; };
struct OddDimension : Error { using Error::Error; };
struct InfeasibleBase : Error { using Error::Error; };
struct NotTangent : Error { using Error::Error; };
struct BaseMismatch : Error { using Error::Error; };
struct CayleyPoleHit : Error { using Error::Error; };
struct ZeroVector : Error { using Error::Error; };
struct PairingFailure : Error { using Error::Error; };
struct BadGaussParams : Error { using Error::Error; };

// Dense real matrix, row-major storage. Deliberately minimal: exactly the
// operations the manifold code needs, nothing generic.
class DenseMatrix {
 public:
  DenseMatrix() : rows_(0), cols_(0) {}

  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  DenseMatrix(std::initializer_list<std::initializer_list<double>> init) {
    rows_ = init.size();
    cols_ = rows_ == 0 ? 0 : init.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : init) {
      if (row.size() != cols_) throw ShapeMismatch("ragged initializer");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
  const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

  bool same_shape(const DenseMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  DenseMatrix transpose() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  // Max absolute column sum.
  double one_norm() const {
    double best = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) s += std::fabs((*this)(i, j));
      best = std::max(best, s);
    }
    return best;
  }

  double max_abs() const {
    double best = 0.0;
    for (double v : data_) best = std::max(best, std::fabs(v));
    return best;
  }

  double trace() const {
    double s = 0.0;
    std::size_t m = std::min(rows_, cols_);
    for (std::size_t i = 0; i < m; ++i) s += (*this)(i, i);
    return s;
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  DenseMatrix& operator+=(const DenseMatrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }

  DenseMatrix& operator-=(const DenseMatrix& o) {
    check_same(o);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }

  DenseMatrix& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }

  DenseMatrix block(std::size_t i0, std::size_t j0, std::size_t r,
                    std::size_t c) const {
    if (i0 + r > rows_ || j0 + c > cols_) throw ShapeMismatch("block out of range");
    DenseMatrix b(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) b(i, j) = (*this)(i0 + i, j0 + j);
    return b;
  }

  void set_block(std::size_t i0, std::size_t j0, const DenseMatrix& m) {
    if (i0 + m.rows() > rows_ || j0 + m.cols() > cols_)
      throw ShapeMismatch("set_block out of range");
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) (*this)(i0 + i, j0 + j) = m(i, j);
  }

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  void check_same(const DenseMatrix& o) const {
    if (!same_shape(o))
      throw ShapeMismatch("elementwise op on " + std::to_string(rows_) + "x" +
                          std::to_string(cols_) + " vs " + std::to_string(o.rows_) +
                          "x" + std::to_string(o.cols_));
  }

  std::size_t rows_, cols_;
  std::vector<double> data_;
};

inline DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) {
  a += b;
  return a;
}

inline DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) {
  a -= b;
  return a;
}

inline DenseMatrix operator-(DenseMatrix a) {
  a *= -1.0;
  return a;
}

inline DenseMatrix operator*(DenseMatrix a, double s) {
  a *= s;
  return a;
}

inline DenseMatrix operator*(double s, DenseMatrix a) {
  a *= s;
  return a;
}

inline DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows())
    throw ShapeMismatch("matmul " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " * " + std::to_string(b.rows()) +
                        "x" + std::to_string(b.cols()));
  DenseMatrix c(a.rows(), b.cols());
  const std::size_t m = b.cols(), l = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row_ptr(i);
    double* crow = c.row_ptr(i);
    for (std::size_t p = 0; p < l; ++p) {
      const double aip = arow[p];
      const double* brow = b.row_ptr(p);
      for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
    }
  }
  return c;
}

// Frobenius inner product tr(A^T B).
inline double dot(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) throw ShapeMismatch("dot on mismatched shapes");
  double s = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) s += pa[i] * pb[i];
  return s;
}

inline DenseMatrix hcat(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) throw ShapeMismatch("hcat row mismatch");
  DenseMatrix c(a.rows(), a.cols() + b.cols());
  c.set_block(0, 0, a);
  c.set_block(0, a.cols(), b);
  return c;
}

}  // namespace spst
