#pragma once

#include <cstdint>
#include <utility>

#include "spst/matrix.hpp"

namespace spst {

struct Seed {
  std::uint64_t value = 0;
};

// splitmix64 stream with a Box-Muller gaussian on top. Deterministic for a
// given seed within one build; no cross-platform bit guarantee is claimed.
class Rng {
 public:
  explicit Rng(Seed seed) : state_(seed.value) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  Seed fork() { return Seed{next_u64()}; }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

// Haar-ish random unitary via modified Gram-Schmidt on a complex gaussian,
// returned as the (real, imaginary) part pair. Columns that collapse are
// redrawn from the same stream, up to five retries in total.
inline std::pair<DenseMatrix, DenseMatrix> complex_qr_unitary(std::size_t n,
                                                              Seed seed) {
  Rng rng(seed);
  DenseMatrix re(n, n), im(n, n);
  int retries = 0;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> vre(n), vim(n);
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) {
        vre[i] = rng.normal();
        vim[i] = rng.normal();
      }
      // Project out earlier columns: v -= (q_i^H v) q_i.
      for (std::size_t p = 0; p < j; ++p) {
        double cre = 0.0, cim = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          cre += re(i, p) * vre[i] + im(i, p) * vim[i];
          cim += re(i, p) * vim[i] - im(i, p) * vre[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
          vre[i] -= cre * re(i, p) - cim * im(i, p);
          vim[i] -= cre * im(i, p) + cim * re(i, p);
        }
      }
      double norm2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) norm2 += vre[i] * vre[i] + vim[i] * vim[i];
      double norm = std::sqrt(norm2);
      if (norm > 1e-13) {
        for (std::size_t i = 0; i < n; ++i) {
          re(i, j) = vre[i] / norm;
          im(i, j) = vim[i] / norm;
        }
        break;
      }
      if (++retries > 5) throw RankDeficient("gaussian columns kept collapsing");
    }
  }
  return {std::move(re), std::move(im)};
}

}  // namespace spst
