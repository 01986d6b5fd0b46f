#pragma once

// Small dense helpers for tests: explicit frame matrices and Kronecker
// assembly, kept independent of the environment code they check.

#include "blocktt/block_tt.hpp"
#include "blocktt/tt_core.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace blocktt::test {

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(gen);
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Kronecker product of per-site factors, first factor slowest.
inline Matrix kron_all(const std::vector<Matrix>& factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const Matrix& f : factors) out = kron(out, f);
  return out;
}

/// Sum over sites of `one_site` placed at site k, identity elsewhere.
inline Matrix kron_sum(const Matrix& one_site, std::size_t d) {
  const Eigen::Index n = one_site.rows();
  Matrix total = Matrix::Zero(static_cast<Eigen::Index>(std::pow(n, d)), static_cast<Eigen::Index>(std::pow(n, d)));
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<Matrix> f(d, Matrix::Identity(n, n));
    f[k] = one_site;
    total += kron_all(f);
  }
  return total;
}

/// Frame matrix of x at site p: column (a, i, b), a fastest, is the dense
/// vector obtained by replacing core p with the unit tensor e_(a,i,b).
inline Matrix frame_matrix(const TTVector& x, std::size_t p) {
  std::vector<TTCore> cores = x.cores();
  const TTCore& c = x.core(p);
  const std::size_t m = c.size();
  Matrix f;
  for (std::size_t col = 0; col < m; ++col) {
    std::vector<double> unit(m, 0.0);
    unit[col] = 1.0;
    cores[p] = TTCore(c.left_rank(), c.mode_size(), c.right_rank(), unit);
    const Vector v = tt_to_dense(TTVector(cores));
    if (col == 0) f.resize(v.size(), static_cast<Eigen::Index>(m));
    f.col(static_cast<Eigen::Index>(col)) = v;
  }
  return f;
}

/// Replaces core p of x by the given data (same shape).
inline TTVector with_core(const TTVector& x, std::size_t p, const Vector& data) {
  std::vector<TTCore> cores = x.cores();
  const TTCore& c = x.core(p);
  cores[p] = TTCore(c.left_rank(), c.mode_size(), c.right_rank(),
                    std::vector<double>(data.data(), data.data() + data.size()));
  return TTVector(cores);
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

/// True when the column spans of two orthonormal blocks agree to `tol`.
inline bool subspace_distance_ok(const Matrix& x, const Matrix& y, double tol) {
  return max_abs(y - x * (x.transpose() * y)) <= tol && max_abs(x - y * (y.transpose() * x)) <= tol;
}

}  // namespace blocktt::test
