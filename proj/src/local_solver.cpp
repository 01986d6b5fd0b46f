#include "blocktt/local_solver.hpp"

#include "blocktt/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace blocktt {

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

void project_out(Matrix& v, const Matrix& basis) {
  if (basis.cols() == 0 || v.cols() == 0) return;
  v.noalias() -= basis * (basis.transpose() * v);
}

// One SVQB pass: returns the transform T with (m T) orthonormal.
Matrix svqb_transform(const Matrix& m, double drop) {
  const Eigen::Index k = m.cols();
  Matrix gram = m.transpose() * m;
  Vector scale(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double g = gram(j, j);
    scale[j] = g > 0.0 ? 1.0 / std::sqrt(g) : 0.0;
  }
  gram = scale.asDiagonal() * gram * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  const Vector& theta = es.eigenvalues();
  const double top = k > 0 ? theta[k - 1] : 0.0;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (theta[j] > drop * top && theta[j] > 0.0) keep.push_back(j);
  }
  Matrix t(k, idx(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    t.col(idx(c)) = scale.asDiagonal() * es.eigenvectors().col(keep[c]) / std::sqrt(theta[keep[c]]);
  }
  return t;
}

// Orthonormalizes m in place (two passes) and returns the overall transform.
Matrix orthonormalize_in_place(Matrix& m, double drop) {
  if (m.cols() == 0) return Matrix(0, 0);
  Matrix t = svqb_transform(m, drop);
  m = m * t;
  if (m.cols() == 0) return t;
  const Matrix t2 = svqb_transform(m, 1e-14);
  m = m * t2;
  return t * t2;
}

Vector residual_norms(const Matrix& hx, const Matrix& x, const Vector& lambda) {
  return (hx - x * lambda.asDiagonal()).colwise().norm().transpose();
}

Matrix random_block(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix r(idx(rows), idx(cols));
  for (Eigen::Index j = 0; j < r.cols(); ++j)
    for (Eigen::Index i = 0; i < r.rows(); ++i) r(i, j) = dist(rng);
  return r;
}

// Orthonormal start block of exactly `count` columns in the complement of `constraints`.
Matrix start_block(const Matrix& x0, std::size_t rows, std::size_t count, const Matrix& constraints) {
  Matrix x = x0.cols() >= idx(count) ? Matrix(x0.leftCols(idx(count))) : x0;
  project_out(x, constraints);
  project_out(x, constraints);
  orthonormalize_in_place(x, 1e-10);
  std::uint64_t seed = 0x5eed;
  while (static_cast<std::size_t>(x.cols()) < count) {
    Matrix extra = random_block(rows, count - static_cast<std::size_t>(x.cols()), seed++);
    for (int pass = 0; pass < 2; ++pass) {
      project_out(extra, constraints);
      project_out(extra, x);
    }
    orthonormalize_in_place(extra, 1e-10);
    Matrix joined(idx(rows), x.cols() + extra.cols());
    joined << x, extra;
    x = std::move(joined);
  }
  return x;
}

}  // namespace

void lowest_eigenpairs(Matrix a, std::size_t count, Vector& values, Matrix& vectors) {
  if (count == 0) {
    values.resize(0);
    vectors.resize(a.rows(), 0);
    return;
  }
  const auto m = static_cast<lapack_int>(a.rows());
  const auto k = static_cast<lapack_int>(count);
  Vector w(a.rows());
  vectors.resize(a.rows(), idx(count));
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(std::max<lapack_int>(k, 1)));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', m, a.data(), m, 0.0, 0.0, 1, k, 0.0,
                                         &found, w.data(), vectors.data(), m, support.data());
  if (info != 0 || found != k) {
    throw std::runtime_error("dense eigensolver failed (info " + std::to_string(info) + ")");
  }
  values = w.head(idx(count));
}

LinearOperator as_linear_operator(const LocalOperator& op) {
  LinearOperator lin;
  lin.dim = op.dim();
  lin.apply = [&op](const Matrix& v) { return op.apply(v); };
  lin.diagonal = [&op]() { return op.diagonal(); };
  lin.dense = [&op]() { return op.dense(); };
  return lin;
}

LinearOperator as_linear_operator(const Matrix& m) {
  LinearOperator lin;
  lin.dim = static_cast<std::size_t>(m.rows());
  lin.apply = [&m](const Matrix& v) -> Matrix { return m * v; };
  lin.diagonal = [&m]() -> Vector { return m.diagonal(); };
  lin.dense = [&m]() -> Matrix { return m; };
  return lin;
}

Matrix orthonormalize(const Matrix& m, double drop) {
  Matrix q = m;
  orthonormalize_in_place(q, drop);
  return q;
}

LocalEigResult dense_block_eig(const Matrix& h, std::size_t count, const Matrix& constraints) {
  const auto m = static_cast<std::size_t>(h.rows());
  const auto c = static_cast<std::size_t>(constraints.cols());
  if (m < count + c) {
    throw LocalDimensionError("local problem of dimension " + std::to_string(m) + " cannot hold " +
                              std::to_string(count) + " states");
  }
  const Matrix sym = 0.5 * (h + h.transpose());
  LocalEigResult out;
  out.dense = true;
  if (c == 0) {
    lowest_eigenpairs(sym, count, out.values, out.vectors);
  } else {
    Eigen::HouseholderQR<Matrix> qr(constraints);
    const Matrix full_q = qr.householderQ();
    const Matrix z = full_q.rightCols(idx(m - c));
    Matrix y;
    lowest_eigenpairs(z.transpose() * sym * z, count, out.values, y);
    out.vectors = z * y;
  }
  out.residuals = residual_norms(sym * out.vectors, out.vectors, out.values);
  return out;
}

LocalEigResult lobpcg(const LinearOperator& op, const Matrix& x0, double tol, std::size_t max_iter,
                      const Matrix& constraints, bool diagonal_preconditioner) {
  const std::size_t m = op.dim;
  const auto k = static_cast<std::size_t>(x0.cols());
  const auto ki = idx(k);
  Matrix x = start_block(x0, m, k, constraints);
  Matrix hx = op.apply(x);

  auto rayleigh_ritz = [&](const Matrix& s, const Matrix& hs, Vector& theta, Matrix& coeffs) {
    Matrix t = s.transpose() * hs;
    t = 0.5 * (t + t.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    theta = es.eigenvalues();
    coeffs = es.eigenvectors();
  };

  Vector theta;
  Matrix coeffs;
  rayleigh_ritz(x, hx, theta, coeffs);
  x = x * coeffs;
  hx = hx * coeffs;
  Vector lambda = theta;
  double scale = std::max(theta.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());

  Vector diag;
  if (diagonal_preconditioner && op.diagonal) diag = op.diagonal();

  Matrix p(x.rows(), 0), hp(x.rows(), 0);
  LocalEigResult out;
  std::size_t it = 0;
  for (; it < max_iter; ++it) {
    const Matrix r = hx - x * lambda.asDiagonal();
    const Vector res = r.colwise().norm().transpose();
    std::vector<Eigen::Index> active;
    for (Eigen::Index b = 0; b < ki; ++b) {
      if (res[b] > tol * scale) active.push_back(b);
    }
    if (active.empty()) break;

    Matrix w(r.rows(), idx(active.size()));
    for (std::size_t c = 0; c < active.size(); ++c) w.col(idx(c)) = r.col(active[c]);
    if (diag.size() == idx(m)) {
      for (std::size_t c = 0; c < active.size(); ++c) {
        const double shift = lambda[active[c]];
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
          double den = diag[i] - shift;
          if (std::abs(den) < 1e-8 * scale) den = den < 0 ? -1e-8 * scale : 1e-8 * scale;
          w(i, idx(c)) /= den;
        }
      }
    }
    for (int pass = 0; pass < 2; ++pass) {
      project_out(w, constraints);
      project_out(w, x);
    }
    orthonormalize_in_place(w, 1e-12);
    if (w.cols() == 0) break;
    const Matrix hw = op.apply(w);

    if (p.cols() > 0) {
      for (int pass = 0; pass < 2; ++pass) {
        const Matrix cx = x.transpose() * p;
        const Matrix cw = w.transpose() * p;
        p.noalias() -= x * cx + w * cw;
        hp.noalias() -= hx * cx + hw * cw;
      }
      const Matrix t = orthonormalize_in_place(p, 1e-12);
      hp = hp * t;
    }

    const Eigen::Index q = x.cols() + w.cols() + p.cols();
    Matrix s(x.rows(), q), hs(x.rows(), q);
    s << x, w, p;
    hs << hx, hw, hp;
    rayleigh_ritz(s, hs, theta, coeffs);
    scale = std::max(theta.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    const Matrix c = coeffs.leftCols(ki);
    Matrix ca(q - ki, idx(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a) ca.col(idx(a)) = c.col(active[a]).tail(q - ki);
    p = s.rightCols(q - ki) * ca;
    hp = hs.rightCols(q - ki) * ca;
    x = s * c;
    hx = hs * c;
    lambda = theta.head(ki);

    // Refresh against drift from the implicit updates.
    if ((it + 1) % 25 == 0) {
      orthonormalize_in_place(x, 1e-14);
      hx = op.apply(x);
      Vector th;
      Matrix cf;
      rayleigh_ritz(x, hx, th, cf);
      x = x * cf;
      hx = hx * cf;
      lambda = th;
      p.resize(x.rows(), 0);
      hp.resize(x.rows(), 0);
    }
  }
  out.values = lambda;
  out.vectors = x;
  out.residuals = residual_norms(hx, x, lambda);
  out.iterations = it;
  out.converged = (out.residuals.array() <= tol * scale).all();
  return out;
}

LocalEigResult local_block_eig(const LinearOperator& op, std::size_t count, const Matrix& warm_start,
                               const LocalSolveOptions& options, const Matrix& constraints) {
  const std::size_t m = op.dim;
  const auto c = static_cast<std::size_t>(constraints.cols());
  if (count == 0) throw std::invalid_argument("local_block_eig: count must be positive");
  if (m < count + c) {
    throw LocalDimensionError("local problem of dimension " + std::to_string(m) + " cannot hold " +
                              std::to_string(count) + " states (rmax too small?)");
  }
  auto assemble = [&]() -> Matrix {
    if (op.dense) return op.dense();
    return op.apply(Matrix::Identity(idx(m), idx(m)));
  };
  const bool tiny = m <= 3 * count + c;
  const bool use_dense = options.kind == LocalSolverKind::Dense || tiny ||
                         (options.kind == LocalSolverKind::Auto && m <= options.size_threshold);
  if (use_dense) return dense_block_eig(assemble(), count, constraints);

  // Zero columns are replaced by random directions inside the solver.
  Matrix x0 = Matrix::Zero(idx(m), idx(count));
  if (warm_start.rows() == idx(m)) {
    const Eigen::Index take = std::min(warm_start.cols(), idx(count));
    x0.leftCols(take) = warm_start.leftCols(take);
  }
  LocalEigResult res = lobpcg(op, x0, options.tol, options.max_iter, constraints,
                              options.diagonal_preconditioner);
  if (!res.converged && m <= options.dense_fallback_limit) {
    LocalEigResult dense = dense_block_eig(assemble(), count, constraints);
    dense.iterations = res.iterations;
    return dense;
  }
  return res;
}

}  // namespace blocktt
