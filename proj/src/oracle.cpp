#include "blocktt/oracle.hpp"

#include "blocktt/errors.hpp"
#include "blocktt/local_solver.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace blocktt {

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

bool has_orthonormal_columns(const Matrix& m) {
  const Matrix g = m.transpose() * m;
  return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= 1e-12;
}

}  // namespace

Matrix densify_operator(const TTMatrix& a, std::size_t cap) {
  std::size_t total = 1;
  for (std::size_t n : a.mode_sizes()) {
    if (total > cap / n) throw SizeLimitError("densify_operator: dimension exceeds cap " + std::to_string(cap));
    total *= n;
  }
  // acc[h]: sum over all paths ending in channel h of the Kronecker products so far.
  std::vector<Matrix> acc{Matrix::Ones(1, 1)};
  for (std::size_t k = 0; k < a.dim(); ++k) {
    const OperatorCore& c = a.core(k);
    const Eigen::Index rows = acc[0].rows() * idx(c.mode_size());
    std::vector<Matrix> next(c.right_rank(), Matrix::Zero(rows, rows));
    for (std::size_t g = 0; g < c.left_rank(); ++g) {
      for (std::size_t h = 0; h < c.right_rank(); ++h) {
        const Matrix b = c.block(g, h);
        if (b.cwiseAbs().maxCoeff() == 0.0) continue;
        next[h] += Eigen::kroneckerProduct(acc[g], b).eval();
      }
    }
    acc = std::move(next);
  }
  return acc[0];
}

DenseSpectrum dense_eig(const Matrix& m, std::size_t count) {
  if (m.rows() != m.cols()) throw std::invalid_argument("dense_eig: matrix is not square");
  const double scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("dense_eig: matrix is not symmetric");
  }
  if (count > static_cast<std::size_t>(m.rows())) throw std::invalid_argument("dense_eig: count exceeds dimension");
  DenseSpectrum out;
  lowest_eigenpairs(0.5 * (m + m.transpose()), count, out.eigenvalues, out.eigenvectors);
  return out;
}

SubspaceAngle subspace_angle(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) throw std::invalid_argument("subspace_angle: column counts differ");
  if (x.rows() != y.rows()) throw std::invalid_argument("subspace_angle: row counts differ");
  SubspaceAngle out;
  Matrix qx = x, qy = y;
  if (!has_orthonormal_columns(qx)) {
    qx = orthonormalize(qx, 0.0);
    out.orthonormalized = true;
  }
  if (!has_orthonormal_columns(qy)) {
    qy = orthonormalize(qy, 0.0);
    out.orthonormalized = true;
  }
  if (qx.cols() != x.cols() || qy.cols() != y.cols()) {
    throw std::invalid_argument("subspace_angle: blocks are rank deficient");
  }
  if (x.cols() == 0) return out;
  Eigen::JacobiSVD<Matrix> svd(qx.transpose() * qy);
  const double smin = std::clamp(svd.singularValues().minCoeff(), 0.0, 1.0);
  out.angle = std::acos(smin);
  return out;
}

double subspace_angle_from_gram(const Matrix& cross, const Matrix& gx, const Matrix& gy) {
  if (cross.rows() != gx.rows() || cross.cols() != gy.rows() || cross.rows() != cross.cols()) {
    throw std::invalid_argument("subspace_angle_from_gram: shape mismatch");
  }
  if (cross.size() == 0) return 0.0;
  auto inv_sqrt = [](const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (g + g.transpose()));
    if (es.eigenvalues().minCoeff() <= 0.0) throw std::invalid_argument("subspace_angle_from_gram: singular Gram matrix");
    return Matrix(es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                  es.eigenvectors().transpose());
  };
  Eigen::JacobiSVD<Matrix> svd(inv_sqrt(gx) * cross * inv_sqrt(gy));
  return std::acos(std::clamp(svd.singularValues().minCoeff(), 0.0, 1.0));
}

std::vector<std::pair<std::size_t, std::size_t>> group_levels(const std::vector<double>& values,
                                                              double rel_gap) {
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  if (values.empty()) return groups;
  const double span = values.back() - values.front();
  std::size_t begin = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] - values[i - 1] > rel_gap * span) {
      groups.emplace_back(begin, i);
      begin = i;
    }
  }
  groups.emplace_back(begin, values.size());
  return groups;
}

}  // namespace blocktt
