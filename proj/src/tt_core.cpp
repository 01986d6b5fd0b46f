#include "blocktt/tt_core.hpp"

#include "blocktt/errors.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace blocktt {

namespace {

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    return std::numeric_limits<std::size_t>::max();
  }
  return a * b;
}

void left_orthogonalize(std::vector<TTCore>& cores, std::size_t k) {
  TTCore& cur = cores[k];
  auto [q, r] = thin_qr(Matrix(cur.left_unfolding()));
  const std::size_t new_rank = static_cast<std::size_t>(q.cols());
  TTCore& next = cores[k + 1];
  Matrix merged = r * next.right_unfolding();
  TTCore new_next(new_rank, next.mode_size(), next.right_rank());
  new_next.right_unfolding() = merged;
  TTCore new_cur(cur.left_rank(), cur.mode_size(), new_rank);
  new_cur.left_unfolding() = q;
  cur = std::move(new_cur);
  next = std::move(new_next);
}

void right_orthogonalize(std::vector<TTCore>& cores, std::size_t k) {
  TTCore& cur = cores[k];
  auto [q, r] = thin_qr(Matrix(cur.right_unfolding().transpose()));
  const std::size_t new_rank = static_cast<std::size_t>(q.cols());
  TTCore& prev = cores[k - 1];
  Matrix merged = prev.left_unfolding() * r.transpose();
  TTCore new_prev(prev.left_rank(), prev.mode_size(), new_rank);
  new_prev.left_unfolding() = merged;
  TTCore new_cur(new_rank, cur.mode_size(), cur.right_rank());
  new_cur.right_unfolding() = q.transpose();
  cur = std::move(new_cur);
  prev = std::move(new_prev);
}

void check_same_modes(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                      const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": mode sizes do not match");
}

}  // namespace

// ---------------------------------------------------------------------------
// TTCore

TTCore::TTCore(std::size_t left_rank, std::size_t mode_size, std::size_t right_rank)
    : left_rank_(left_rank),
      mode_size_(mode_size),
      right_rank_(right_rank),
      data_(left_rank * mode_size * right_rank, 0.0) {}

TTCore::TTCore(std::size_t left_rank, std::size_t mode_size, std::size_t right_rank,
               std::vector<double> data)
    : left_rank_(left_rank), mode_size_(mode_size), right_rank_(right_rank), data_(std::move(data)) {
  if (data_.size() != left_rank * mode_size * right_rank) {
    throw std::invalid_argument("TTCore: data length does not match shape");
  }
}

MatrixMap TTCore::left_unfolding() {
  return {data_.data(), static_cast<Eigen::Index>(left_rank_ * mode_size_),
          static_cast<Eigen::Index>(right_rank_)};
}
ConstMatrixMap TTCore::left_unfolding() const {
  return {data_.data(), static_cast<Eigen::Index>(left_rank_ * mode_size_),
          static_cast<Eigen::Index>(right_rank_)};
}
MatrixMap TTCore::right_unfolding() {
  return {data_.data(), static_cast<Eigen::Index>(left_rank_),
          static_cast<Eigen::Index>(mode_size_ * right_rank_)};
}
ConstMatrixMap TTCore::right_unfolding() const {
  return {data_.data(), static_cast<Eigen::Index>(left_rank_),
          static_cast<Eigen::Index>(mode_size_ * right_rank_)};
}

Matrix TTCore::slice(std::size_t i) const {
  Matrix s(left_rank_, right_rank_);
  for (std::size_t b = 0; b < right_rank_; ++b)
    for (std::size_t a = 0; a < left_rank_; ++a) s(a, b) = (*this)(a, i, b);
  return s;
}

bool TTCore::is_left_orthogonal(double tol) const {
  const Matrix g = left_unfolding().transpose() * left_unfolding();
  return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= tol;
}

bool TTCore::is_right_orthogonal(double tol) const {
  const Matrix g = right_unfolding() * right_unfolding().transpose();
  return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() <= tol;
}

// ---------------------------------------------------------------------------
// TTVector

TTVector::TTVector(std::vector<TTCore> cores, std::optional<std::size_t> center)
    : cores_(std::move(cores)), center_(center) {
  if (cores_.empty()) throw std::invalid_argument("TTVector: no cores");
  if (cores_.front().left_rank() != 1 || cores_.back().right_rank() != 1) {
    throw std::invalid_argument("TTVector: boundary ranks must be 1");
  }
  for (std::size_t k = 0; k + 1 < cores_.size(); ++k) {
    if (cores_[k].right_rank() != cores_[k + 1].left_rank()) {
      throw std::invalid_argument("TTVector: rank chain broken at bond " + std::to_string(k));
    }
  }
  if (center_ && *center_ >= cores_.size()) {
    throw std::invalid_argument("TTVector: center out of range");
  }
}

std::vector<std::size_t> TTVector::mode_sizes() const {
  std::vector<std::size_t> n;
  n.reserve(cores_.size());
  for (const auto& c : cores_) n.push_back(c.mode_size());
  return n;
}

std::vector<std::size_t> TTVector::ranks() const {
  std::vector<std::size_t> r;
  for (std::size_t k = 0; k + 1 < cores_.size(); ++k) r.push_back(cores_[k].right_rank());
  return r;
}

std::size_t TTVector::full_size() const {
  std::size_t n = 1;
  for (const auto& c : cores_) n = saturating_mul(n, c.mode_size());
  return n;
}

// ---------------------------------------------------------------------------
// OperatorCore / TTMatrix

OperatorCore::OperatorCore(std::size_t left_rank, std::size_t mode_size, std::size_t right_rank)
    : left_rank_(left_rank),
      mode_size_(mode_size),
      right_rank_(right_rank),
      data_(left_rank * mode_size * mode_size * right_rank, 0.0) {}

void OperatorCore::set_block(std::size_t g, std::size_t h, const Matrix& block) {
  if (block.rows() != static_cast<Eigen::Index>(mode_size_) ||
      block.cols() != static_cast<Eigen::Index>(mode_size_)) {
    throw std::invalid_argument("OperatorCore::set_block: block has wrong size");
  }
  for (std::size_t j = 0; j < mode_size_; ++j)
    for (std::size_t i = 0; i < mode_size_; ++i) (*this)(g, i, j, h) = block(i, j);
}

Matrix OperatorCore::block(std::size_t g, std::size_t h) const {
  Matrix m(mode_size_, mode_size_);
  for (std::size_t j = 0; j < mode_size_; ++j)
    for (std::size_t i = 0; i < mode_size_; ++i) m(i, j) = (*this)(g, i, j, h);
  return m;
}

bool OperatorCore::blocks_symmetric(double tol) const {
  for (std::size_t h = 0; h < right_rank_; ++h)
    for (std::size_t g = 0; g < left_rank_; ++g)
      for (std::size_t j = 0; j < mode_size_; ++j)
        for (std::size_t i = j + 1; i < mode_size_; ++i)
          if (std::abs((*this)(g, i, j, h) - (*this)(g, j, i, h)) > tol) return false;
  return true;
}

TTMatrix::TTMatrix(std::vector<OperatorCore> cores, std::optional<bool> symmetric)
    : cores_(std::move(cores)) {
  if (cores_.empty()) throw std::invalid_argument("TTMatrix: no cores");
  if (cores_.front().left_rank() != 1 || cores_.back().right_rank() != 1) {
    throw std::invalid_argument("TTMatrix: boundary ranks must be 1");
  }
  for (std::size_t k = 0; k + 1 < cores_.size(); ++k) {
    if (cores_[k].right_rank() != cores_[k + 1].left_rank()) {
      throw std::invalid_argument("TTMatrix: rank chain broken at bond " + std::to_string(k));
    }
  }
  if (symmetric) {
    symmetric_ = *symmetric;
  } else {
    symmetric_ = std::all_of(cores_.begin(), cores_.end(), [](const OperatorCore& c) {
      double scale = 0.0;
      for (double v : c.data()) scale = std::max(scale, std::abs(v));
      return c.blocks_symmetric(1e-13 * scale);
    });
  }
}

std::vector<std::size_t> TTMatrix::mode_sizes() const {
  std::vector<std::size_t> n;
  for (const auto& c : cores_) n.push_back(c.mode_size());
  return n;
}

std::vector<std::size_t> TTMatrix::ranks() const {
  std::vector<std::size_t> r;
  for (std::size_t k = 0; k + 1 < cores_.size(); ++k) r.push_back(cores_[k].right_rank());
  return r;
}

// ---------------------------------------------------------------------------
// Dense helpers

ThinSVD thin_svd(const Matrix& m) {
  const Eigen::Index rows = m.rows(), cols = m.cols(), k = std::min(rows, cols);
  ThinSVD out{Matrix::Zero(rows, k), Vector::Zero(k), Matrix::Zero(cols, k)};
  if (k == 0) return out;
  if (!m.allFinite()) throw std::invalid_argument("thin_svd: matrix has non-finite entries");
  const auto lr = static_cast<lapack_int>(rows), lc = static_cast<lapack_int>(cols), lk = static_cast<lapack_int>(k);
  Matrix vt(k, cols);
  Matrix a = m;
  lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', lr, lc, a.data(), lr, out.s.data(), out.u.data(), lr,
                                   vt.data(), lk);
  if (info != 0) {
    a = m;
    Vector superb(std::max<Eigen::Index>(k - 1, 1));
    info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', lr, lc, a.data(), lr, out.s.data(), out.u.data(), lr,
                          vt.data(), lk, superb.data());
  }
  if (info != 0) throw std::runtime_error("thin_svd: LAPACK failed with info " + std::to_string(info));
  out.v = vt.transpose();
  return out;
}

std::pair<Matrix, Matrix> thin_qr(const Matrix& m) {
  const Eigen::Index k = std::min(m.rows(), m.cols());
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), k);
  Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  return {std::move(q), std::move(r)};
}

std::size_t truncation_rank(const Vector& s, double budget, std::size_t rmax) {
  const auto n = static_cast<std::size_t>(s.size());
  if (n == 0) return 0;
  const double budget2 = budget * budget;
  std::size_t r = n;
  double tail = 0.0;
  while (r > 1) {
    const double next = tail + s[static_cast<Eigen::Index>(r - 1)] * s[static_cast<Eigen::Index>(r - 1)];
    if (next > budget2) break;
    tail = next;
    --r;
  }
  // Do not split a group of values tied with the last kept one.
  while (r < n && s[static_cast<Eigen::Index>(r)] > 0.0 &&
         s[static_cast<Eigen::Index>(r)] >= s[static_cast<Eigen::Index>(r - 1)] * (1.0 - 1e-13)) {
    ++r;
  }
  return std::max<std::size_t>(1, std::min(r, rmax));
}

// ---------------------------------------------------------------------------
// Vector kernels

TTVector tt_random(std::span<const std::size_t> mode_sizes, std::size_t rank, std::uint64_t seed) {
  if (mode_sizes.empty()) throw std::invalid_argument("tt_random: empty mode_sizes");
  if (rank < 1) throw std::invalid_argument("tt_random: rank must be positive");
  const std::size_t d = mode_sizes.size();
  std::vector<std::size_t> bonds(d + 1, 1);
  for (std::size_t k = 1; k < d; ++k) {
    std::size_t left = 1, right = 1;
    for (std::size_t j = 0; j < k; ++j) left = saturating_mul(left, mode_sizes[j]);
    for (std::size_t j = k; j < d; ++j) right = saturating_mul(right, mode_sizes[j]);
    bonds[k] = std::min({rank, left, right});
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<TTCore> cores;
  cores.reserve(d);
  for (std::size_t k = 0; k < d; ++k) {
    TTCore c(bonds[k], mode_sizes[k], bonds[k + 1]);
    for (double& v : c.data()) v = dist(rng);
    cores.push_back(std::move(c));
  }
  return shift_center(TTVector(std::move(cores)), 0);
}

Vector tt_to_dense(const TTVector& x, std::size_t cap) {
  const std::size_t total = x.full_size();
  if (total > cap) {
    throw SizeLimitError("tt_to_dense: " + std::to_string(total) + " entries exceed cap " +
                         std::to_string(cap));
  }
  Matrix t = Matrix::Ones(1, 1);
  for (const auto& c : x.cores()) {
    const std::size_t n = c.mode_size();
    Matrix next(t.rows() * static_cast<Eigen::Index>(n), c.right_rank());
    for (std::size_t i = 0; i < n; ++i) {
      const Matrix part = t * c.slice(i);
      for (Eigen::Index q = 0; q < t.rows(); ++q) {
        next.row(q * static_cast<Eigen::Index>(n) + static_cast<Eigen::Index>(i)) = part.row(q);
      }
    }
    t = std::move(next);
  }
  return t.col(0);
}

double dot(const TTVector& x, const TTVector& y) {
  check_same_modes(x.mode_sizes(), y.mode_sizes(), "dot");
  Matrix e = Matrix::Ones(1, 1);
  for (std::size_t k = 0; k < x.dim(); ++k) {
    const TTCore& cx = x.core(k);
    const TTCore& cy = y.core(k);
    const Matrix w = e * cy.right_unfolding();  // rx x (n * ry')
    ConstMatrixMap w_left(w.data(), static_cast<Eigen::Index>(cx.left_rank() * cx.mode_size()),
                          static_cast<Eigen::Index>(cy.right_rank()));
    e = cx.left_unfolding().transpose() * w_left;
  }
  return e(0, 0);
}

double norm(const TTVector& x) { return std::sqrt(std::max(0.0, dot(x, x))); }

TTVector shift_center(const TTVector& x, std::size_t p) {
  if (p >= x.dim()) throw std::invalid_argument("shift_center: target out of range");
  std::vector<TTCore> cores = x.cores();
  std::size_t from_left = 0;
  std::size_t from_right = cores.size() - 1;
  if (x.center()) {
    from_left = std::min(*x.center(), p);
    from_right = std::max(*x.center(), p);
  }
  for (std::size_t k = from_left; k < p; ++k) left_orthogonalize(cores, k);
  for (std::size_t k = from_right; k > p; --k) right_orthogonalize(cores, k);
  return TTVector(std::move(cores), p);
}

TTVector tt_round(const TTVector& x, double eps, std::size_t rmax) {
  if (rmax < 1) throw std::invalid_argument("tt_round: rmax must be at least 1");
  if (!(eps >= 0.0)) throw std::invalid_argument("tt_round: eps must be non-negative");
  const std::size_t d = x.dim();
  TTVector ortho = shift_center(x, 0);
  std::vector<TTCore> cores = ortho.cores();
  const double total = cores[0].left_unfolding().norm();
  const double budget = eps * total / std::sqrt(static_cast<double>(std::max<std::size_t>(1, d - 1)));
  for (std::size_t k = 0; k + 1 < d; ++k) {
    TTCore& cur = cores[k];
    const ThinSVD svd = thin_svd(Matrix(cur.left_unfolding()));
    const Vector& s = svd.s;
    const std::size_t r = truncation_rank(s, budget, rmax);
    const auto ri = static_cast<Eigen::Index>(r);
    TTCore new_cur(cur.left_rank(), cur.mode_size(), r);
    new_cur.left_unfolding() = svd.u.leftCols(ri);
    const Matrix carry = s.head(ri).asDiagonal() * svd.v.leftCols(ri).transpose();
    TTCore& next = cores[k + 1];
    TTCore new_next(r, next.mode_size(), next.right_rank());
    new_next.right_unfolding() = carry * next.right_unfolding();
    cur = std::move(new_cur);
    next = std::move(new_next);
  }
  return TTVector(std::move(cores), d - 1);
}

TTVector matvec(const TTMatrix& a, const TTVector& x) {
  check_same_modes(a.mode_sizes(), x.mode_sizes(), "matvec");
  std::vector<TTCore> cores;
  cores.reserve(x.dim());
  for (std::size_t k = 0; k < x.dim(); ++k) {
    const OperatorCore& ac = a.core(k);
    const TTCore& xc = x.core(k);
    const std::size_t r0 = xc.left_rank(), r1 = xc.right_rank(), n = xc.mode_size();
    TTCore y(r0 * ac.left_rank(), n, r1 * ac.right_rank());
    for (std::size_t h = 0; h < ac.right_rank(); ++h) {
      for (std::size_t g = 0; g < ac.left_rank(); ++g) {
        const Matrix blk = ac.block(g, h);
        if (blk.isZero(0.0)) continue;
        for (std::size_t b = 0; b < r1; ++b) {
          ConstMatrixMap xb(xc.data().data() + r0 * n * b, static_cast<Eigen::Index>(r0),
                            static_cast<Eigen::Index>(n));
          const Matrix yb = xb * blk.transpose();
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t aa = 0; aa < r0; ++aa)
              y(aa + r0 * g, i, b + r1 * h) = yb(static_cast<Eigen::Index>(aa), static_cast<Eigen::Index>(i));
        }
      }
    }
    cores.push_back(std::move(y));
  }
  return TTVector(std::move(cores));
}

TTVector rank_one(std::span<const Vector> factors) {
  std::vector<TTCore> cores;
  for (const auto& f : factors) {
    TTCore c(1, static_cast<std::size_t>(f.size()), 1);
    for (Eigen::Index i = 0; i < f.size(); ++i) c(0, static_cast<std::size_t>(i), 0) = f[i];
    cores.push_back(std::move(c));
  }
  return TTVector(std::move(cores));
}

// ---------------------------------------------------------------------------
// Operator helpers

TTMatrix identity_operator(std::span<const std::size_t> mode_sizes) {
  std::vector<OperatorCore> cores;
  for (std::size_t n : mode_sizes) {
    OperatorCore c(1, n, 1);
    c.set_block(0, 0, Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
    cores.push_back(std::move(c));
  }
  return TTMatrix(std::move(cores), true);
}

TTMatrix tt_round(const TTMatrix& a, double eps, std::size_t rmax) {
  // An operator core (g, i, j, h) has the same storage as a vector core (g, i + n j, h).
  std::vector<TTCore> flat;
  for (const auto& c : a.cores()) {
    const std::size_t n = c.mode_size();
    flat.emplace_back(c.left_rank(), n * n, c.right_rank(),
                      std::vector<double>(c.data().begin(), c.data().end()));
  }
  const TTVector rounded = tt_round(TTVector(std::move(flat)), eps, rmax);
  std::vector<OperatorCore> cores;
  for (std::size_t k = 0; k < rounded.dim(); ++k) {
    const TTCore& v = rounded.core(k);
    OperatorCore c(v.left_rank(), a.core(k).mode_size(), v.right_rank());
    std::copy(v.data().begin(), v.data().end(), c.data().begin());
    cores.push_back(std::move(c));
  }
  return TTMatrix(std::move(cores), a.symmetric());
}

}  // namespace blocktt
