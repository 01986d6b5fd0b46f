#pragma once

// Tensor-train vectors and operators.
//
// Storage convention: all cores are column-major with the left bond index
// fastest.  A vector core X(a, i, b) of shape r0 x n x r1 lives at
// data[a + r0 * (i + n * b)], so both the left unfolding (r0*n) x r1 and the
// right unfolding r0 x (n*r1) are free reshapes.  Operator cores are stored as
// A(g, i, j, h) with i the row (output) index and j the column index.
//
// Dense vectors use big-endian linearization: i_1 varies slowest.
// Site indices are zero-based throughout the library.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace blocktt {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;

inline constexpr std::size_t kDefaultDenseCap = std::size_t{1} << 20;
inline constexpr std::size_t kUnboundedRank = std::numeric_limits<std::size_t>::max();

class TTCore {
 public:
  TTCore() = default;
  TTCore(std::size_t left_rank, std::size_t mode_size, std::size_t right_rank);
  TTCore(std::size_t left_rank, std::size_t mode_size, std::size_t right_rank,
         std::vector<double> data);

  std::size_t left_rank() const { return left_rank_; }
  std::size_t mode_size() const { return mode_size_; }
  std::size_t right_rank() const { return right_rank_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t a, std::size_t i, std::size_t b) {
    return data_[a + left_rank_ * (i + mode_size_ * b)];
  }
  double operator()(std::size_t a, std::size_t i, std::size_t b) const {
    return data_[a + left_rank_ * (i + mode_size_ * b)];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// (r0*n) x r1 view.
  MatrixMap left_unfolding();
  ConstMatrixMap left_unfolding() const;
  /// r0 x (n*r1) view.
  MatrixMap right_unfolding();
  ConstMatrixMap right_unfolding() const;

  /// The r0 x r1 slice X(i).
  Matrix slice(std::size_t i) const;

  bool is_left_orthogonal(double tol = 1e-12) const;
  bool is_right_orthogonal(double tol = 1e-12) const;

 private:
  std::size_t left_rank_ = 0;
  std::size_t mode_size_ = 0;
  std::size_t right_rank_ = 0;
  std::vector<double> data_;
};

/// A d-dimensional vector in TT format.
class TTVector {
 public:
  TTVector() = default;
  /// Validates boundary and chaining ranks; throws std::invalid_argument.
  explicit TTVector(std::vector<TTCore> cores, std::optional<std::size_t> center = std::nullopt);

  std::size_t dim() const { return cores_.size(); }
  const TTCore& core(std::size_t k) const { return cores_[k]; }
  const std::vector<TTCore>& cores() const { return cores_; }
  std::vector<std::size_t> mode_sizes() const;
  /// Internal bond ranks r_1..r_{d-1}.
  std::vector<std::size_t> ranks() const;
  std::optional<std::size_t> center() const { return center_; }
  /// Product of mode sizes, saturating at SIZE_MAX.
  std::size_t full_size() const;

 private:
  std::vector<TTCore> cores_;
  std::optional<std::size_t> center_;
};

class OperatorCore {
 public:
  OperatorCore() = default;
  OperatorCore(std::size_t left_rank, std::size_t mode_size, std::size_t right_rank);

  std::size_t left_rank() const { return left_rank_; }
  std::size_t mode_size() const { return mode_size_; }
  std::size_t right_rank() const { return right_rank_; }

  double& operator()(std::size_t g, std::size_t i, std::size_t j, std::size_t h) {
    return data_[g + left_rank_ * (i + mode_size_ * (j + mode_size_ * h))];
  }
  double operator()(std::size_t g, std::size_t i, std::size_t j, std::size_t h) const {
    return data_[g + left_rank_ * (i + mode_size_ * (j + mode_size_ * h))];
  }

  /// Writes an n x n block into channel (g, h).
  void set_block(std::size_t g, std::size_t h, const Matrix& block);
  Matrix block(std::size_t g, std::size_t h) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// True when every channel block is a symmetric matrix.
  bool blocks_symmetric(double tol = 0.0) const;

 private:
  std::size_t left_rank_ = 0;
  std::size_t mode_size_ = 0;
  std::size_t right_rank_ = 0;
  std::vector<double> data_;
};

/// A square operator in TT (MPO) format.
class TTMatrix {
 public:
  TTMatrix() = default;
  /// When `symmetric` is omitted it is inferred from channel-wise block symmetry,
  /// which is sufficient (not necessary) for global symmetry.
  explicit TTMatrix(std::vector<OperatorCore> cores, std::optional<bool> symmetric = std::nullopt);

  std::size_t dim() const { return cores_.size(); }
  const OperatorCore& core(std::size_t k) const { return cores_[k]; }
  const std::vector<OperatorCore>& cores() const { return cores_; }
  std::vector<std::size_t> mode_sizes() const;
  std::vector<std::size_t> ranks() const;
  bool symmetric() const { return symmetric_; }

 private:
  std::vector<OperatorCore> cores_;
  bool symmetric_ = false;
};

// ---------------------------------------------------------------------------
// Vector kernels

/// Random TT vector, right-orthogonalized with center 0.  Bond k has rank
/// min(rank, prod_{j<=k} n_j, prod_{j>k} n_j).
TTVector tt_random(std::span<const std::size_t> mode_sizes, std::size_t rank, std::uint64_t seed);

/// Dense vector of length prod n_k; throws SizeLimitError above `cap`.
Vector tt_to_dense(const TTVector& x, std::size_t cap = kDefaultDenseCap);

double dot(const TTVector& x, const TTVector& y);
double norm(const TTVector& x);

/// Moves the orthogonality center to site p with thin QR factorizations.
TTVector shift_center(const TTVector& x, std::size_t p);

/// SVD-based rounding with relative accuracy eps and rank cap rmax.
TTVector tt_round(const TTVector& x, double eps, std::size_t rmax = kUnboundedRank);

/// y = A x, exact; result bond ranks are rA_k * r_k.
TTVector matvec(const TTMatrix& a, const TTVector& x);

/// Mode-wise Kronecker product of a list of vectors: rank-one TT.
TTVector rank_one(std::span<const Vector> factors);

// ---------------------------------------------------------------------------
// Operator helpers

TTMatrix identity_operator(std::span<const std::size_t> mode_sizes);

/// Rounds an operator by treating each (i, j) pair as one mode of size n^2.
TTMatrix tt_round(const TTMatrix& a, double eps, std::size_t rmax = kUnboundedRank);

// ---------------------------------------------------------------------------
// Dense helpers shared by the kernels

/// Truncation rank: keep the smallest r with sum_{k>=r} s_k^2 <= budget^2 and
/// r <= rmax.  Values equal to the boundary are kept; at least one is kept.
std::size_t truncation_rank(const Vector& singular_values, double budget, std::size_t rmax);

struct ThinSVD {
  Matrix u;       // rows x k, orthonormal columns
  Vector s;       // k descending singular values
  Matrix v;       // cols x k, orthonormal columns
};

/// Thin SVD with k = min(rows, cols) (LAPACK divide and conquer, falling back
/// to the QR-iteration driver).
ThinSVD thin_svd(const Matrix& m);

/// Thin QR; returns (Q, R) with Q having min(rows, cols) orthonormal columns.
std::pair<Matrix, Matrix> thin_qr(const Matrix& m);

}  // namespace blocktt
