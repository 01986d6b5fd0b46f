#pragma once

// Partial contractions of the <X| A |X> network and the projected local operator.

#include "blocktt/tt_core.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace blocktt {

enum class Side { Left, Right };

/// Left environment at boundary k contracts sites [0, k); right environment at
/// boundary k contracts sites [k, d).  Data layout E(bra, op, ket), bra fastest.
class Environment {
 public:
  Environment() = default;
  Environment(Side side, std::size_t boundary, std::size_t bra_rank, std::size_t op_rank,
              std::size_t ket_rank, std::vector<double> data);

  /// The 1x1x1 array [1].
  static Environment trivial(Side side, std::size_t boundary);

  Side side() const { return side_; }
  std::size_t boundary() const { return boundary_; }
  std::size_t bra_rank() const { return bra_rank_; }
  std::size_t op_rank() const { return op_rank_; }
  std::size_t ket_rank() const { return ket_rank_; }

  double operator()(std::size_t bra, std::size_t op, std::size_t ket) const {
    return data_[bra + bra_rank_ * (op + op_rank_ * ket)];
  }
  std::span<const double> data() const { return data_; }

 private:
  Side side_ = Side::Left;
  std::size_t boundary_ = 0;
  std::size_t bra_rank_ = 1;
  std::size_t op_rank_ = 1;
  std::size_t ket_rank_ = 1;
  std::vector<double> data_{1.0};
};

Environment env_extend_left(const Environment& env, const OperatorCore& a, const TTCore& bra,
                            const TTCore& ket);
Environment env_extend_right(const Environment& env, const OperatorCore& a, const TTCore& bra,
                             const TTCore& ket);

/// The projected operator X_{!=p}^T A X_{!=p} acting on vectorized cores
/// v(a, i, b) (a fastest), applied without materialization.
class LocalOperator {
 public:
  LocalOperator(const Environment& left, const OperatorCore& a, const Environment& right);

  std::size_t left_rank() const { return r0_; }
  std::size_t mode_size() const { return n_; }
  std::size_t right_rank() const { return r1_; }
  std::size_t dim() const { return r0_ * n_ * r1_; }

  /// Applies to every column of v (dim() x k).
  Matrix apply(const Matrix& v) const;
  /// Explicit dim() x dim() matrix, assembled column block by column block.
  Matrix dense() const;
  /// Diagonal of the operator, for preconditioning.
  Vector diagonal() const;

 private:
  std::size_t r0_, n_, r1_, ra0_, ra1_;
  Matrix left_;   // (bra*op) x ket
  Matrix op_;     // (i*h) x (g*j)
  Matrix right_;  // (h*ket) x bra
};

Matrix local_matvec(const Environment& left, const OperatorCore& a, const Environment& right,
                    const Matrix& v);

}  // namespace blocktt
