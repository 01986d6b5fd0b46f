#pragma once

// B vectors sharing one tensor train.  One site (the block position) carries
// the state index; its core is stored as an (r0*n*r1) x B matrix whose column
// b is the vectorized core X(a, i, c; b), a fastest.

#include "blocktt/tt_core.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace blocktt {

enum class Direction { Left, Right };

/// Rank truncation settings for a single bond.  The absolute budget for a
/// core of norm s is eps * s / sqrt(bonds).
struct Truncation {
  double eps = 0.0;
  std::size_t rmax = kUnboundedRank;
  std::size_t bonds = 1;

  double budget(double core_norm) const;
};

class BlockCore {
 public:
  BlockCore() = default;
  BlockCore(std::size_t left_rank, std::size_t mode_size, std::size_t right_rank, Matrix states);

  std::size_t left_rank() const { return left_rank_; }
  std::size_t mode_size() const { return mode_size_; }
  std::size_t right_rank() const { return right_rank_; }
  std::size_t num_states() const { return static_cast<std::size_t>(states_.cols()); }
  /// Local dimension r0 * n * r1.
  std::size_t local_size() const { return left_rank_ * mode_size_ * right_rank_; }

  const Matrix& states() const { return states_; }
  Matrix& states() { return states_; }

  double operator()(std::size_t a, std::size_t i, std::size_t c, std::size_t b) const {
    return states_(static_cast<Eigen::Index>(a + left_rank_ * (i + mode_size_ * c)),
                   static_cast<Eigen::Index>(b));
  }

 private:
  std::size_t left_rank_ = 0;
  std::size_t mode_size_ = 0;
  std::size_t right_rank_ = 0;
  Matrix states_;
};

/// The factor G(b) carrying the state index after a split.  Layout
/// (left, state, right), left fastest.  For a rightward split the shape is
/// r' x B x r_p; for a leftward split r_{p-1} x B x r'.
struct GCore {
  std::size_t left_rank = 0;
  std::size_t num_states = 0;
  std::size_t right_rank = 0;
  std::vector<double> data;

  double operator()(std::size_t a, std::size_t b, std::size_t c) const {
    return data[a + left_rank * (b + num_states * c)];
  }
};

struct BlockSplit {
  Direction direction;
  /// Left-orthogonal for Direction::Right, right-orthogonal for Direction::Left.
  TTCore core;
  GCore g;
  /// Full singular spectrum of the unfolding.
  Vector singular_values;
};

BlockSplit block_split(const BlockCore& core, Direction direction, const Truncation& trunc);

class BlockTT {
 public:
  BlockTT() = default;
  /// `cores` has d entries; the entry at `position` only fixes the shape and
  /// is otherwise ignored.  Orthogonality is the caller's responsibility.
  BlockTT(std::vector<TTCore> cores, std::size_t position, BlockCore block);

  /// Random initial guess with the block at site 0: internal ranks
  /// min(rank, dimension bounds with the state index on the left), frame
  /// right-orthogonal, block columns orthonormal.
  static BlockTT random(std::span<const std::size_t> mode_sizes, std::size_t num_states,
                        std::size_t rank, std::uint64_t seed);

  /// Exact block representation of the given vectors (direct sum of their
  /// trains), block at site 0, frame right-orthogonal.
  static BlockTT from_states(std::span<const TTVector> states);

  std::size_t dim() const { return cores_.size(); }
  std::size_t position() const { return position_; }
  std::size_t num_states() const { return block_.num_states(); }
  std::vector<std::size_t> mode_sizes() const;
  /// Bond ranks r_1..r_{d-1} for the current block position.
  std::vector<std::size_t> ranks() const;

  /// Non-block core; throws for k == position().
  const TTCore& core(std::size_t k) const;
  const BlockCore& block() const { return block_; }

  /// Replaces the block core's states (same local shape, any number of columns).
  void set_states(Matrix states);

  /// Moves the state index to an adjacent site, truncating the traversed bond.
  void move_to(std::size_t target, const Truncation& trunc);

  /// Moves step by step to any site.
  void move_block(std::size_t target, const Truncation& trunc);

 private:
  std::vector<TTCore> cores_;
  std::size_t position_ = 0;
  BlockCore block_;
};

/// Copying form of BlockTT::move_to; target must be adjacent.
BlockTT block_move(const BlockTT& x, std::size_t target, const Truncation& trunc);

/// State b as an ordinary TT vector with orthogonality center at the block position.
TTVector extract_state(const BlockTT& x, std::size_t b);

/// Appends one more state to a block-TT whose block sits at site 0.  The
/// result is the direct sum of both trains with the frame right-orthogonal.
BlockTT append_state(const BlockTT& x, const TTVector& y);

/// All states densified as an N x B matrix (desk scale).
Matrix states_to_dense(const BlockTT& x, std::size_t cap = kDefaultDenseCap);

}  // namespace blocktt
