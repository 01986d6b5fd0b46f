#include "blocktt/block_tt.hpp"

#include "blocktt/errors.hpp"
#include "blocktt/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace blocktt {

using detail::permuted;

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) {
    return std::numeric_limits<std::size_t>::max();
  }
  return a * b;
}

// Multiplies every state's right bond by m (r1 x r1'): X(a,i,c) -> sum_c X(a,i,c) m(c,c').
Matrix absorb_right(const BlockCore& block, const Matrix& m) {
  const std::size_t r0 = block.left_rank(), n = block.mode_size(), r1 = block.right_rank();
  const auto r1_new = static_cast<std::size_t>(m.cols());
  Matrix out(idx(r0 * n * r1_new), block.states().cols());
  for (Eigen::Index b = 0; b < block.states().cols(); ++b) {
    ConstMatrixMap col(block.states().col(b).data(), idx(r0 * n), idx(r1));
    MatrixMap dst(out.col(b).data(), idx(r0 * n), idx(r1_new));
    dst.noalias() = col * m;
  }
  return out;
}

// Right-orthogonalizes cores d-1..1 and pushes the triangular factors into the block at site 0.
void right_orthogonalize_into_block(std::vector<TTCore>& cores, BlockCore& block) {
  const std::size_t d = cores.size();
  for (std::size_t k = d - 1; k >= 1; --k) {
    auto [q, r] = thin_qr(Matrix(cores[k].right_unfolding().transpose()));
    const auto new_rank = static_cast<std::size_t>(q.cols());
    TTCore cur(new_rank, cores[k].mode_size(), cores[k].right_rank());
    cur.right_unfolding() = q.transpose();
    cores[k] = std::move(cur);
    const Matrix rt = r.transpose();
    if (k == 1) {
      block = BlockCore(block.left_rank(), block.mode_size(), new_rank, absorb_right(block, rt));
    } else {
      TTCore& prev = cores[k - 1];
      TTCore p(prev.left_rank(), prev.mode_size(), new_rank);
      p.left_unfolding() = prev.left_unfolding() * rt;
      prev = std::move(p);
    }
  }
}

}  // namespace

double Truncation::budget(double core_norm) const {
  return eps * core_norm / std::sqrt(static_cast<double>(std::max<std::size_t>(1, bonds)));
}

BlockCore::BlockCore(std::size_t left_rank, std::size_t mode_size, std::size_t right_rank,
                     Matrix states)
    : left_rank_(left_rank), mode_size_(mode_size), right_rank_(right_rank), states_(std::move(states)) {
  if (static_cast<std::size_t>(states_.rows()) != left_rank * mode_size * right_rank) {
    throw std::invalid_argument("BlockCore: state length does not match shape");
  }
}

BlockSplit block_split(const BlockCore& core, Direction direction, const Truncation& trunc) {
  if (trunc.rmax < 1) throw std::invalid_argument("block_split: rmax must be at least 1");
  if (!(trunc.eps >= 0.0)) throw std::invalid_argument("block_split: eps must be non-negative");
  const std::size_t r0 = core.left_rank(), n = core.mode_size(), r1 = core.right_rank();
  const std::size_t nb = core.num_states();
  const Matrix& s = core.states();
  const double budget = trunc.budget(s.norm());

  if (direction == Direction::Right) {
    // (a, i) x (b, c)
    const auto unf = permuted<4>({s.data(), static_cast<std::size_t>(s.size())}, {r0, n, r1, nb},
                                 {0, 1, 3, 2});
    ConstMatrixMap m(unf.data(), idx(r0 * n), idx(nb * r1));
    const ThinSVD svd = thin_svd(m);
    const Vector& sv = svd.s;
    const std::size_t r = truncation_rank(sv, budget, trunc.rmax);
    TTCore left(r0, n, r);
    left.left_unfolding() = svd.u.leftCols(idx(r));
    const Matrix g = sv.head(idx(r)).asDiagonal() * svd.v.leftCols(idx(r)).transpose();
    GCore gc{r, nb, r1, std::vector<double>(g.data(), g.data() + g.size())};
    return {direction, std::move(left), std::move(gc), sv};
  }

  // (a, b) x (i, c)
  const auto unf = permuted<4>({s.data(), static_cast<std::size_t>(s.size())}, {r0, n, r1, nb},
                               {0, 3, 1, 2});
  ConstMatrixMap m(unf.data(), idx(r0 * nb), idx(n * r1));
  const ThinSVD svd = thin_svd(m);
  const Vector& sv = svd.s;
  const std::size_t r = truncation_rank(sv, budget, trunc.rmax);
  TTCore right(r, n, r1);
  right.right_unfolding() = svd.v.leftCols(idx(r)).transpose();
  const Matrix g = svd.u.leftCols(idx(r)) * sv.head(idx(r)).asDiagonal();
  GCore gc{r0, nb, r, std::vector<double>(g.data(), g.data() + g.size())};
  return {direction, std::move(right), std::move(gc), sv};
}

// ---------------------------------------------------------------------------

BlockTT::BlockTT(std::vector<TTCore> cores, std::size_t position, BlockCore block)
    : cores_(std::move(cores)), position_(position), block_(std::move(block)) {
  const std::size_t d = cores_.size();
  if (d == 0) throw std::invalid_argument("BlockTT: no cores");
  if (position_ >= d) throw std::invalid_argument("BlockTT: block position out of range");
  cores_[position_] = TTCore();
  auto left_of = [&](std::size_t k) {
    return k == position_ ? block_.left_rank() : cores_[k].left_rank();
  };
  auto right_of = [&](std::size_t k) {
    return k == position_ ? block_.right_rank() : cores_[k].right_rank();
  };
  if (left_of(0) != 1 || right_of(d - 1) != 1) {
    throw std::invalid_argument("BlockTT: boundary ranks must be 1");
  }
  for (std::size_t k = 0; k + 1 < d; ++k) {
    if (right_of(k) != left_of(k + 1)) {
      throw std::invalid_argument("BlockTT: rank chain broken at bond " + std::to_string(k));
    }
  }
}

BlockTT BlockTT::random(std::span<const std::size_t> mode_sizes, std::size_t num_states,
                        std::size_t rank, std::uint64_t seed) {
  if (mode_sizes.empty()) throw std::invalid_argument("BlockTT::random: empty mode_sizes");
  if (num_states < 1 || rank < 1) {
    throw std::invalid_argument("BlockTT::random: num_states and rank must be positive");
  }
  const std::size_t d = mode_sizes.size();
  std::vector<std::size_t> bonds(d + 1, 1);
  for (std::size_t k = 1; k < d; ++k) {
    std::size_t left = num_states, right = 1;
    for (std::size_t j = 0; j < k; ++j) left = saturating_mul(left, mode_sizes[j]);
    for (std::size_t j = k; j < d; ++j) right = saturating_mul(right, mode_sizes[j]);
    bonds[k] = std::min({rank, left, right});
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix states(idx(mode_sizes[0] * bonds[1]), idx(num_states));
  for (Eigen::Index b = 0; b < states.cols(); ++b)
    for (Eigen::Index i = 0; i < states.rows(); ++i) states(i, b) = dist(rng);
  std::vector<TTCore> cores(d);
  for (std::size_t k = 1; k < d; ++k) {
    TTCore c(bonds[k], mode_sizes[k], bonds[k + 1]);
    for (double& v : c.data()) v = dist(rng);
    cores[k] = std::move(c);
  }
  BlockCore block(1, mode_sizes[0], bonds[1], std::move(states));
  right_orthogonalize_into_block(cores, block);
  if (block.local_size() < num_states) {
    throw LocalDimensionError("BlockTT::random: local dimension " +
                              std::to_string(block.local_size()) + " below " +
                              std::to_string(num_states) + " states");
  }
  auto [q, r] = thin_qr(block.states());
  block.states() = q;
  cores[0] = TTCore(1, mode_sizes[0], block.right_rank());
  return BlockTT(std::move(cores), 0, std::move(block));
}

BlockTT BlockTT::from_states(std::span<const TTVector> states) {
  if (states.empty()) throw std::invalid_argument("BlockTT::from_states: no states");
  const std::vector<std::size_t> modes = states[0].mode_sizes();
  for (const auto& s : states) {
    if (s.mode_sizes() != modes) throw std::invalid_argument("BlockTT::from_states: mode mismatch");
  }
  const std::size_t d = modes.size();
  const std::size_t nb = states.size();
  // Offsets of each state's bond block in the summed ranks.
  std::vector<std::vector<std::size_t>> offset(d + 1, std::vector<std::size_t>(nb + 1, 0));
  for (std::size_t k = 0; k <= d; ++k) {
    for (std::size_t b = 0; b < nb; ++b) {
      const std::size_t rk =
          (k == 0 || k == d) ? 1 : states[b].core(k).left_rank();
      offset[k][b + 1] = offset[k][b] + ((k == 0 || k == d) ? 0 : rk);
    }
  }
  auto total = [&](std::size_t k) { return (k == 0 || k == d) ? std::size_t{1} : offset[k][nb]; };

  const std::size_t r1 = total(1);
  Matrix block_states = Matrix::Zero(idx(modes[0] * r1), idx(nb));
  for (std::size_t b = 0; b < nb; ++b) {
    const TTCore& c = states[b].core(0);
    const std::size_t off = d == 1 ? 0 : offset[1][b];
    for (std::size_t c1 = 0; c1 < c.right_rank(); ++c1)
      for (std::size_t i = 0; i < modes[0]; ++i)
        block_states(idx(i + modes[0] * (off + c1)), idx(b)) = c(0, i, c1);
  }
  std::vector<TTCore> cores(d);
  for (std::size_t k = 1; k < d; ++k) {
    TTCore c(total(k), modes[k], total(k + 1));
    for (std::size_t b = 0; b < nb; ++b) {
      const TTCore& src = states[b].core(k);
      const std::size_t o0 = offset[k][b];
      const std::size_t o1 = (k + 1 == d) ? 0 : offset[k + 1][b];
      for (std::size_t c1 = 0; c1 < src.right_rank(); ++c1)
        for (std::size_t i = 0; i < modes[k]; ++i)
          for (std::size_t a = 0; a < src.left_rank(); ++a) c(o0 + a, i, o1 + c1) = src(a, i, c1);
    }
    cores[k] = std::move(c);
  }
  BlockCore block(1, modes[0], r1, std::move(block_states));
  right_orthogonalize_into_block(cores, block);
  cores[0] = TTCore(1, modes[0], block.right_rank());
  return BlockTT(std::move(cores), 0, std::move(block));
}

std::vector<std::size_t> BlockTT::mode_sizes() const {
  std::vector<std::size_t> n;
  for (std::size_t k = 0; k < cores_.size(); ++k) {
    n.push_back(k == position_ ? block_.mode_size() : cores_[k].mode_size());
  }
  return n;
}

std::vector<std::size_t> BlockTT::ranks() const {
  std::vector<std::size_t> r;
  for (std::size_t k = 0; k + 1 < cores_.size(); ++k) {
    r.push_back(k == position_ ? block_.right_rank() : cores_[k].right_rank());
  }
  return r;
}

const TTCore& BlockTT::core(std::size_t k) const {
  if (k == position_) throw std::invalid_argument("BlockTT::core: site carries the block");
  return cores_.at(k);
}

void BlockTT::set_states(Matrix states) {
  block_ = BlockCore(block_.left_rank(), block_.mode_size(), block_.right_rank(), std::move(states));
}

void BlockTT::move_to(std::size_t target, const Truncation& trunc) {
  const std::size_t nb = block_.num_states();
  if (target == position_ + 1 && target < cores_.size()) {
    BlockSplit split = block_split(block_, Direction::Right, trunc);
    const TTCore& next = cores_[target];
    const std::size_t r = split.g.left_rank, r1 = next.right_rank(), n = next.mode_size();
    ConstMatrixMap g(split.g.data.data(), idx(r * nb), idx(split.g.right_rank));
    const Matrix merged = g * next.right_unfolding();  // (a', b, j, c)
    auto data = permuted<4>({merged.data(), static_cast<std::size_t>(merged.size())}, {r, nb, n, r1},
                            {0, 2, 3, 1});
    Matrix states = ConstMatrixMap(data.data(), idx(r * n * r1), idx(nb));
    cores_[position_] = std::move(split.core);
    block_ = BlockCore(r, n, r1, std::move(states));
    cores_[target] = TTCore();
    position_ = target;
    return;
  }
  if (target + 1 == position_) {
    BlockSplit split = block_split(block_, Direction::Left, trunc);
    const TTCore& prev = cores_[target];
    const std::size_t r0 = prev.left_rank(), n = prev.mode_size(), r = split.g.right_rank;
    ConstMatrixMap g(split.g.data.data(), idx(split.g.left_rank), idx(nb * r));
    const Matrix merged = prev.left_unfolding() * g;  // (c, j, b, a')
    auto data = permuted<4>({merged.data(), static_cast<std::size_t>(merged.size())}, {r0, n, nb, r},
                            {0, 1, 3, 2});
    Matrix states = ConstMatrixMap(data.data(), idx(r0 * n * r), idx(nb));
    cores_[position_] = std::move(split.core);
    block_ = BlockCore(r0, n, r, std::move(states));
    cores_[target] = TTCore();
    position_ = target;
    return;
  }
  throw std::invalid_argument("block_move: target " + std::to_string(target) +
                              " is not adjacent to block position " + std::to_string(position_));
}

void BlockTT::move_block(std::size_t target, const Truncation& trunc) {
  if (target >= cores_.size()) throw std::invalid_argument("move_block: target out of range");
  while (position_ < target) move_to(position_ + 1, trunc);
  while (position_ > target) move_to(position_ - 1, trunc);
}

BlockTT block_move(const BlockTT& x, std::size_t target, const Truncation& trunc) {
  BlockTT y = x;
  y.move_to(target, trunc);
  return y;
}

TTVector extract_state(const BlockTT& x, std::size_t b) {
  if (b >= x.num_states()) {
    throw std::invalid_argument("extract_state: state " + std::to_string(b) + " out of range");
  }
  std::vector<TTCore> cores;
  cores.reserve(x.dim());
  for (std::size_t k = 0; k < x.dim(); ++k) {
    if (k == x.position()) {
      const BlockCore& blk = x.block();
      const auto col = blk.states().col(idx(b));
      cores.emplace_back(blk.left_rank(), blk.mode_size(), blk.right_rank(),
                         std::vector<double>(col.data(), col.data() + col.size()));
    } else {
      cores.push_back(x.core(k));
    }
  }
  return TTVector(std::move(cores), x.position());
}

Matrix states_to_dense(const BlockTT& x, std::size_t cap) {
  Matrix out;
  for (std::size_t b = 0; b < x.num_states(); ++b) {
    const Vector v = tt_to_dense(extract_state(x, b), cap);
    if (b == 0) out.resize(v.size(), idx(x.num_states()));
    out.col(idx(b)) = v;
  }
  return out;
}

}  // namespace blocktt

namespace blocktt {

BlockTT append_state(const BlockTT& x, const TTVector& y) {
  if (x.position() != 0) throw std::invalid_argument("append_state: block must sit at site 0");
  if (x.mode_sizes() != y.mode_sizes()) throw std::invalid_argument("append_state: mode mismatch");
  const std::size_t d = x.dim();
  const std::size_t nb = x.num_states();
  const std::vector<std::size_t> modes = x.mode_sizes();
  const BlockCore& blk = x.block();
  if (d == 1) {
    Matrix states(blk.states().rows(), idx(nb + 1));
    states.leftCols(idx(nb)) = blk.states();
    const auto data = y.core(0).data();
    for (std::size_t i = 0; i < data.size(); ++i) states(idx(i), idx(nb)) = data[i];
    return BlockTT({TTCore(1, modes[0], 1)}, 0, BlockCore(1, modes[0], 1, std::move(states)));
  }
  const std::size_t n0 = modes[0];
  const std::size_t rx1 = blk.right_rank(), ry1 = y.core(0).right_rank();
  Matrix states = Matrix::Zero(idx(n0 * (rx1 + ry1)), idx(nb + 1));
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t c = 0; c < rx1; ++c)
      for (std::size_t i = 0; i < n0; ++i) states(idx(i + n0 * c), idx(b)) = blk(0, i, c, b);
  for (std::size_t c = 0; c < ry1; ++c)
    for (std::size_t i = 0; i < n0; ++i) states(idx(i + n0 * (rx1 + c)), idx(nb)) = y.core(0)(0, i, c);

  std::vector<TTCore> cores(d);
  for (std::size_t k = 1; k < d; ++k) {
    const TTCore& cx = x.core(k);
    const TTCore& cy = y.core(k);
    const bool last = k + 1 == d;
    TTCore c(cx.left_rank() + cy.left_rank(), modes[k], last ? 1 : cx.right_rank() + cy.right_rank());
    for (std::size_t c1 = 0; c1 < cx.right_rank(); ++c1)
      for (std::size_t i = 0; i < modes[k]; ++i)
        for (std::size_t a = 0; a < cx.left_rank(); ++a) c(a, i, c1) = cx(a, i, c1);
    const std::size_t off1 = last ? 0 : cx.right_rank();
    for (std::size_t c1 = 0; c1 < cy.right_rank(); ++c1)
      for (std::size_t i = 0; i < modes[k]; ++i)
        for (std::size_t a = 0; a < cy.left_rank(); ++a) c(cx.left_rank() + a, i, off1 + c1) = cy(a, i, c1);
    cores[k] = std::move(c);
  }
  BlockCore block(1, n0, rx1 + ry1, std::move(states));
  right_orthogonalize_into_block(cores, block);
  cores[0] = TTCore(1, n0, block.right_rank());
  return BlockTT(std::move(cores), 0, std::move(block));
}

}  // namespace blocktt
