#include "blocktt/environment.hpp"

#include "blocktt/tensor_ops.hpp"

#include <stdexcept>

namespace blocktt {

using detail::permuted;

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

ConstMatrixMap view(const std::vector<double>& data, std::size_t rows, std::size_t cols) {
  return {data.data(), idx(rows), idx(cols)};
}

// A(g, i, j, h) -> (i, h, g, j) as an (n*rA1) x (rA0*n) matrix.
std::vector<double> op_row_major_channels(const OperatorCore& a) {
  return permuted<4>(a.data(), {a.left_rank(), a.mode_size(), a.mode_size(), a.right_rank()},
                     {1, 3, 0, 2});
}

}  // namespace

Environment::Environment(Side side, std::size_t boundary, std::size_t bra_rank, std::size_t op_rank,
                         std::size_t ket_rank, std::vector<double> data)
    : side_(side),
      boundary_(boundary),
      bra_rank_(bra_rank),
      op_rank_(op_rank),
      ket_rank_(ket_rank),
      data_(std::move(data)) {
  if (data_.size() != bra_rank * op_rank * ket_rank) {
    throw std::invalid_argument("Environment: data length does not match shape");
  }
}

Environment Environment::trivial(Side side, std::size_t boundary) {
  return Environment(side, boundary, 1, 1, 1, {1.0});
}

Environment env_extend_left(const Environment& env, const OperatorCore& a, const TTCore& bra,
                            const TTCore& ket) {
  if (env.side() != Side::Left) throw std::invalid_argument("env_extend_left: not a left environment");
  if (env.bra_rank() != bra.left_rank() || env.op_rank() != a.left_rank() ||
      env.ket_rank() != ket.left_rank() || bra.mode_size() != a.mode_size() ||
      ket.mode_size() != a.mode_size()) {
    throw std::invalid_argument("env_extend_left: shape mismatch");
  }
  const std::size_t rb = bra.left_rank(), rg = a.left_rank(), rk = ket.left_rank();
  const std::size_t n = a.mode_size(), rh = a.right_rank();
  const std::size_t rb1 = bra.right_rank(), rk1 = ket.right_rank();

  ConstMatrixMap left(env.data().data(), idx(rb * rg), idx(rk));
  const Matrix t1 = left * ket.right_unfolding();  // (a', g, j, b)
  const auto t1p = permuted<4>({t1.data(), static_cast<std::size_t>(t1.size())}, {rb, rg, n, rk1}, {1, 2, 0, 3});
  const auto op = op_row_major_channels(a);
  const Matrix t2 = view(op, n * rh, rg * n) * view(t1p, rg * n, rb * rk1);  // (i, h, a', b)
  const auto t2p = permuted<4>({t2.data(), static_cast<std::size_t>(t2.size())}, {n, rh, rb, rk1}, {2, 0, 1, 3});
  const Matrix out = bra.left_unfolding().transpose() * view(t2p, rb * n, rh * rk1);
  return Environment(Side::Left, env.boundary() + 1, rb1, rh, rk1,
                     std::vector<double>(out.data(), out.data() + out.size()));
}

Environment env_extend_right(const Environment& env, const OperatorCore& a, const TTCore& bra,
                             const TTCore& ket) {
  if (env.side() != Side::Right) throw std::invalid_argument("env_extend_right: not a right environment");
  if (env.bra_rank() != bra.right_rank() || env.op_rank() != a.right_rank() ||
      env.ket_rank() != ket.right_rank() || bra.mode_size() != a.mode_size() ||
      ket.mode_size() != a.mode_size()) {
    throw std::invalid_argument("env_extend_right: shape mismatch");
  }
  if (env.boundary() == 0) throw std::invalid_argument("env_extend_right: already at site 0");
  const std::size_t rb1 = bra.right_rank(), rh = a.right_rank(), rk1 = ket.right_rank();
  const std::size_t n = a.mode_size(), rg = a.left_rank();
  const std::size_t rb = bra.left_rank(), rk = ket.left_rank();

  ConstMatrixMap right(env.data().data(), idx(rb1 * rh), idx(rk1));
  const Matrix t1 = ket.left_unfolding() * right.transpose();  // (a, j, a', h)
  const auto t1p = permuted<4>({t1.data(), static_cast<std::size_t>(t1.size())}, {rk, n, rb1, rh}, {1, 3, 0, 2});
  ConstMatrixMap op(a.data().data(), idx(rg * n), idx(n * rh));
  const Matrix t2 = op * view(t1p, n * rh, rk * rb1);  // (g, i, a, a')
  const auto t2p = permuted<4>({t2.data(), static_cast<std::size_t>(t2.size())}, {rg, n, rk, rb1}, {1, 3, 2, 0});
  const Matrix t3 = bra.right_unfolding() * view(t2p, n * rb1, rk * rg);  // (bra, ket, g)
  auto out = permuted<3>({t3.data(), static_cast<std::size_t>(t3.size())}, {rb, rk, rg}, {0, 2, 1});
  return Environment(Side::Right, env.boundary() - 1, rb, rg, rk, std::move(out));
}

// ---------------------------------------------------------------------------

LocalOperator::LocalOperator(const Environment& left, const OperatorCore& a,
                             const Environment& right)
    : r0_(left.ket_rank()),
      n_(a.mode_size()),
      r1_(right.ket_rank()),
      ra0_(a.left_rank()),
      ra1_(a.right_rank()) {
  if (left.side() != Side::Left || right.side() != Side::Right) {
    throw std::invalid_argument("LocalOperator: environment sides swapped");
  }
  if (left.bra_rank() != left.ket_rank() || right.bra_rank() != right.ket_rank() ||
      left.op_rank() != ra0_ || right.op_rank() != ra1_) {
    throw std::invalid_argument("LocalOperator: environment and operator shapes disagree");
  }
  left_ = ConstMatrixMap(left.data().data(), idx(r0_ * ra0_), idx(r0_));
  op_ = view(op_row_major_channels(a), n_ * ra1_, ra0_ * n_);
  right_ = view(permuted<3>(right.data(), {r1_, ra1_, r1_}, {1, 2, 0}), ra1_ * r1_, r1_);
}

Matrix LocalOperator::apply(const Matrix& v) const {
  if (static_cast<std::size_t>(v.rows()) != dim()) {
    throw std::invalid_argument("LocalOperator::apply: vector length mismatch");
  }
  const std::size_t k = static_cast<std::size_t>(v.cols());
  if (k == 0) return Matrix(v.rows(), 0);
  ConstMatrixMap vin(v.data(), idx(r0_), idx(n_ * r1_ * k));
  const Matrix w1 = left_ * vin;  // (a', g, j, b, col)
  const auto w1p = permuted<5>({w1.data(), static_cast<std::size_t>(w1.size())}, {r0_, ra0_, n_, r1_, k}, {1, 2, 0, 3, 4});
  const Matrix w2 = op_ * view(w1p, ra0_ * n_, r0_ * r1_ * k);  // (i, h, a', b, col)
  const auto w2p = permuted<5>({w2.data(), static_cast<std::size_t>(w2.size())}, {n_, ra1_, r0_, r1_, k}, {2, 0, 4, 1, 3});
  const Matrix y2 = view(w2p, r0_ * n_ * k, ra1_ * r1_) * right_;  // (a', i, col, b')
  const auto y = permuted<4>({y2.data(), static_cast<std::size_t>(y2.size())}, {r0_, n_, k, r1_}, {0, 1, 3, 2});
  return view(y, dim(), k);
}

Matrix LocalOperator::dense() const {
  const std::size_t m = dim();
  Matrix out(idx(m), idx(m));
  constexpr std::size_t chunk = 256;
  for (std::size_t c0 = 0; c0 < m; c0 += chunk) {
    const std::size_t c = std::min(chunk, m - c0);
    Matrix e = Matrix::Zero(idx(m), idx(c));
    for (std::size_t j = 0; j < c; ++j) e(idx(c0 + j), idx(j)) = 1.0;
    out.middleCols(idx(c0), idx(c)) = apply(e);
  }
  return out;
}

Vector LocalOperator::diagonal() const {
  Vector diag(idx(dim()));
  // op_ row (i + n h), column (g + rA0 j); left_ row (a + r0 g), column a;
  // right_ row (h + rA1 b), column b.
  for (std::size_t b = 0; b < r1_; ++b)
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t a = 0; a < r0_; ++a) {
        double s = 0.0;
        for (std::size_t h = 0; h < ra1_; ++h) {
          const double rv = right_(idx(h + ra1_ * b), idx(b));
          if (rv == 0.0) continue;
          for (std::size_t g = 0; g < ra0_; ++g) {
            s += left_(idx(a + r0_ * g), idx(a)) * op_(idx(i + n_ * h), idx(g + ra0_ * i)) * rv;
          }
        }
        diag[idx(a + r0_ * (i + n_ * b))] = s;
      }
  return diag;
}

Matrix local_matvec(const Environment& left, const OperatorCore& a, const Environment& right,
                    const Matrix& v) {
  return LocalOperator(left, a, right).apply(v);
}

}  // namespace blocktt
