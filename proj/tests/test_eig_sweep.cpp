#include "blocktt/eigb.hpp"
#include "blocktt/environment.hpp"
#include "blocktt/errors.hpp"
#include "blocktt/hamiltonians.hpp"
#include "blocktt/local_solver.hpp"
#include "blocktt/oracle.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <vector>

using namespace blocktt;
using blocktt::test::max_abs;

namespace {

using Sizes = std::vector<std::size_t>;

// Lowest ten eigenvalues of laplace(3, 4), dense numpy reference.
const std::vector<double> kLaplace34{1.1458980337503193, 2.1458980337503148, 2.1458980337503153,
                                     2.1458980337503193, 3.1458980337503131, 3.1458980337503135,
                                     3.1458980337503144, 3.3819660112501042, 3.3819660112501069,
                                     3.3819660112501073};

Matrix eye_block(Eigen::Index rows, Eigen::Index cols) { return Matrix::Identity(rows, cols); }

}  // namespace

TEST_CASE("local_block_eig on a diagonal operator") {
  Vector diag(10);
  for (int i = 0; i < 10; ++i) diag(i) = 10 - i;  // descending on purpose
  const Matrix h = diag.asDiagonal();
  for (LocalSolverKind kind : {LocalSolverKind::Dense, LocalSolverKind::Iterative}) {
    LocalSolveOptions opt;
    opt.kind = kind;
    opt.tol = 1e-12;
    const LocalEigResult r = local_block_eig(as_linear_operator(h), 3, test::random_matrix(10, 3, 1), opt);
    CHECK(r.values(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.values(1) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.values(2) == doctest::Approx(3.0).epsilon(1e-10));
    for (int b = 0; b < 3; ++b) CHECK(std::abs(std::abs(r.vectors(9 - b, b)) - 1.0) < 1e-9);
    CHECK(max_abs(r.vectors.transpose() * r.vectors - eye_block(3, 3)) < 1e-10);
  }
  CHECK_THROWS_AS(local_block_eig(as_linear_operator(h), 11, Matrix(), LocalSolveOptions{}), LocalDimensionError);
}

TEST_CASE("local_block_eig with constraints") {
  const Matrix h = [] {
    Vector diag(8);
    for (int i = 0; i < 8; ++i) diag(i) = i + 1;
    return Matrix(diag.asDiagonal());
  }();
  const Matrix q = eye_block(8, 2);  // excludes the two lowest coordinates
  for (LocalSolverKind kind : {LocalSolverKind::Dense, LocalSolverKind::Iterative}) {
    LocalSolveOptions opt;
    opt.kind = kind;
    opt.tol = 1e-12;
    const LocalEigResult r = local_block_eig(as_linear_operator(h), 2, test::random_matrix(8, 2, 3), opt, q);
    CHECK(r.values(0) == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(r.values(1) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(max_abs(q.transpose() * r.vectors) < 1e-10);
  }
}

TEST_CASE("local problem of a projected Laplace operator") {
  const TTMatrix a = laplace_tt(3, 4);
  const TTVector x = shift_center(tt_random(Sizes{4, 4, 4}, 2, 5), 1);
  const Environment left = env_extend_left(Environment::trivial(Side::Left, 0), a.core(0), x.core(0), x.core(0));
  const Environment right = env_extend_right(Environment::trivial(Side::Right, 3), a.core(2), x.core(2), x.core(2));
  const LocalOperator op(left, a.core(1), right);

  const Matrix f = test::frame_matrix(x, 1);
  const Matrix h = f.transpose() * densify_operator(a) * f;
  const Eigen::SelfAdjointEigenSolver<Matrix> es(h);

  LocalSolveOptions opt;
  opt.tol = 1e-12;
  for (LocalSolverKind kind : {LocalSolverKind::Dense, LocalSolverKind::Iterative}) {
    opt.kind = kind;
    const LocalEigResult r = local_block_eig(as_linear_operator(op), 3, test::random_matrix(h.rows(), 3, 2), opt);
    for (int b = 0; b < 3; ++b) CHECK(std::abs(r.values(b) - es.eigenvalues()(b)) < 1e-10);
  }

  // Warm start from exact eigenvectors is a fixed point.
  opt.kind = LocalSolverKind::Iterative;
  const Matrix exact = es.eigenvectors().leftCols(3);
  const LocalEigResult w = local_block_eig(as_linear_operator(op), 3, exact, opt);
  CHECK(test::subspace_distance_ok(w.vectors, exact, 1e-10));
}

TEST_CASE("eigb on Laplace d=3, n=4") {
  SolverConfig c;
  c.num_states = 5;
  c.eps = 1e-8;
  const SpectrumResult r = eigb(laplace_tt(3, 4), c);
  REQUIRE(r.eigenvalues.size() == 5);
  for (std::size_t b = 0; b < 5; ++b) CHECK(std::abs(r.eigenvalues[b] - kLaplace34[b]) < 1e-6);
  CHECK(std::is_sorted(r.eigenvalues.begin(), r.eigenvalues.end()));
  CHECK(r.converged);
  CHECK(r.rank_profile == r.states.ranks());
  CHECK(r.sweep_history.size() == r.num_sweeps);

  // Reported values agree with the trace of the returned block.
  const double sum = std::accumulate(r.eigenvalues.begin(), r.eigenvalues.end(), 0.0);
  CHECK(std::abs(rayleigh_trace(laplace_tt(3, 4), r.states) - sum) < 1e-9);
}

TEST_CASE("eigb ground state of the two-spin Heisenberg model") {
  SolverConfig c;
  c.num_states = 1;
  c.eps = 1e-10;
  const SpectrumResult r = eigb(heisenberg_tt(2), c);
  REQUIRE(r.eigenvalues.size() == 1);
  CHECK(std::abs(r.eigenvalues[0] + 0.75) < 1e-10);
  CHECK(r.states.num_states() == 1);
}

TEST_CASE("eigb validation") {
  const TTMatrix a = laplace_tt(3, 4);
  SolverConfig c;
  c.num_states = 65;
  CHECK_THROWS_AS(eigb(a, c), ConfigError);
  c.num_states = 5;
  c.rmax = 1;
  CHECK_THROWS_AS(eigb(a, c), ConfigError);
  c.rmax = 2;
  CHECK_NOTHROW(validate(c, a.mode_sizes()));
  c.eps = -1.0;
  CHECK_THROWS_AS(validate(c, a.mode_sizes()), ConfigError);

  OperatorCore nonsym(1, 2, 1);
  Matrix m(2, 2);
  m << 1, 2, 0, 1;
  nonsym.set_block(0, 0, m);
  const TTMatrix bad(std::vector<OperatorCore>{nonsym, nonsym});
  CHECK_FALSE(bad.symmetric());
  CHECK_THROWS_AS(eigb(bad, SolverConfig{}), std::invalid_argument);
}

TEST_CASE("deflation_solve") {
  const TTMatrix a = laplace_tt(3, 4);
  SolverConfig c;
  c.num_states = 1;
  c.eps = 1e-8;
  const SpectrumResult one = deflation_solve(a, c);
  CHECK(std::abs(one.eigenvalues[0] - kLaplace34[0]) < 1e-6);

  c.num_states = 4;
  const SpectrumResult r = deflation_solve(a, c);
  REQUIRE(r.eigenvalues.size() == 4);
  CHECK(std::is_sorted(r.eigenvalues.begin(), r.eigenvalues.end()));
  const Matrix v = states_to_dense(r.states);
  const Matrix g = v.transpose() * v;
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 4; ++j)
      if (i != j) CHECK(std::abs(g(i, j)) <= 1e-8);
  // Variational: never below the exact values.
  for (std::size_t b = 0; b < 4; ++b) CHECK(r.eigenvalues[b] >= kLaplace34[b] - 1e-9);
}

TEST_CASE("rayleigh_trace") {
  // Exact lowest eigenvectors of laplace(2, 5): products of 1-D modes.
  const std::size_t n = 5;
  const std::vector<double> mu = laplace_1d_eigenvalues(n);
  const Vector u0 = laplace_1d_eigenvector(n, 0), u1 = laplace_1d_eigenvector(n, 1);
  const std::vector<Vector> f0{u0, u0}, f1{u0, u1}, f2{u1, u0};
  const std::vector<TTVector> states{rank_one(f0), rank_one(f1), rank_one(f2)};
  const BlockTT x = BlockTT::from_states(states);
  const TTMatrix a = laplace_tt(2, n);
  CHECK(std::abs(rayleigh_trace(a, x) - (2 * mu[0] + 2 * (mu[0] + mu[1]))) < 1e-12);

  // Random block against the dense trace, and invariance under exact moves.
  const TTMatrix h = henon_heiles_tt(3, 3);
  BlockTT y = BlockTT::random(Sizes{3, 3, 3}, 3, 3, 6);
  y.set_states(test::random_matrix(y.block().states().rows(), 3, 8));
  const Matrix yd = states_to_dense(y);
  const double dense_trace = (yd.transpose() * densify_operator(h) * yd).trace();
  CHECK(std::abs(rayleigh_trace(h, y) - dense_trace) < 1e-10 * std::max(1.0, std::abs(dense_trace)));
  const BlockTT moved = block_move(y, 1, {0.0, kUnboundedRank, 2});
  CHECK(std::abs(rayleigh_trace(h, moved) - dense_trace) < 1e-11 * std::max(1.0, std::abs(dense_trace)));
}
