#include "blocktt/errors.hpp"
#include "blocktt/hamiltonians.hpp"
#include "blocktt/oracle.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace blocktt;
using blocktt::test::max_abs;

TEST_CASE("densify_operator") {
  const std::vector<std::size_t> modes{2, 3, 2};
  CHECK(max_abs(densify_operator(identity_operator(modes)) - Matrix::Identity(12, 12)) == 0.0);

  Matrix expected(4, 4);
  expected << 4, -1, -1, 0, -1, 4, 0, -1, -1, 0, 4, -1, 0, -1, -1, 4;
  CHECK(max_abs(densify_operator(laplace_tt(2, 2)) - expected) == 0.0);

  for (const TTMatrix& a : {laplace_tt(3, 3), heisenberg_tt(3), henon_heiles_tt(3, 3)}) {
    const TTVector x = tt_random(a.mode_sizes(), 3, 4);
    const Vector lhs = tt_to_dense(matvec(a, x));
    const Vector rhs = densify_operator(a) * tt_to_dense(x);
    CHECK((lhs - rhs).norm() <= 1e-11 * std::max(1.0, rhs.norm()));
  }

  CHECK_THROWS_AS(densify_operator(laplace_tt(5, 6)), SizeLimitError);
  CHECK_NOTHROW(densify_operator(laplace_tt(5, 6), 10000));
}

TEST_CASE("dense_eig") {
  Matrix m = Matrix::Zero(3, 3);
  m.diagonal() << 3, 1, 2;
  const DenseSpectrum s = dense_eig(m, 2);
  CHECK(s.eigenvalues.size() == 2);
  CHECK(s.eigenvalues(0) == 1.0);
  CHECK(s.eigenvalues(1) == 2.0);

  const auto ref = laplace_spectrum(3, 4, 10);
  const Matrix a = densify_operator(laplace_tt(3, 4));
  const DenseSpectrum l = dense_eig(a, 10);
  for (int k = 0; k < 10; ++k) CHECK(std::abs(l.eigenvalues(k) - ref[static_cast<std::size_t>(k)].value) < 1e-12);
  for (int k = 0; k < 10; ++k) {
    const Vector v = l.eigenvectors.col(k);
    CHECK((a * v - l.eigenvalues(k) * v).norm() <= 1e-10 * a.norm());
  }
  CHECK(max_abs(l.eigenvectors.transpose() * l.eigenvectors - Matrix::Identity(10, 10)) < 1e-12);

  const DenseSpectrum h = dense_eig(densify_operator(heisenberg_tt(2)), 2);
  CHECK(std::abs(h.eigenvalues(0) + 0.75) < 1e-12);
  CHECK(std::abs(h.eigenvalues(1) - 0.25) < 1e-12);

  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 2) = 1e-3;
  CHECK_THROWS_AS(dense_eig(asym, 1), std::invalid_argument);
}

TEST_CASE("subspace_angle") {
  const Matrix x = test::random_matrix(10, 3, 1).householderQr().householderQ() * Matrix::Identity(10, 3);
  CHECK(subspace_angle(x, x).angle < 1e-7);
  CHECK_FALSE(subspace_angle(x, x).orthonormalized);

  const Matrix e1 = Matrix::Identity(2, 1);
  Matrix e2 = Matrix::Zero(2, 1);
  e2(1, 0) = 1.0;
  CHECK(std::abs(subspace_angle(e1, e2).angle - std::numbers::pi / 2) < 1e-15);

  const Matrix y = test::random_matrix(10, 3, 2);
  const SubspaceAngle xy = subspace_angle(x, y);
  const SubspaceAngle yx = subspace_angle(y, x);
  CHECK(xy.orthonormalized);
  CHECK(std::abs(xy.angle - yx.angle) < 1e-12);

  // Same span, different basis: rounding may push sigma_min past 1.
  const Matrix mixed = x * test::random_matrix(3, 3, 5);
  const double a = subspace_angle(x, mixed).angle;
  CHECK_FALSE(std::isnan(a));
  CHECK(a < 1e-7);

  // From Gram data only, with non-orthonormal families.
  const double g = subspace_angle_from_gram(y.transpose() * mixed, y.transpose() * y, mixed.transpose() * mixed);
  CHECK(std::abs(g - xy.angle) < 1e-10);

  CHECK_THROWS_AS(subspace_angle(x, e1), std::invalid_argument);
  CHECK_THROWS_AS(subspace_angle(x, test::random_matrix(10, 2, 3)), std::invalid_argument);
}

TEST_CASE("group_levels") {
  const std::vector<double> v{1.0, 2.0, 2.0 + 1e-12, 2.0 - 1e-13 + 2e-12, 3.0, 3.5};
  const auto g = group_levels(v);
  REQUIRE(g.size() == 4);
  CHECK(g[0] == std::pair<std::size_t, std::size_t>{0, 1});
  CHECK(g[1] == std::pair<std::size_t, std::size_t>{1, 4});
  CHECK(g[2] == std::pair<std::size_t, std::size_t>{4, 5});
  CHECK(g[3] == std::pair<std::size_t, std::size_t>{5, 6});
  CHECK(group_levels({}).empty());
}
