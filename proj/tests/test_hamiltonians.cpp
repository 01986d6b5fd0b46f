#include "blocktt/hamiltonians.hpp"
#include "blocktt/oracle.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

using namespace blocktt;
using blocktt::test::kron_all;
using blocktt::test::kron_sum;
using blocktt::test::max_abs;

namespace {

Matrix second_difference(std::size_t n) {
  Matrix k = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < k.rows(); ++i) {
    k(i, i) = 2.0;
    if (i > 0) k(i, i - 1) = -1.0;
    if (i + 1 < k.rows()) k(i, i + 1) = -1.0;
  }
  return k;
}

std::vector<std::size_t> rounded_ranks(const TTMatrix& a) { return tt_round(a, 1e-13).ranks(); }

std::size_t max_rank(const std::vector<std::size_t>& r) {
  std::size_t m = 0;
  for (std::size_t v : r) m = std::max(m, v);
  return m;
}

Eigen::MatrixXcd ckron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// sum_i S_i . S_{i+1} from complex Pauli matrices, no ladder operators.
Eigen::MatrixXcd heisenberg_complex(std::size_t d) {
  using C = std::complex<double>;
  Eigen::MatrixXcd sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 0.5, 0.5, 0;
  sy << 0, C(0, -0.5), C(0, 0.5), 0;
  sz << 0.5, 0, 0, -0.5;
  const Eigen::Index dim = Eigen::Index{1} << d;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t i = 0; i + 1 < d; ++i) {
    for (const Eigen::MatrixXcd* s : {&sx, &sy, &sz}) {
      Eigen::MatrixXcd term = Eigen::MatrixXcd::Identity(1, 1);
      for (std::size_t j = 0; j < d; ++j)
        term = ckron(term, (j == i || j == i + 1) ? *s : Eigen::MatrixXcd::Identity(2, 2));
      h += term;
    }
  }
  return h;
}

}  // namespace

TEST_CASE("laplace_tt") {
  const Matrix one = densify_operator(laplace_tt(1, 3));
  Matrix expected(3, 3);
  expected << 2, -1, 0, -1, 2, -1, 0, -1, 2;
  CHECK(max_abs(one - expected) == 0.0);

  const Matrix k2 = second_difference(2);
  CHECK(max_abs(densify_operator(laplace_tt(2, 2)) - kron_sum(k2, 2)) < 1e-15);
  CHECK(max_abs(densify_operator(laplace_tt(4, 3)) - kron_sum(second_difference(3), 4)) < 1e-13);

  for (std::size_t d : {2, 3, 5, 8}) {
    const TTMatrix a = laplace_tt(d, 4);
    CHECK(a.symmetric());
    for (std::size_t r : a.ranks()) CHECK(r == 2);
  }
}

TEST_CASE("laplace_spectrum") {
  const auto s12 = laplace_spectrum(1, 2, 2);
  REQUIRE(s12.size() == 2);
  CHECK(std::abs(s12[0].value - 1.0) < 1e-12);
  CHECK(std::abs(s12[1].value - 3.0) < 1e-12);

  const std::vector<double> ref{1.1458980337503193, 2.1458980337503148, 2.1458980337503153,
                                2.1458980337503193, 3.1458980337503131, 3.1458980337503135,
                                3.1458980337503144, 3.3819660112501042, 3.3819660112501069,
                                3.3819660112501073};
  const auto s34 = laplace_spectrum(3, 4, 10);
  for (std::size_t k = 0; k < 10; ++k) CHECK(std::abs(s34[k].value - ref[k]) < 1e-12);

  // Ties in lexicographic order of the multi-index.
  CHECK(s34[1].index == std::vector<std::size_t>{0, 0, 1});
  CHECK(s34[2].index == std::vector<std::size_t>{0, 1, 0});
  CHECK(s34[3].index == std::vector<std::size_t>{1, 0, 0});

  for (std::size_t n : {8, 16}) {
    const auto s = laplace_spectrum(5, n, 31);
    std::vector<double> values;
    for (const auto& l : s) values.push_back(l.value);
    const auto groups = group_levels(values);
    REQUIRE(groups.size() >= 4);
    const std::size_t mult[4] = {1, 5, 10, 5};
    for (std::size_t g = 0; g < 4; ++g) CHECK(groups[g].second - groups[g].first == mult[g]);
  }
}

TEST_CASE("hermite_mesh") {
  const auto m1 = hermite_mesh(1);
  REQUIRE(m1.size() == 1);
  CHECK(std::abs(m1[0]) < 1e-15);

  const auto m2 = hermite_mesh(2);
  CHECK(std::abs(m2[0] + 0.70710678118654746) < 1e-12);
  CHECK(std::abs(m2[1] - 0.70710678118654746) < 1e-12);

  const std::vector<double> ref5{-2.0201828704560856, -0.95857246461381851, 0.0, 0.95857246461381851,
                                 2.0201828704560856};
  const auto m5 = hermite_mesh(5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(m5[i] - ref5[i]) < 1e-13);

  const auto m28 = hermite_mesh(28);
  double scale = 0.0;
  for (double t : m28) scale = std::max(scale, std::abs(hermite_value(28, t + 1e-3)));
  for (std::size_t i = 0; i < 28; ++i) {
    CHECK(std::abs(hermite_value(28, m28[i])) < 1e-8 * scale);
    CHECK(std::abs(m28[i] + m28[27 - i]) < 1e-13);
    if (i > 0) CHECK(m28[i] > m28[i - 1]);
  }
}

TEST_CASE("hermite_dvr_laplace") {
  const Matrix d1 = hermite_dvr_laplace(1);
  CHECK(std::abs(d1(0, 0) - 0.5) < 1e-12);

  const Matrix d2 = hermite_dvr_laplace(2);
  CHECK(std::abs(d2(0, 1) + 0.5) < 1e-12);
  CHECK(std::abs(d2(0, 0) - 1.0) < 1e-12);

  const double ref3[9] = {1.3333333333333333,   -0.83333333333333348, -0.16666666666666663,
                          -0.83333333333333348, 1.8333333333333333,   -0.83333333333333348,
                          -0.16666666666666663, -0.83333333333333348, 1.3333333333333333};
  const Matrix d3 = hermite_dvr_laplace(3);
  for (int i = 0; i < 9; ++i) CHECK(std::abs(d3(i / 3, i % 3) - ref3[i]) < 1e-12);

  const Matrix d28 = hermite_dvr_laplace(28);
  CHECK(max_abs(d28 - d28.transpose()) < 1e-12);
}

TEST_CASE("henon_heiles_tt") {
  const std::size_t n = 6;
  const auto mesh = hermite_mesh(n);
  Matrix q = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = mesh[i];
  const Matrix harmonic = 0.5 * hermite_dvr_laplace(n) + 0.5 * q * q;
  const Matrix id = Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

  for (std::size_t d : {2, 3}) {
    CHECK(max_abs(densify_operator(henon_heiles_tt(d, n, 0.0)) - kron_sum(harmonic, d)) < 1e-12);
  }

  const double lam = kHenonHeilesLambda;
  Matrix direct = kron_sum(harmonic, 2);
  direct -= lam / 3.0 * kron_all({id, q * q * q});
  direct += lam * kron_all({q * q, q});
  const TTMatrix hh = henon_heiles_tt(2, n, lam);
  CHECK(max_abs(densify_operator(hh) - direct) < 1e-12);
  CHECK(hh.symmetric());

  // Lowest six values of the d=2, n=6 operator, dense numpy reference.
  const double ref[6] = {0.99859526749906058, 1.9900682411601636, 1.9900905961260222,
                         2.9548098314757003,  2.9839838353661894, 2.9851730505664804};
  const DenseSpectrum s = dense_eig(densify_operator(hh), 6);
  for (int k = 0; k < 6; ++k) CHECK(std::abs(s.eigenvalues(k) - ref[k]) < 1e-10);

  for (std::size_t d : {2, 4, 10}) {
    const TTMatrix a = henon_heiles_tt(d, 8);
    CHECK(max_rank(a.ranks()) == 3);
    CHECK(max_rank(rounded_ranks(a)) <= 7);
  }
  CHECK_THROWS_AS(henon_heiles_tt(1, 4), std::invalid_argument);
}

TEST_CASE("harmonic limit of the DVR") {
  const DenseSpectrum s = dense_eig(densify_operator(henon_heiles_tt(2, 10, 0.0)), 4);
  const double ref[4] = {1.0, 2.0, 2.0, 3.0};
  for (int k = 0; k < 4; ++k) CHECK(std::abs(s.eigenvalues(k) - ref[k]) < 1e-6);
}

TEST_CASE("heisenberg_tt") {
  const DenseSpectrum s2 = dense_eig(densify_operator(heisenberg_tt(2)), 4);
  CHECK(std::abs(s2.eigenvalues(0) + 0.75) < 1e-12);
  for (int k = 1; k < 4; ++k) CHECK(std::abs(s2.eigenvalues(k) - 0.25) < 1e-12);

  for (std::size_t d : {2, 3, 5}) {
    const Eigen::MatrixXcd c = heisenberg_complex(d);
    CHECK(c.imag().cwiseAbs().maxCoeff() == 0.0);
    CHECK(max_abs(densify_operator(heisenberg_tt(d)) - c.real()) < 1e-12);
  }

  // Full d=3 spectrum, dense numpy reference.
  const double ref3[8] = {-1, -1, 0, 0, 0.5, 0.5, 0.5, 0.5};
  const DenseSpectrum s3 = dense_eig(densify_operator(heisenberg_tt(3)), 8);
  for (int k = 0; k < 8; ++k) CHECK(std::abs(s3.eigenvalues(k) - ref3[k]) < 1e-12);

  for (std::size_t d : {3, 6, 10}) {
    const TTMatrix a = heisenberg_tt(d);
    CHECK(a.symmetric());
    for (std::size_t r : a.ranks()) CHECK(r == 5);
    CHECK(max_rank(rounded_ranks(a)) <= 5);
  }
  CHECK_THROWS_AS(heisenberg_tt(1), std::invalid_argument);
}

TEST_CASE("HamiltonianSpec") {
  HamiltonianSpec s{Model::Heisenberg, 4, 3, kHenonHeilesLambda};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.n = 2;
  CHECK_NOTHROW(s.validate());
  CHECK(build_operator(s).dim() == 4);
  CHECK(parse_model("henon-heiles") == Model::HenonHeiles);
  CHECK(parse_model("laplace") == Model::Laplace);
  CHECK_FALSE(parse_model("ising").has_value());
  CHECK(model_name(Model::HenonHeiles) == "henon_heiles");
}
