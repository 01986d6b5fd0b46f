#pragma once

// Model operators in TT-matrix form and the closed-form Laplace spectrum.

#include "blocktt/tt_core.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blocktt {

enum class Model { Laplace, HenonHeiles, Heisenberg };

inline constexpr double kHenonHeilesLambda = 0.111803;

struct HamiltonianSpec {
  Model model = Model::Laplace;
  std::size_t d = 1;
  std::size_t n = 2;
  double lambda = kHenonHeilesLambda;

  /// Throws std::invalid_argument for inconsistent sizes.
  void validate() const;
};

std::string_view model_name(Model m);
std::optional<Model> parse_model(std::string_view name);

TTMatrix build_operator(const HamiltonianSpec& spec);

/// -Laplacian with Dirichlet second differences tridiag(-1, 2, -1) per mode.
TTMatrix laplace_tt(std::size_t d, std::size_t n);

struct LaplaceLevel {
  double value = 0.0;
  std::vector<std::size_t> index;  // b_1..b_d, zero-based
};

/// 4 sin^2(pi (b+1) / (2 (n+1))), b = 0..n-1.
std::vector<double> laplace_1d_eigenvalues(std::size_t n);
/// The `count` smallest sums mu_{b_1} + ... + mu_{b_d}, ties in lexicographic order.
std::vector<LaplaceLevel> laplace_spectrum(std::size_t d, std::size_t n, std::size_t count);
/// Normalized 1-D eigenvector for index b: sqrt(2/(n+1)) sin(pi (i+1)(b+1)/(n+1)).
Vector laplace_1d_eigenvector(std::size_t n, std::size_t b);

/// Roots of the physicists' Hermite polynomial H_n, ascending.
std::vector<double> hermite_mesh(std::size_t n);
/// H_n evaluated by the three-term recurrence.
double hermite_value(std::size_t n, double t);
/// Second-derivative DVR matrix on the Hermite mesh (sign: represents -d^2/dt^2).
Matrix hermite_dvr_laplace(std::size_t n);

/// sum_k [ D/2 + Q^2/2 - (lambda/3) Q^3 [k>=2] ]_k + lambda sum_k (Q^2)_k (Q)_{k+1}.
TTMatrix henon_heiles_tt(std::size_t d, std::size_t n, double lambda = kHenonHeilesLambda);

/// Spin-1/2 chain sum_i S_i . S_{i+1} with open boundaries.
TTMatrix heisenberg_tt(std::size_t d);

}  // namespace blocktt
