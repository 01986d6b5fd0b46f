#pragma once

// Dense reference computations for small problems.

#include "blocktt/tt_core.hpp"

#include <cstddef>
#include <vector>

namespace blocktt {

inline constexpr std::size_t kDefaultDensifyCap = 4096;

struct DenseSpectrum {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // orthonormal columns
};

/// Full N x N matrix of a TT operator; throws SizeLimitError when N > cap.
Matrix densify_operator(const TTMatrix& a, std::size_t cap = kDefaultDensifyCap);

/// `count` smallest eigenpairs of a symmetric matrix; throws
/// std::invalid_argument when m is not symmetric to 1e-10 (relative).
DenseSpectrum dense_eig(const Matrix& m, std::size_t count);

struct SubspaceAngle {
  double angle = 0.0;
  /// True when either block had to be orthonormalized first.
  bool orthonormalized = false;
};

/// Largest principal angle between span(x) and span(y): arccos of the
/// smallest singular value of x^T y, clamped into [0, 1].
SubspaceAngle subspace_angle(const Matrix& x, const Matrix& y);

/// Same angle from Gram data only: cross(i, j) = <x_i, y_j>, gx and gy the
/// Gram matrices of the two families (need not be identities).
double subspace_angle_from_gram(const Matrix& cross, const Matrix& gx, const Matrix& gy);

/// Splits ascending values into runs whose consecutive gaps are at most
/// rel_gap times the total span.  Returns [begin, end) index pairs.
std::vector<std::pair<std::size_t, std::size_t>> group_levels(const std::vector<double>& values,
                                                              double rel_gap = 1e-8);

}  // namespace blocktt
