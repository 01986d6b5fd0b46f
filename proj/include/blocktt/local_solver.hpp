#pragma once

// Small and medium symmetric eigenproblems arising at one site of a sweep.

#include "blocktt/environment.hpp"
#include "blocktt/tt_core.hpp"

#include <cstddef>
#include <functional>
#include <optional>

namespace blocktt {

enum class LocalSolverKind { Dense, Iterative, Auto };

/// Symmetric operator given only by its action on a block of columns.
struct LinearOperator {
  std::size_t dim = 0;
  std::function<Matrix(const Matrix&)> apply;
  /// Optional diagonal, used by the diagonal preconditioner hook.
  std::function<Vector()> diagonal;
  /// Optional explicit assembly; falls back to applying to identity blocks.
  std::function<Matrix()> dense;
};

LinearOperator as_linear_operator(const LocalOperator& op);
LinearOperator as_linear_operator(const Matrix& m);

struct LocalSolveOptions {
  LocalSolverKind kind = LocalSolverKind::Auto;
  /// Auto switches to the iterative path above this many unknowns.
  std::size_t size_threshold = 500;
  /// Residual tolerance relative to the spectral scale of the Ritz values.
  double tol = 1e-10;
  std::size_t max_iter = 200;
  /// Largest problem the iterative path may fall back to dense on failure.
  std::size_t dense_fallback_limit = 4000;
  bool diagonal_preconditioner = false;
};

struct LocalEigResult {
  Vector values;       // ascending
  Matrix vectors;      // orthonormal columns
  Vector residuals;    // ||H v - lambda v|| per column
  bool converged = true;
  bool dense = false;
  std::size_t iterations = 0;
};

/// `count` smallest eigenpairs of `op` restricted to the orthogonal complement
/// of `constraints` (orthonormal columns, may have zero columns).  The warm
/// start block, when non-empty, seeds the iterative path.
LocalEigResult local_block_eig(const LinearOperator& op, std::size_t count, const Matrix& warm_start,
                               const LocalSolveOptions& options, const Matrix& constraints = Matrix());

/// Lowest `count` eigenpairs of a symmetric matrix (LAPACK, lower triangle
/// referenced).
void lowest_eigenpairs(Matrix a, std::size_t count, Vector& values, Matrix& vectors);

/// Dense path: symmetric eigendecomposition of the explicit matrix.
LocalEigResult dense_block_eig(const Matrix& h, std::size_t count, const Matrix& constraints = Matrix());

/// Block LOBPCG (Knyazev) with Rayleigh-Ritz on [X, W, P] and soft locking.
LocalEigResult lobpcg(const LinearOperator& op, const Matrix& x0, double tol, std::size_t max_iter,
                      const Matrix& constraints = Matrix(), bool diagonal_preconditioner = false);

/// Orthonormal basis of the column span, dropping directions whose Gram
/// eigenvalue falls below `drop` relative to the largest.
Matrix orthonormalize(const Matrix& m, double drop = 1e-12);

}  // namespace blocktt
