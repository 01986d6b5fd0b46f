#pragma once

// Alternating one-site minimization of the block Rayleigh quotient
// trace(X^T A X) over block-TT states, plus a one-at-a-time deflation
// baseline built from the same sweep machinery.

#include "blocktt/block_tt.hpp"
#include "blocktt/local_solver.hpp"
#include "blocktt/tt_core.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace blocktt {

struct SolverConfig {
  std::size_t num_states = 1;
  double eps = 1e-6;
  std::size_t rmax = 1000;
  std::size_t max_sweeps = 20;
  /// Relative change of the eigenvalue sum between full sweeps; defaults to eps.
  std::optional<double> conv_tol;
  LocalSolverKind local_solver = LocalSolverKind::Auto;
  std::size_t local_size_threshold = 500;
  /// Residual tolerance of the iterative local solver; defaults to
  /// clamp(eps^2, 1e-12, 1e-6): eigenvalue errors scale like eps^2, so the
  /// local residuals have to be at least that small.
  std::optional<double> local_iter_tol;
  std::size_t local_max_iter = 200;
  bool diagonal_preconditioner = false;
  /// Rank of the random initial guess; defaults to the working block size.
  std::optional<std::size_t> init_rank;
  std::uint64_t seed = 0;
  std::size_t densify_cap = 4096;

  double effective_conv_tol() const;
  double effective_local_tol() const;
};

/// Throws ConfigError when the configuration cannot work for these mode sizes.
void validate(const SolverConfig& config, const std::vector<std::size_t>& mode_sizes);

struct SweepRecord {
  std::size_t sweep = 0;
  /// Deflation: index of the state being optimized.  Block solver: 0.
  std::size_t target = 0;
  std::vector<double> eigenvalues;
  double max_residual = 0.0;
  double wall_seconds = 0.0;
  std::size_t max_rank = 0;
  std::size_t dense_solves = 0;
  std::size_t iterative_solves = 0;
};

struct SpectrumResult {
  std::vector<double> eigenvalues;
  BlockTT states;
  std::vector<std::size_t> rank_profile;
  std::vector<SweepRecord> sweep_history;
  bool converged = false;
  std::size_t num_sweeps = 0;
  double wall_seconds = 0.0;
};

/// Block ALS eigensolver.  With `initial` unset a random block-TT of the
/// configured rank is used.  For num_states == 1 the sweeps carry one extra
/// state so that bond ranks can adapt; only the lowest state is returned.
SpectrumResult eigb(const TTMatrix& a, const SolverConfig& config,
                    std::optional<BlockTT> initial = std::nullopt);

/// States computed one after another, each minimized under orthogonality
/// constraints against the ones already found.  Kept as a baseline.
SpectrumResult deflation_solve(const TTMatrix& a, const SolverConfig& config);

/// trace(X^T A X) of the represented states.
double rayleigh_trace(const TTMatrix& a, const BlockTT& x);

}  // namespace blocktt
