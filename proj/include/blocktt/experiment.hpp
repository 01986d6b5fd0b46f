#pragma once

// Experiment runner behind the command-line tool: configure a model and a
// solver, run, verify against a reference, and serialize the outcome.

#include "blocktt/eigb.hpp"
#include "blocktt/hamiltonians.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace blocktt {

inline constexpr std::string_view kLibraryVersion = "0.1.0";
inline constexpr std::string_view kSchemaVersion = "1";

enum class SolverKind { Eigb, Deflation };
enum class VerifyMode { None, ClosedForm, DenseOracle };
enum class OutputFormat { Json, Csv, Both };

std::string_view to_string(SolverKind s);
std::string_view to_string(VerifyMode v);
std::string_view to_string(OutputFormat f);
std::string_view to_string(LocalSolverKind k);
std::optional<SolverKind> parse_solver(std::string_view s);
std::optional<VerifyMode> parse_verify(std::string_view s);
std::optional<OutputFormat> parse_format(std::string_view s);
std::optional<LocalSolverKind> parse_local_solver(std::string_view s);

struct ExperimentConfig {
  HamiltonianSpec model;
  SolverKind solver = SolverKind::Eigb;
  SolverConfig solver_config;
  VerifyMode verify = VerifyMode::None;
  /// Largest allowed absolute eigenvalue error.
  double eigenvalue_tol = 1e-6;
  /// Largest allowed subspace angle per complete level (closed form only).
  double angle_tol = 1e-6;
  /// Output path stem; empty means no files.
  std::string out;
  OutputFormat format = OutputFormat::Json;
};

/// Throws ConfigError on inconsistent settings.
void validate(const ExperimentConfig& config);

struct LevelReport {
  std::size_t level = 0;
  std::size_t first = 0;  // index of the first state of the level
  std::size_t multiplicity = 0;
  double reference = 0.0;
  /// Present when the level lies entirely inside the computed block.
  std::optional<double> angle;
  /// Number of computed values clustering with this level.
  std::size_t computed_multiplicity = 0;
};

struct Verification {
  VerifyMode mode = VerifyMode::None;
  std::vector<double> reference;
  std::vector<double> abs_errors;
  std::vector<double> rel_errors;
  /// ||A x - lambda x|| / ||x|| per state (dense oracle only).
  std::vector<double> residuals;
  std::vector<LevelReport> levels;
  double max_abs_error = 0.0;
  std::optional<double> max_angle;
  std::size_t mismatched = 0;
  bool passed = false;
};

struct ResultRecord {
  ExperimentConfig config;
  std::vector<double> eigenvalues;
  std::vector<std::size_t> rank_profile;
  std::vector<SweepRecord> sweep_history;
  bool converged = false;
  std::size_t num_sweeps = 0;
  double wall_time_seconds = 0.0;
  double verify_seconds = 0.0;
  std::optional<Verification> verification;
  std::string note;
};

/// Runs the solver and the requested verification.  Does not write files.
ResultRecord run_experiment(const ExperimentConfig& config);

/// Closed-form (Laplace) or dense-oracle comparison of computed eigenpairs.
Verification verify_result(const ExperimentConfig& config, const TTMatrix& a, const SpectrumResult& result);

/// 0 success, 2 not converged, 3 verification failed.
int exit_code(const ResultRecord& record);

nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const ResultRecord& record);
/// Eigenvalue table with one row per state.
std::string eigenvalue_csv(const ResultRecord& record);

/// Writes <out>.json and/or <out>.csv according to the configured format.
void write_outputs(const ResultRecord& record);

enum class ScanAxis { D, N, B, Eps };
std::optional<ScanAxis> parse_axis(std::string_view s);
std::string_view to_string(ScanAxis a);

struct ScanRow {
  double value = 0.0;
  std::optional<ResultRecord> record;
  std::string error;
};

/// Applies one axis value to a copy of the template.
ExperimentConfig with_axis(const ExperimentConfig& base, ScanAxis axis, double value);

/// One independent run per value; failures are recorded per row.  Rows run
/// on up to `jobs` threads.
std::vector<ScanRow> scan(const ExperimentConfig& base, ScanAxis axis, const std::vector<double>& values,
                          std::size_t jobs = 1);

nlohmann::json scan_to_json(const ExperimentConfig& base, ScanAxis axis, const std::vector<ScanRow>& rows);
/// Long-format table: one line per (row, state).
std::string scan_csv(ScanAxis axis, const std::vector<ScanRow>& rows);

/// Thread cap for dense kernels, read from TTSPEC_THREADS.  Returns nullopt
/// when unset; throws ConfigError when set to something other than a
/// positive integer.
std::optional<std::size_t> threads_from_env();
/// Applies a thread cap to the dense-kernel backends.
void set_kernel_threads(std::size_t threads);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace blocktt
