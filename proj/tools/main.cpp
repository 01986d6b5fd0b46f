// blocktt: run, scan and verify block-TT eigenvalue experiments.

#include "blocktt/errors.hpp"
#include "blocktt/experiment.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace blocktt;

constexpr int kUsageError = 1;

struct Options {
  std::string model = "laplace";
  std::size_t d = 3;
  std::optional<std::size_t> n;
  std::size_t b = 1;
  double eps = 1e-6;
  std::size_t rmax = 1000;
  std::size_t max_sweeps = 20;
  std::uint64_t seed = 0;
  std::string solver = "eigb";
  double lambda = kHenonHeilesLambda;
  std::string verify = "none";
  std::string out;
  std::string format = "json";
  std::optional<double> conv_tol;
  std::string local_solver = "auto";
  std::size_t local_threshold = 500;
  std::optional<double> local_tol;
  std::size_t local_max_iter = 200;
  bool preconditioner = false;
  std::size_t densify_cap = 4096;
  double eigenvalue_tol = 1e-6;
  double angle_tol = 1e-6;
};

void add_common(CLI::App* app, Options& o) {
  app->add_option("--model", o.model, "laplace | henon_heiles | heisenberg")->capture_default_str();
  app->add_option("--d", o.d, "Dimension / number of sites")->capture_default_str();
  app->add_option("--n", o.n, "Mode size (laplace 16, henon_heiles 28 by default; heisenberg is fixed at 2)");
  app->add_option("--b", o.b, "Number of eigenstates B")->capture_default_str();
  app->add_option("--eps", o.eps, "Truncation tolerance")->capture_default_str();
  app->add_option("--rmax", o.rmax, "Rank cap")->capture_default_str();
  app->add_option("--max-sweeps", o.max_sweeps, "Sweep limit")->capture_default_str();
  app->add_option("--seed", o.seed, "Seed of the random initial guess")->capture_default_str();
  app->add_option("--solver", o.solver, "eigb | deflation")->capture_default_str();
  app->add_option("--lambda", o.lambda, "Henon-Heiles anharmonicity")->capture_default_str();
  app->add_option("--verify", o.verify, "none | closed-form | dense-oracle")->capture_default_str();
  app->add_option("--out", o.out, "Output path stem (writes <out>.json / <out>.csv)");
  app->add_option("--format", o.format, "json | csv | both")->capture_default_str();
  app->add_option("--conv-tol", o.conv_tol, "Relative eigenvalue-sum change between sweeps (default eps)");
  app->add_option("--local-solver", o.local_solver, "auto | dense | iterative")->capture_default_str();
  app->add_option("--local-threshold", o.local_threshold, "Auto: dense up to this local size")
      ->capture_default_str();
  app->add_option("--local-tol", o.local_tol, "Iterative local solver tolerance");
  app->add_option("--local-max-iter", o.local_max_iter, "Iterative local solver iteration cap")
      ->capture_default_str();
  app->add_flag("--precondition", o.preconditioner, "Diagonal preconditioner in the iterative local solver");
  app->add_option("--densify-cap", o.densify_cap, "Largest n^d for dense verification")->capture_default_str();
  app->add_option("--eigenvalue-tol", o.eigenvalue_tol, "Verification tolerance for eigenvalues")
      ->capture_default_str();
  app->add_option("--angle-tol", o.angle_tol, "Verification tolerance for level subspace angles")
      ->capture_default_str();
}

template <class T>
T parsed(std::optional<T> v, const std::string& what, const std::string& raw) {
  if (!v) throw ConfigError("unknown " + what + " '" + raw + "'");
  return *v;
}

ExperimentConfig to_config(const Options& o) {
  ExperimentConfig c;
  c.model.model = parsed(parse_model(o.model), "model", o.model);
  c.model.d = o.d;
  switch (c.model.model) {
    case Model::Laplace: c.model.n = o.n.value_or(16); break;
    case Model::HenonHeiles: c.model.n = o.n.value_or(28); break;
    case Model::Heisenberg: c.model.n = o.n.value_or(2); break;
  }
  c.model.lambda = o.lambda;
  c.solver = parsed(parse_solver(o.solver), "solver", o.solver);
  c.verify = parsed(parse_verify(o.verify), "verification mode", o.verify);
  c.format = parsed(parse_format(o.format), "format", o.format);
  c.out = o.out;
  c.eigenvalue_tol = o.eigenvalue_tol;
  c.angle_tol = o.angle_tol;
  SolverConfig& s = c.solver_config;
  s.num_states = o.b;
  s.eps = o.eps;
  s.rmax = o.rmax;
  s.max_sweeps = o.max_sweeps;
  s.seed = o.seed;
  s.conv_tol = o.conv_tol;
  s.local_solver = parsed(parse_local_solver(o.local_solver), "local solver", o.local_solver);
  s.local_size_threshold = o.local_threshold;
  s.local_iter_tol = o.local_tol;
  s.local_max_iter = o.local_max_iter;
  s.diagonal_preconditioner = o.preconditioner;
  s.densify_cap = o.densify_cap;
  return c;
}

void print_summary(const ResultRecord& r) {
  std::printf("model %s d=%zu n=%zu B=%zu solver=%s\n", std::string(model_name(r.config.model.model)).c_str(),
              r.config.model.d, r.config.model.n, r.config.solver_config.num_states,
              std::string(to_string(r.config.solver)).c_str());
  std::printf("converged %s after %zu sweeps, %.3f s\n", r.converged ? "yes" : "no", r.num_sweeps,
              r.wall_time_seconds);
  for (std::size_t j = 0; j < r.eigenvalues.size(); ++j) std::printf("  %3zu  %.15e\n", j, r.eigenvalues[j]);
  if (r.verification) {
    const Verification& v = *r.verification;
    std::printf("verification %s: max |error| %.3e, %zu mismatched", std::string(to_string(v.mode)).c_str(),
                v.max_abs_error, v.mismatched);
    if (v.max_angle) std::printf(", max level angle %.3e", *v.max_angle);
    std::printf(" -> %s\n", v.passed ? "PASS" : "FAIL");
  }
}

int emit(const ResultRecord& r) {
  if (r.config.out.empty()) {
    std::cout << (r.config.format == OutputFormat::Csv ? eigenvalue_csv(r) : to_json(r).dump(2) + "\n");
  } else {
    write_outputs(r);
    print_summary(r);
  }
  return exit_code(r);
}

std::vector<double> parse_values(const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw ConfigError("cannot parse scan value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--values needs at least one value");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block tensor-train eigensolver experiments"};
  app.require_subcommand(1);
  Options run_opts, scan_opts, verify_opts;
  CLI::App* run = app.add_subcommand("run", "Solve one configuration");
  add_common(run, run_opts);
  CLI::App* scan_cmd = app.add_subcommand("scan", "Repeat a configuration over one parameter axis");
  add_common(scan_cmd, scan_opts);
  std::string axis_raw, values_raw;
  std::size_t jobs = 1;
  scan_cmd->add_option("--axis", axis_raw, "d | n | b | eps")->required();
  scan_cmd->add_option("--values", values_raw, "Comma separated values")->required();
  scan_cmd->add_option("--jobs", jobs, "Rows run concurrently")->capture_default_str();
  CLI::App* verify = app.add_subcommand("verify", "Solve and compare against a reference");
  add_common(verify, verify_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (const auto threads = threads_from_env()) set_kernel_threads(*threads);

    if (*run) return emit(run_experiment(to_config(run_opts)));

    if (*verify) {
      ExperimentConfig c = to_config(verify_opts);
      if (c.verify == VerifyMode::None) {
        c.verify = c.model.model == Model::Laplace ? VerifyMode::ClosedForm : VerifyMode::DenseOracle;
      }
      return emit(run_experiment(c));
    }

    const ExperimentConfig base = to_config(scan_opts);
    const ScanAxis axis = parsed(parse_axis(axis_raw), "scan axis", axis_raw);
    const std::vector<double> values = parse_values(values_raw);
    // Reject a broken template up front; per-value problems stay per-row.
    validate(with_axis(base, axis, values.front()));
    const std::vector<ScanRow> rows = scan(base, axis, values, jobs);
    const std::string csv = scan_csv(axis, rows);
    if (base.out.empty()) {
      std::cout << (base.format == OutputFormat::Json ? scan_to_json(base, axis, rows).dump(2) + "\n" : csv);
    } else {
      if (base.format != OutputFormat::Csv) {
        std::ofstream(base.out + ".json") << scan_to_json(base, axis, rows).dump(2) << "\n";
      }
      if (base.format != OutputFormat::Json) std::ofstream(base.out + ".csv") << csv;
      for (const ScanRow& r : rows) {
        if (r.record) {
          std::printf("%s=%g  %.3f s  converged %s\n", std::string(to_string(axis)).c_str(), r.value,
                      r.record->wall_time_seconds, r.record->converged ? "yes" : "no");
        } else {
          std::printf("%s=%g  failed: %s\n", std::string(to_string(axis)).c_str(), r.value, r.error.c_str());
        }
      }
    }
    int code = 0;
    for (const ScanRow& r : rows) {
      if (!r.record) code = std::max(code, 2);
      else code = std::max(code, exit_code(*r.record));
    }
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
