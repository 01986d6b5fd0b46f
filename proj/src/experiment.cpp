#include "blocktt/experiment.hpp"

#include "blocktt/errors.hpp"
#include "blocktt/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

extern "C" void openblas_set_num_threads(int);

namespace blocktt {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

std::string sci(double v) {
  if (!std::isfinite(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

std::size_t space_size(const HamiltonianSpec& m) {
  std::size_t total = 1;
  for (std::size_t k = 0; k < m.d; ++k) {
    if (total > std::numeric_limits<std::size_t>::max() / m.n) return std::numeric_limits<std::size_t>::max();
    total *= m.n;
  }
  return total;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json sweep_json(const SweepRecord& s) {
  return {{"sweep", s.sweep},
          {"target", s.target},
          {"eigenvalues", s.eigenvalues},
          {"max_residual", s.max_residual},
          {"wall_seconds", s.wall_seconds},
          {"max_rank", s.max_rank},
          {"dense_solves", s.dense_solves},
          {"iterative_solves", s.iterative_solves}};
}

json verification_json(const Verification& v) {
  json levels = json::array();
  for (const LevelReport& l : v.levels) {
    levels.push_back({{"level", l.level},
                      {"first", l.first},
                      {"multiplicity", l.multiplicity},
                      {"computed_multiplicity", l.computed_multiplicity},
                      {"reference", l.reference},
                      {"angle", optional_number(l.angle)}});
  }
  return {{"mode", to_string(v.mode)},
          {"reference", v.reference},
          {"abs_errors", v.abs_errors},
          {"rel_errors", v.rel_errors},
          {"residuals", v.residuals},
          {"levels", levels},
          {"max_abs_error", v.max_abs_error},
          {"max_angle", optional_number(v.max_angle)},
          {"mismatched", v.mismatched},
          {"passed", v.passed}};
}

void fill_errors(Verification& v, const std::vector<double>& computed, double tol) {
  const std::size_t b = std::min(computed.size(), v.reference.size());
  v.abs_errors.resize(b);
  v.rel_errors.resize(b);
  for (std::size_t i = 0; i < b; ++i) {
    const double err = std::abs(computed[i] - v.reference[i]);
    v.abs_errors[i] = err;
    v.rel_errors[i] = v.reference[i] != 0.0 ? err / std::abs(v.reference[i]) : err;
    v.max_abs_error = std::max(v.max_abs_error, err);
    if (!(err <= tol)) ++v.mismatched;
  }
}

void closed_form_levels(Verification& v, const ExperimentConfig& config, const SpectrumResult& result) {
  const HamiltonianSpec& m = config.model;
  const std::size_t b = v.reference.size();
  // One extra value tells whether the last level is cut by the block boundary.
  const std::vector<LaplaceLevel> spectrum = laplace_spectrum(m.d, m.n, b + 1);
  std::vector<double> values;
  for (const LaplaceLevel& l : spectrum) values.push_back(l.value);
  const auto groups = group_levels(values);

  const auto computed_groups = group_levels(result.eigenvalues);
  std::vector<TTVector> states;
  for (std::size_t j = 0; j < b; ++j) states.push_back(extract_state(result.states, j));

  std::vector<Vector> factors(m.d);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto [first, end] = groups[g];
    if (first >= b) break;
    LevelReport rep;
    rep.level = g;
    rep.first = first;
    rep.multiplicity = end - first;
    rep.reference = values[first];
    for (const auto& cg : computed_groups) {
      if (cg.first == first) rep.computed_multiplicity = cg.second - cg.first;
    }
    if (end <= b) {
      const std::size_t k = end - first;
      std::vector<TTVector> exact;
      for (std::size_t j = first; j < end; ++j) {
        for (std::size_t s = 0; s < m.d; ++s) factors[s] = laplace_1d_eigenvector(m.n, spectrum[j].index[s]);
        exact.push_back(rank_one(factors));
      }
      Matrix cross(idx(k), idx(k)), gx(idx(k), idx(k)), gy(idx(k), idx(k));
      for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t c = 0; c < k; ++c) {
          cross(idx(r), idx(c)) = dot(states[first + r], exact[c]);
          gx(idx(r), idx(c)) = dot(states[first + r], states[first + c]);
          gy(idx(r), idx(c)) = dot(exact[r], exact[c]);
        }
      }
      rep.angle = subspace_angle_from_gram(cross, gx, gy);
      v.max_angle = std::max(v.max_angle.value_or(0.0), *rep.angle);
    }
    v.levels.push_back(rep);
  }
}

}  // namespace

std::string_view to_string(SolverKind s) { return s == SolverKind::Eigb ? "eigb" : "deflation"; }

std::string_view to_string(VerifyMode v) {
  switch (v) {
    case VerifyMode::None: return "none";
    case VerifyMode::ClosedForm: return "closed-form";
    case VerifyMode::DenseOracle: return "dense-oracle";
  }
  return "none";
}

std::string_view to_string(OutputFormat f) {
  switch (f) {
    case OutputFormat::Json: return "json";
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Both: return "both";
  }
  return "json";
}

std::string_view to_string(LocalSolverKind k) {
  switch (k) {
    case LocalSolverKind::Dense: return "dense";
    case LocalSolverKind::Iterative: return "iterative";
    case LocalSolverKind::Auto: return "auto";
  }
  return "auto";
}

std::optional<SolverKind> parse_solver(std::string_view s) {
  if (s == "eigb" || s == "block") return SolverKind::Eigb;
  if (s == "deflation") return SolverKind::Deflation;
  return std::nullopt;
}

std::optional<VerifyMode> parse_verify(std::string_view s) {
  if (s == "none") return VerifyMode::None;
  if (s == "closed-form") return VerifyMode::ClosedForm;
  if (s == "dense-oracle") return VerifyMode::DenseOracle;
  return std::nullopt;
}

std::optional<OutputFormat> parse_format(std::string_view s) {
  if (s == "json") return OutputFormat::Json;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "both") return OutputFormat::Both;
  return std::nullopt;
}

std::optional<LocalSolverKind> parse_local_solver(std::string_view s) {
  if (s == "dense") return LocalSolverKind::Dense;
  if (s == "iterative") return LocalSolverKind::Iterative;
  if (s == "auto") return LocalSolverKind::Auto;
  return std::nullopt;
}

void validate(const ExperimentConfig& config) {
  try {
    config.model.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  validate(config.solver_config, std::vector<std::size_t>(config.model.d, config.model.n));
  if (config.verify == VerifyMode::ClosedForm && config.model.model != Model::Laplace) {
    throw ConfigError("closed-form verification is only available for the laplace model");
  }
  if (config.verify == VerifyMode::DenseOracle && space_size(config.model) > config.solver_config.densify_cap) {
    throw ConfigError("dense-oracle verification needs n^d <= densify cap (" +
                      std::to_string(config.solver_config.densify_cap) + ")");
  }
  if (!(config.eigenvalue_tol > 0.0) || !(config.angle_tol > 0.0)) {
    throw ConfigError("verification tolerances must be positive");
  }
}

Verification verify_result(const ExperimentConfig& config, const TTMatrix& a, const SpectrumResult& result) {
  Verification v;
  v.mode = config.verify;
  const std::size_t b = result.eigenvalues.size();
  if (config.verify == VerifyMode::ClosedForm) {
    if (config.model.model != Model::Laplace) throw ConfigError("closed-form verification needs the laplace model");
    for (const LaplaceLevel& l : laplace_spectrum(config.model.d, config.model.n, b)) v.reference.push_back(l.value);
    fill_errors(v, result.eigenvalues, config.eigenvalue_tol);
    closed_form_levels(v, config, result);
  } else if (config.verify == VerifyMode::DenseOracle) {
    const Matrix dense = densify_operator(a, config.solver_config.densify_cap);
    const DenseSpectrum ds = dense_eig(dense, b);
    v.reference.assign(ds.eigenvalues.data(), ds.eigenvalues.data() + b);
    fill_errors(v, result.eigenvalues, config.eigenvalue_tol);
    const Matrix x = states_to_dense(result.states, config.solver_config.densify_cap);
    for (std::size_t j = 0; j < b; ++j) {
      const Vector xj = x.col(idx(j));
      v.residuals.push_back((dense * xj - result.eigenvalues[j] * xj).norm() / xj.norm());
    }
  } else {
    throw ConfigError("no verification mode selected");
  }
  bool angles_ok = true;
  for (const LevelReport& l : v.levels) {
    if (l.angle && !(*l.angle <= config.angle_tol)) angles_ok = false;
  }
  v.passed = v.mismatched == 0 && angles_ok;
  return v;
}

ResultRecord run_experiment(const ExperimentConfig& config) {
  validate(config);
  const TTMatrix a = build_operator(config.model);
  const SpectrumResult result = config.solver == SolverKind::Eigb ? eigb(a, config.solver_config)
                                                                  : deflation_solve(a, config.solver_config);
  ResultRecord rec;
  rec.config = config;
  rec.eigenvalues = result.eigenvalues;
  rec.rank_profile = result.rank_profile;
  rec.sweep_history = result.sweep_history;
  rec.converged = result.converged;
  rec.num_sweeps = result.num_sweeps;
  rec.wall_time_seconds = result.wall_seconds;
  if (config.solver == SolverKind::Deflation) {
    rec.note = "deflation baseline: one-site sweeps per state with orthogonality constraints";
  }
  if (config.verify != VerifyMode::None) {
    const auto t0 = Clock::now();
    rec.verification = verify_result(config, a, result);
    rec.verify_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  }
  return rec;
}

int exit_code(const ResultRecord& record) {
  if (record.verification && !record.verification->passed) return 3;
  if (!record.converged) return 2;
  return 0;
}

json to_json(const ExperimentConfig& c) {
  const SolverConfig& s = c.solver_config;
  return {{"model",
           {{"name", model_name(c.model.model)}, {"d", c.model.d}, {"n", c.model.n}, {"lambda", c.model.lambda}}},
          {"solver", to_string(c.solver)},
          {"num_states", s.num_states},
          {"eps", s.eps},
          {"rmax", s.rmax},
          {"max_sweeps", s.max_sweeps},
          {"conv_tol", s.effective_conv_tol()},
          {"local_solver", to_string(s.local_solver)},
          {"local_size_threshold", s.local_size_threshold},
          {"local_iter_tol", s.effective_local_tol()},
          {"seed", s.seed},
          {"densify_cap", s.densify_cap},
          {"verify", to_string(c.verify)},
          {"eigenvalue_tol", c.eigenvalue_tol},
          {"angle_tol", c.angle_tol},
          {"out", c.out},
          {"format", to_string(c.format)}};
}

json to_json(const ResultRecord& r) {
  json history = json::array();
  for (const SweepRecord& s : r.sweep_history) history.push_back(sweep_json(s));
  return {{"schema_version", kSchemaVersion},
          {"library_version", kLibraryVersion},
          {"config", to_json(r.config)},
          {"seed", r.config.solver_config.seed},
          {"eigenvalues", r.eigenvalues},
          {"rank_profile", r.rank_profile},
          {"sweep_history", history},
          {"converged", r.converged},
          {"num_sweeps", r.num_sweeps},
          {"wall_time_seconds", r.wall_time_seconds},
          {"verify_seconds", r.verify_seconds},
          {"verification", r.verification ? verification_json(*r.verification) : json(nullptr)},
          {"note", r.note}};
}

std::string eigenvalue_csv(const ResultRecord& r) {
  std::ostringstream os;
  os << "state,eigenvalue,reference,abs_error,rel_error,residual\n";
  for (std::size_t j = 0; j < r.eigenvalues.size(); ++j) {
    os << j << ',' << sci(r.eigenvalues[j]);
    if (r.verification && j < r.verification->reference.size()) {
      const Verification& v = *r.verification;
      os << ',' << sci(v.reference[j]) << ',' << sci(v.abs_errors[j]) << ',' << sci(v.rel_errors[j]) << ','
         << (j < v.residuals.size() ? sci(v.residuals[j]) : "");
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
  return os.str();
}

void write_outputs(const ResultRecord& r) {
  if (r.config.out.empty()) return;
  auto write = [](const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << text;
  };
  if (r.config.format != OutputFormat::Csv) write(r.config.out + ".json", to_json(r).dump(2) + "\n");
  if (r.config.format != OutputFormat::Json) write(r.config.out + ".csv", eigenvalue_csv(r));
}

std::optional<ScanAxis> parse_axis(std::string_view s) {
  if (s == "d") return ScanAxis::D;
  if (s == "n") return ScanAxis::N;
  if (s == "b") return ScanAxis::B;
  if (s == "eps") return ScanAxis::Eps;
  return std::nullopt;
}

std::string_view to_string(ScanAxis a) {
  switch (a) {
    case ScanAxis::D: return "d";
    case ScanAxis::N: return "n";
    case ScanAxis::B: return "b";
    case ScanAxis::Eps: return "eps";
  }
  return "d";
}

ExperimentConfig with_axis(const ExperimentConfig& base, ScanAxis axis, double value) {
  ExperimentConfig c = base;
  c.out.clear();
  auto as_count = [&]() {
    if (!(value >= 1.0) || value != std::floor(value) || value > 1e12) {
      throw ConfigError("scan value " + sci(value) + " is not a positive integer");
    }
    return static_cast<std::size_t>(value);
  };
  switch (axis) {
    case ScanAxis::D: c.model.d = as_count(); break;
    case ScanAxis::N: c.model.n = as_count(); break;
    case ScanAxis::B: c.solver_config.num_states = as_count(); break;
    case ScanAxis::Eps: c.solver_config.eps = value; break;
  }
  return c;
}

std::vector<ScanRow> scan(const ExperimentConfig& base, ScanAxis axis, const std::vector<double>& values,
                          std::size_t jobs) {
  std::vector<ScanRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      rows[i].value = values[i];
      try {
        rows[i].record = run_experiment(with_axis(base, axis, values[i]));
      } catch (const std::exception& e) {
        rows[i].error = e.what();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(values.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

json scan_to_json(const ExperimentConfig& base, ScanAxis axis, const std::vector<ScanRow>& rows) {
  json out_rows = json::array();
  for (const ScanRow& r : rows) {
    out_rows.push_back({{"value", r.value},
                        {"status", r.record ? "ok" : "error"},
                        {"error", r.error},
                        {"result", r.record ? to_json(*r.record) : json(nullptr)}});
  }
  return {{"schema_version", kSchemaVersion},
          {"library_version", kLibraryVersion},
          {"axis", to_string(axis)},
          {"template", to_json(base)},
          {"rows", out_rows}};
}

std::string scan_csv(ScanAxis axis, const std::vector<ScanRow>& rows) {
  std::ostringstream os;
  os << "axis,value,status,converged,num_sweeps,wall_time_seconds,max_rank,max_abs_error,state,eigenvalue,"
        "reference,abs_error\n";
  for (const ScanRow& r : rows) {
    if (!r.record) {
      os << to_string(axis) << ',' << sci(r.value) << ",error,,,,,,,,,\n";
      continue;
    }
    const ResultRecord& rec = *r.record;
    const std::size_t max_rank =
        rec.rank_profile.empty() ? 1 : *std::max_element(rec.rank_profile.begin(), rec.rank_profile.end());
    const std::string max_err = rec.verification ? sci(rec.verification->max_abs_error) : "";
    for (std::size_t j = 0; j < rec.eigenvalues.size(); ++j) {
      os << to_string(axis) << ',' << sci(r.value) << ",ok," << (rec.converged ? "true" : "false") << ','
         << rec.num_sweeps << ',' << sci(rec.wall_time_seconds) << ',' << max_rank << ',' << max_err << ',' << j
         << ',' << sci(rec.eigenvalues[j]) << ',';
      if (rec.verification && j < rec.verification->reference.size()) {
        os << sci(rec.verification->reference[j]) << ',' << sci(rec.verification->abs_errors[j]);
      } else {
        os << ',';
      }
      os << '\n';
    }
  }
  return os.str();
}

std::optional<std::size_t> threads_from_env() {
  const char* raw = std::getenv("TTSPEC_THREADS");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const long v = std::strtol(raw, &end, 10);
  if (*end != '\0' || v < 1) throw ConfigError(std::string("TTSPEC_THREADS must be a positive integer, got '") + raw + "'");
  return static_cast<std::size_t>(v);
}

void set_kernel_threads(std::size_t threads) {
  const int t = static_cast<int>(std::max<std::size_t>(threads, 1));
  Eigen::setNbThreads(t);
  openblas_set_num_threads(t);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("loglog_slope: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("loglog_slope: x values are all equal");
  return (n * sxy - sx * sy) / den;
}

}  // namespace blocktt
