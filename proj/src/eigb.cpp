#include "blocktt/eigb.hpp"

#include "blocktt/environment.hpp"
#include "blocktt/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>

namespace blocktt {

namespace {

using Clock = std::chrono::steady_clock;

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t saturating_product(const std::vector<std::size_t>& n, std::size_t from, std::size_t to) {
  std::size_t p = 1;
  for (std::size_t k = from; k < to; ++k) {
    if (p > std::numeric_limits<std::size_t>::max() / n[k]) return std::numeric_limits<std::size_t>::max();
    p *= n[k];
  }
  return p;
}

std::size_t working_block_size(std::size_t requested, const std::vector<std::size_t>& modes) {
  if (requested != 1) return requested;
  return saturating_product(modes, 0, modes.size()) >= 2 ? 2 : 1;
}

struct LocalUpdate {
  Matrix states;
  std::vector<double> values;
  double max_residual = 0.0;
  bool dense = false;
};

using Updater = std::function<LocalUpdate(const LocalOperator&, const Matrix&)>;

// Holds the environments of one sweep and moves the block along the train.
class SweepEngine {
 public:
  SweepEngine(const TTMatrix& a, BlockTT& x, Truncation trunc)
      : a_(a), x_(x), trunc_(trunc), left_(x.dim() + 1), right_(x.dim() + 1) {
    const std::size_t d = x_.dim();
    x_.move_block(0, Truncation{0.0, kUnboundedRank, trunc_.bonds});
    left_[0] = Environment::trivial(Side::Left, 0);
    right_[d] = Environment::trivial(Side::Right, d);
    for (std::size_t k = d - 1; k >= 1; --k) {
      right_[k] = env_extend_right(right_[k + 1], a_.core(k), x_.core(k), x_.core(k));
    }
  }

  LocalUpdate solve_here(const Updater& update, SweepRecord& rec) {
    const std::size_t p = x_.position();
    const LocalOperator h(left_[p], a_.core(p), right_[p + 1]);
    LocalUpdate u = update(h, x_.block().states());
    x_.set_states(u.states);
    rec.max_residual = std::max(rec.max_residual, u.max_residual);
    ++(u.dense ? rec.dense_solves : rec.iterative_solves);
    return u;
  }

  /// One left-to-right and one right-to-left half-sweep; the block ends at site 0.
  LocalUpdate full_sweep(const Updater& update, SweepRecord& rec) {
    const std::size_t d = x_.dim();
    LocalUpdate last;
    if (d == 1) return solve_here(update, rec);
    for (std::size_t p = 0; p + 1 < d; ++p) {
      last = solve_here(update, rec);
      x_.move_to(p + 1, trunc_);
      left_[p + 1] = env_extend_left(left_[p], a_.core(p), x_.core(p), x_.core(p));
    }
    for (std::size_t p = d - 1; p >= 1; --p) {
      last = solve_here(update, rec);
      x_.move_to(p - 1, trunc_);
      right_[p] = env_extend_right(right_[p + 1], a_.core(p), x_.core(p), x_.core(p));
    }
    const auto ranks = x_.ranks();
    rec.max_rank = ranks.empty() ? 1 : *std::max_element(ranks.begin(), ranks.end());
    return last;
  }

 private:
  const TTMatrix& a_;
  BlockTT& x_;
  Truncation trunc_;
  std::vector<Environment> left_;
  std::vector<Environment> right_;
};

LocalSolveOptions local_options(const SolverConfig& config) {
  LocalSolveOptions o;
  o.kind = config.local_solver;
  o.size_threshold = config.local_size_threshold;
  o.tol = config.effective_local_tol();
  o.max_iter = config.local_max_iter;
  o.diagonal_preconditioner = config.diagonal_preconditioner;
  return o;
}

void check_operator(const TTMatrix& a, const std::vector<std::size_t>& modes) {
  if (!a.symmetric()) throw std::invalid_argument("eigensolver: operator is not symmetric");
  if (a.mode_sizes() != modes) throw std::invalid_argument("eigensolver: mode sizes do not match");
}

bool sum_converged(const std::vector<SweepRecord>& history, std::size_t first, double tol) {
  if (history.size() < first + 2) return false;
  const auto& cur = history.back().eigenvalues;
  const auto& prev = history[history.size() - 2].eigenvalues;
  const double s = std::accumulate(cur.begin(), cur.end(), 0.0);
  const double sp = std::accumulate(prev.begin(), prev.end(), 0.0);
  return std::abs(s - sp) <= tol * std::abs(s);
}

}  // namespace

double SolverConfig::effective_conv_tol() const { return conv_tol.value_or(eps); }

double SolverConfig::effective_local_tol() const {
  return local_iter_tol.value_or(std::clamp(eps * eps, 1e-12, 1e-6));
}

void validate(const SolverConfig& config, const std::vector<std::size_t>& modes) {
  if (!(config.eps >= 0.0) || !std::isfinite(config.eps)) throw ConfigError("eps must be a finite non-negative number");
  if (config.num_states < 1) throw ConfigError("number of states must be at least 1");
  if (config.rmax < 1) throw ConfigError("rmax must be at least 1");
  if (config.max_sweeps < 1) throw ConfigError("max_sweeps must be at least 1");
  if (config.conv_tol && !(*config.conv_tol >= 0.0)) throw ConfigError("conv_tol must be non-negative");
  if (config.local_iter_tol && !(*config.local_iter_tol > 0.0)) throw ConfigError("local_iter_tol must be positive");
  if (modes.empty()) throw ConfigError("operator has no sites");
  const std::size_t work = working_block_size(config.num_states, modes);
  if (saturating_product(modes, 0, modes.size()) < work) {
    throw ConfigError("requested more states than the space dimension");
  }
  // Some site must offer a local space of at least `work` unknowns under rmax.
  bool fits = false;
  for (std::size_t p = 0; p < modes.size() && !fits; ++p) {
    const std::size_t left = std::min(config.rmax, saturating_product(modes, 0, p));
    const std::size_t right = std::min(config.rmax, saturating_product(modes, p + 1, modes.size()));
    const double local = static_cast<double>(left) * static_cast<double>(modes[p]) * static_cast<double>(right);
    fits = local >= static_cast<double>(work);
  }
  if (!fits) {
    throw ConfigError("rmax = " + std::to_string(config.rmax) + " is too small to hold " +
                      std::to_string(work) + " states");
  }
}

SpectrumResult eigb(const TTMatrix& a, const SolverConfig& config, std::optional<BlockTT> initial) {
  const auto t_start = Clock::now();
  const std::vector<std::size_t> modes = a.mode_sizes();
  validate(config, modes);
  check_operator(a, modes);
  const std::size_t requested = config.num_states;
  std::size_t work = working_block_size(requested, modes);
  BlockTT x;
  if (initial) {
    if (initial->mode_sizes() != modes) throw std::invalid_argument("eigb: initial guess has wrong modes");
    if (initial->num_states() < requested) throw std::invalid_argument("eigb: initial guess has too few states");
    x = std::move(*initial);
    work = x.num_states();
  } else {
    x = BlockTT::random(modes, work, config.init_rank.value_or(work), config.seed);
  }

  const Truncation trunc{config.eps, config.rmax, std::max<std::size_t>(1, modes.size() - 1)};
  const LocalSolveOptions opts = local_options(config);
  const Updater update = [&](const LocalOperator& h, const Matrix& current) {
    const LocalEigResult r = local_block_eig(as_linear_operator(h), work, current, opts);
    LocalUpdate u;
    u.states = r.vectors;
    u.values.assign(r.values.data(), r.values.data() + r.values.size());
    u.max_residual = r.residuals.size() ? r.residuals.maxCoeff() : 0.0;
    u.dense = r.dense;
    return u;
  };

  SpectrumResult result;
  SweepEngine engine(a, x, trunc);
  for (std::size_t s = 1; s <= config.max_sweeps; ++s) {
    const auto t0 = Clock::now();
    SweepRecord rec;
    rec.sweep = s;
    const LocalUpdate last = engine.full_sweep(update, rec);
    rec.eigenvalues.assign(last.values.begin(), last.values.begin() + static_cast<std::ptrdiff_t>(requested));
    rec.wall_seconds = seconds_since(t0);
    result.sweep_history.push_back(std::move(rec));
    result.num_sweeps = s;
    if (sum_converged(result.sweep_history, 0, config.effective_conv_tol())) {
      result.converged = true;
      break;
    }
  }

  // Final Ritz pairs at the resting block position.
  SweepRecord final_rec;
  const LocalUpdate last = engine.solve_here(update, final_rec);
  result.eigenvalues.assign(last.values.begin(), last.values.begin() + static_cast<std::ptrdiff_t>(requested));
  if (work > requested) x.set_states(Matrix(x.block().states().leftCols(idx(requested))));
  result.rank_profile = x.ranks();
  result.states = std::move(x);
  result.wall_seconds = seconds_since(t_start);
  return result;
}

SpectrumResult deflation_solve(const TTMatrix& a, const SolverConfig& config) {
  const auto t_start = Clock::now();
  const std::vector<std::size_t> modes = a.mode_sizes();
  validate(config, modes);
  check_operator(a, modes);
  const std::size_t total = config.num_states;
  if (total == 1) return eigb(a, config);

  SolverConfig first = config;
  first.num_states = 1;
  SpectrumResult result = eigb(a, first);
  BlockTT x = std::move(result.states);
  bool all_converged = result.converged;

  const Truncation trunc{config.eps, config.rmax, std::max<std::size_t>(1, modes.size() - 1)};
  const LocalSolveOptions opts = local_options(config);
  const std::size_t new_rank = config.init_rank.value_or(2);

  for (std::size_t j = 1; j < total; ++j) {
    const TTVector fresh = tt_random(modes, new_rank, config.seed + 7919 * j);
    x = append_state(x, fresh);
    {
      Matrix states = x.block().states();
      for (int pass = 0; pass < 2; ++pass) {
        states.col(idx(j)) -= states.leftCols(idx(j)) * (states.leftCols(idx(j)).transpose() * states.col(idx(j)));
      }
      states.col(idx(j)).normalize();
      x.set_states(std::move(states));
    }

    const Updater update = [&](const LocalOperator& h, const Matrix& current) {
      const Matrix fixed = current.leftCols(idx(j));
      const Matrix q = orthonormalize(fixed);
      const LocalEigResult r =
          local_block_eig(as_linear_operator(h), 1, current.col(idx(j)), opts, q);
      LocalUpdate u;
      u.states.resize(current.rows(), idx(j + 1));
      u.states << fixed, r.vectors.col(0);
      u.values = {r.values[0]};
      u.max_residual = r.residuals[0];
      u.dense = r.dense;
      return u;
    };

    SweepEngine engine(a, x, trunc);
    const std::size_t first_record = result.sweep_history.size();
    bool converged = false;
    for (std::size_t s = 1; s <= config.max_sweeps; ++s) {
      const auto t0 = Clock::now();
      SweepRecord rec;
      rec.sweep = s;
      rec.target = j;
      const LocalUpdate last = engine.full_sweep(update, rec);
      rec.eigenvalues = last.values;
      rec.wall_seconds = seconds_since(t0);
      result.sweep_history.push_back(std::move(rec));
      ++result.num_sweeps;
      if (sum_converged(result.sweep_history, first_record, config.effective_conv_tol())) {
        converged = true;
        break;
      }
    }
    SweepRecord final_rec;
    engine.solve_here(update, final_rec);
    all_converged = all_converged && converged;
  }

  // Rayleigh quotients of the final states, reported in ascending order.
  std::vector<Environment> right(x.dim() + 1);
  right[x.dim()] = Environment::trivial(Side::Right, x.dim());
  for (std::size_t k = x.dim() - 1; k >= 1; --k) {
    right[k] = env_extend_right(right[k + 1], a.core(k), x.core(k), x.core(k));
  }
  const LocalOperator h(Environment::trivial(Side::Left, 0), a.core(0), right[1]);
  const Matrix& v = x.block().states();
  const Matrix hv = h.apply(v);
  std::vector<double> rq(total);
  for (std::size_t b = 0; b < total; ++b) {
    rq[b] = v.col(idx(b)).dot(hv.col(idx(b))) / v.col(idx(b)).squaredNorm();
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return rq[l] < rq[r]; });
  Matrix sorted(v.rows(), v.cols());
  result.eigenvalues.clear();
  for (std::size_t b = 0; b < total; ++b) {
    sorted.col(idx(b)) = v.col(idx(order[b]));
    result.eigenvalues.push_back(rq[order[b]]);
  }
  x.set_states(std::move(sorted));
  result.rank_profile = x.ranks();
  result.states = std::move(x);
  result.converged = all_converged;
  result.wall_seconds = seconds_since(t_start);
  return result;
}

double rayleigh_trace(const TTMatrix& a, const BlockTT& x) {
  if (a.mode_sizes() != x.mode_sizes()) throw std::invalid_argument("rayleigh_trace: mode mismatch");
  const std::size_t d = x.dim();
  const std::size_t p = x.position();
  Environment left = Environment::trivial(Side::Left, 0);
  for (std::size_t k = 0; k < p; ++k) left = env_extend_left(left, a.core(k), x.core(k), x.core(k));
  Environment right = Environment::trivial(Side::Right, d);
  for (std::size_t k = d - 1; k > p; --k) right = env_extend_right(right, a.core(k), x.core(k), x.core(k));
  const LocalOperator h(left, a.core(p), right);
  const Matrix& v = x.block().states();
  return (v.transpose() * h.apply(v)).trace();
}

}  // namespace blocktt
