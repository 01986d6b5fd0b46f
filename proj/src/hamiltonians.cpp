#include "blocktt/hamiltonians.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <set>
#include <stdexcept>

namespace blocktt {

namespace {

Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

// Assembles a chain of operator cores from a d-independent transfer pattern.
// `block(k, g, h)` returns the n x n block for channel g -> h at site k, or an
// empty matrix when the channel pair is unused.  Site 0 keeps row `first`,
// site d-1 keeps column `last`.
template <class BlockFn>
TTMatrix transfer_chain(std::size_t d, std::size_t n, std::size_t channels, std::size_t first,
                        std::size_t last, BlockFn block, std::optional<bool> symmetric) {
  std::vector<OperatorCore> cores;
  cores.reserve(d);
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t r0 = k == 0 ? 1 : channels;
    const std::size_t r1 = k + 1 == d ? 1 : channels;
    OperatorCore c(r0, n, r1);
    for (std::size_t g = 0; g < r0; ++g) {
      for (std::size_t h = 0; h < r1; ++h) {
        const std::size_t gg = k == 0 ? first : g;
        const std::size_t hh = k + 1 == d ? last : h;
        const Matrix b = block(k, gg, hh);
        if (b.size() > 0) c.set_block(g, h, b);
      }
    }
    cores.push_back(std::move(c));
  }
  return TTMatrix(std::move(cores), symmetric);
}

Matrix second_difference(std::size_t n) {
  Matrix k = Matrix::Zero(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    k(idx(i), idx(i)) = 2.0;
    if (i + 1 < n) {
      k(idx(i), idx(i + 1)) = -1.0;
      k(idx(i + 1), idx(i)) = -1.0;
    }
  }
  return k;
}

}  // namespace

void HamiltonianSpec::validate() const {
  if (d < 1) throw std::invalid_argument("d must be at least 1");
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  if (model != Model::Laplace && d < 2) throw std::invalid_argument("this model needs d >= 2");
  if (model == Model::Heisenberg && n != 2) throw std::invalid_argument("heisenberg has n = 2");
  if (!std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite");
}

std::string_view model_name(Model m) {
  switch (m) {
    case Model::Laplace: return "laplace";
    case Model::HenonHeiles: return "henon_heiles";
    case Model::Heisenberg: return "heisenberg";
  }
  return "unknown";
}

std::optional<Model> parse_model(std::string_view name) {
  if (name == "laplace") return Model::Laplace;
  if (name == "henon_heiles" || name == "henon-heiles" || name == "hh") return Model::HenonHeiles;
  if (name == "heisenberg") return Model::Heisenberg;
  return std::nullopt;
}

TTMatrix build_operator(const HamiltonianSpec& spec) {
  spec.validate();
  switch (spec.model) {
    case Model::Laplace: return laplace_tt(spec.d, spec.n);
    case Model::HenonHeiles: return henon_heiles_tt(spec.d, spec.n, spec.lambda);
    case Model::Heisenberg: return heisenberg_tt(spec.d);
  }
  throw std::invalid_argument("unknown model");
}

TTMatrix laplace_tt(std::size_t d, std::size_t n) {
  if (d < 1 || n < 2) throw std::invalid_argument("laplace_tt: need d >= 1, n >= 2");
  const Matrix k = second_difference(n);
  const Matrix id = Matrix::Identity(idx(n), idx(n));
  if (d == 1) {
    OperatorCore c(1, n, 1);
    c.set_block(0, 0, k);
    return TTMatrix({c}, true);
  }
  // Channel 0: nothing applied yet, channel 1: the term has been placed.
  auto block = [&](std::size_t, std::size_t g, std::size_t h) -> Matrix {
    if (g == 0 && h == 0) return id;
    if (g == 0 && h == 1) return k;
    if (g == 1 && h == 1) return id;
    return Matrix();
  };
  return transfer_chain(d, n, 2, 0, 1, block, true);
}

std::vector<double> laplace_1d_eigenvalues(std::size_t n) {
  std::vector<double> mu(n);
  for (std::size_t b = 0; b < n; ++b) {
    const double s = std::sin(std::numbers::pi * static_cast<double>(b + 1) / (2.0 * static_cast<double>(n + 1)));
    mu[b] = 4.0 * s * s;
  }
  return mu;
}

Vector laplace_1d_eigenvector(std::size_t n, std::size_t b) {
  if (b >= n) throw std::invalid_argument("laplace_1d_eigenvector: b out of range");
  Vector u(idx(n));
  const double scale = std::sqrt(2.0 / static_cast<double>(n + 1));
  for (std::size_t j = 0; j < n; ++j) {
    u[idx(j)] = scale * std::sin(std::numbers::pi * static_cast<double>((b + 1) * (j + 1)) /
                                 static_cast<double>(n + 1));
  }
  return u;
}

std::vector<LaplaceLevel> laplace_spectrum(std::size_t d, std::size_t n, std::size_t count) {
  if (d < 1 || n < 1) throw std::invalid_argument("laplace_spectrum: need d >= 1, n >= 1");
  const std::vector<double> mu = laplace_1d_eigenvalues(n);
  // Summing in sorted order makes permuted multi-indices bitwise equal.
  auto value_of = [&](const std::vector<std::size_t>& b) {
    std::vector<std::size_t> s = b;
    std::sort(s.begin(), s.end());
    double v = 0.0;
    for (std::size_t i : s) v += mu[i];
    return v;
  };
  using Entry = std::pair<double, std::vector<std::size_t>>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> frontier;
  std::set<std::vector<std::size_t>> seen;
  std::vector<std::size_t> zero(d, 0);
  frontier.emplace(value_of(zero), zero);
  seen.insert(zero);
  std::vector<LaplaceLevel> out;
  // mu is strictly increasing, so every successor is strictly larger and the
  // pop order is the sorted order.
  while (out.size() < count && !frontier.empty()) {
    Entry e = frontier.top();
    frontier.pop();
    for (std::size_t k = 0; k < d; ++k) {
      if (e.second[k] + 1 >= n) continue;
      std::vector<std::size_t> next = e.second;
      ++next[k];
      if (seen.insert(next).second) frontier.emplace(value_of(next), next);
    }
    out.push_back({e.first, std::move(e.second)});
  }
  return out;
}

std::vector<double> hermite_mesh(std::size_t n) {
  if (n < 1) throw std::invalid_argument("hermite_mesh: n must be positive");
  Matrix jac = Matrix::Zero(idx(n), idx(n));
  for (std::size_t k = 1; k < n; ++k) {
    const double off = std::sqrt(static_cast<double>(k) / 2.0);
    jac(idx(k - 1), idx(k)) = off;
    jac(idx(k), idx(k - 1)) = off;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(jac, Eigen::EigenvaluesOnly);
  std::vector<double> t(es.eigenvalues().data(), es.eigenvalues().data() + n);
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double s = 0.5 * (t[n - 1 - i] - t[i]);
    t[i] = -s;
    t[n - 1 - i] = s;
  }
  if (n % 2 == 1) t[n / 2] = 0.0;
  return t;
}

double hermite_value(std::size_t n, double t) {
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 2.0 * t;
  for (std::size_t k = 1; k < n; ++k) {
    const double next = 2.0 * t * cur - 2.0 * static_cast<double>(k) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

Matrix hermite_dvr_laplace(std::size_t n) {
  const std::vector<double> t = hermite_mesh(n);
  Matrix dvr(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        dvr(idx(i), idx(j)) = (4.0 * static_cast<double>(n) - 1.0 - 2.0 * t[i] * t[i]) / 6.0;
      } else {
        const double diff = t[i] - t[j];
        const double sign = (i + j) % 2 == 0 ? 1.0 : -1.0;
        dvr(idx(i), idx(j)) = sign * (2.0 / (diff * diff) - 0.5);
      }
    }
  }
  return dvr;
}

TTMatrix henon_heiles_tt(std::size_t d, std::size_t n, double lambda) {
  if (d < 2) throw std::invalid_argument("henon_heiles_tt: d must be at least 2");
  if (n < 2) throw std::invalid_argument("henon_heiles_tt: n must be at least 2");
  const std::vector<double> t = hermite_mesh(n);
  const Vector q = Eigen::Map<const Vector>(t.data(), idx(n));
  const Matrix id = Matrix::Identity(idx(n), idx(n));
  const Matrix q1 = q.asDiagonal();
  const Matrix q2 = q.array().square().matrix().asDiagonal();
  const Matrix q3 = q.array().cube().matrix().asDiagonal();
  const Matrix harmonic = 0.5 * hermite_dvr_laplace(n) + 0.5 * q2;
  // Channels: 0 nothing yet, 1 q_k^2 waiting for its neighbour, 2 complete.
  auto block = [&](std::size_t k, std::size_t g, std::size_t h) -> Matrix {
    if (g == 0 && h == 0) return id;
    if (g == 0 && h == 1) return q2;
    if (g == 0 && h == 2) return k == 0 ? harmonic : Matrix(harmonic - (lambda / 3.0) * q3);
    if (g == 1 && h == 2) return lambda * q1;
    if (g == 2 && h == 2) return id;
    return Matrix();
  };
  return transfer_chain(d, n, 3, 0, 2, block, true);
}

TTMatrix heisenberg_tt(std::size_t d) {
  if (d < 2) throw std::invalid_argument("heisenberg_tt: d must be at least 2");
  Matrix sp = Matrix::Zero(2, 2), sm = Matrix::Zero(2, 2), sz = Matrix::Zero(2, 2);
  sp(0, 1) = 1.0;
  sm(1, 0) = 1.0;
  sz(0, 0) = 0.5;
  sz(1, 1) = -0.5;
  const Matrix id = Matrix::Identity(2, 2);
  // S_i.S_{i+1} = (S+ S- + S- S+)/2 + Sz Sz.  Channels: 0 nothing yet,
  // 1..3 waiting for the partner of S+, S-, Sz, 4 complete.
  auto block = [&](std::size_t, std::size_t g, std::size_t h) -> Matrix {
    if (g == 0 && h == 0) return id;
    if (g == 0 && h == 1) return sp;
    if (g == 0 && h == 2) return sm;
    if (g == 0 && h == 3) return sz;
    if (g == 1 && h == 4) return 0.5 * sm;
    if (g == 2 && h == 4) return 0.5 * sp;
    if (g == 3 && h == 4) return sz;
    if (g == 4 && h == 4) return id;
    return Matrix();
  };
  // Individual blocks are not symmetric, the sum is.
  return transfer_chain(d, 2, 5, 0, 4, block, true);
}

}  // namespace blocktt
