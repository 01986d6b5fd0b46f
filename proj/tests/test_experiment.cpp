#include "blocktt/errors.hpp"
#include "blocktt/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

using namespace blocktt;

namespace {

ExperimentConfig laplace_config(std::size_t b) {
  ExperimentConfig c;
  c.model = {Model::Laplace, 3, 4, kHenonHeilesLambda};
  c.solver_config.num_states = b;
  c.solver_config.eps = 1e-8;
  return c;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("experiment validation") {
  ExperimentConfig c = laplace_config(5);
  CHECK_NOTHROW(validate(c));

  c.verify = VerifyMode::ClosedForm;
  c.model.model = Model::HenonHeiles;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = laplace_config(5);
  c.verify = VerifyMode::DenseOracle;
  c.model.d = 7;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = laplace_config(5);
  c.model.n = 1;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = laplace_config(5);
  c.eigenvalue_tol = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = laplace_config(100);
  CHECK_THROWS_AS(run_experiment(c), ConfigError);
}

TEST_CASE("dense-oracle run and exit codes") {
  ExperimentConfig c = laplace_config(5);
  c.verify = VerifyMode::DenseOracle;
  const ResultRecord r = run_experiment(c);
  REQUIRE(r.verification);
  CHECK(r.verification->passed);
  CHECK(r.verification->max_abs_error <= 1e-6);
  CHECK(r.verification->residuals.size() == 5);
  for (double res : r.verification->residuals) CHECK(res < 1e-5);
  CHECK(exit_code(r) == 0);

  ResultRecord failed = r;
  failed.verification->passed = false;
  CHECK(exit_code(failed) == 3);
  ResultRecord stalled = r;
  stalled.converged = false;
  CHECK(exit_code(stalled) == 2);
  stalled.verification.reset();
  CHECK(exit_code(stalled) == 2);
}

TEST_CASE("closed-form verification reports levels and angles") {
  ExperimentConfig c = laplace_config(7);
  c.verify = VerifyMode::ClosedForm;
  const ResultRecord r = run_experiment(c);
  REQUIRE(r.verification);
  const Verification& v = *r.verification;
  CHECK(v.passed);
  REQUIRE(v.levels.size() == 3);
  CHECK(v.levels[0].multiplicity == 1);
  CHECK(v.levels[1].multiplicity == 3);
  CHECK(v.levels[2].multiplicity == 3);
  for (const LevelReport& l : v.levels) {
    REQUIRE(l.angle);
    CHECK(*l.angle < 1e-6);
    CHECK(l.computed_multiplicity == l.multiplicity);
  }

  // A block that cuts level 1 in half gets no angle for that level.
  const ResultRecord partial = run_experiment([] {
    ExperimentConfig p = laplace_config(3);
    p.verify = VerifyMode::ClosedForm;
    return p;
  }());
  REQUIRE(partial.verification->levels.size() == 2);
  CHECK_FALSE(partial.verification->levels[1].angle.has_value());
}

TEST_CASE("determinism") {
  ExperimentConfig c = laplace_config(4);
  c.solver_config.seed = 11;
  const ResultRecord a = run_experiment(c);
  const ResultRecord b = run_experiment(c);
  REQUIRE(a.eigenvalues.size() == b.eigenvalues.size());
  for (std::size_t j = 0; j < a.eigenvalues.size(); ++j) CHECK(std::abs(a.eigenvalues[j] - b.eigenvalues[j]) <= 1e-10);
  CHECK(a.rank_profile == b.rank_profile);
}

TEST_CASE("serialization") {
  ExperimentConfig c = laplace_config(2);
  c.verify = VerifyMode::DenseOracle;
  c.solver_config.seed = 3;
  const ResultRecord r = run_experiment(c);
  const nlohmann::json j = to_json(r);
  CHECK(j.at("schema_version") == std::string(kSchemaVersion));
  CHECK(j.at("library_version") == std::string(kLibraryVersion));
  CHECK(j.at("seed") == 3);
  CHECK(j.at("config").at("model").at("name") == "laplace");
  CHECK(j.at("eigenvalues").size() == 2);
  CHECK(j.at("sweep_history").size() == r.num_sweeps);
  CHECK(j.at("verification").at("mode") == "dense-oracle");

  const auto csv = lines(eigenvalue_csv(r));
  REQUIRE(csv.size() == 3);
  CHECK(csv[0].rfind("state,eigenvalue", 0) == 0);
  // Scientific notation with 17 significant digits.
  const std::string first = csv[1].substr(csv[1].find(',') + 1);
  const std::string value = first.substr(0, first.find(','));
  CHECK(value.find('e') != std::string::npos);
  CHECK(value.find('.') != std::string::npos);
  CHECK(value.find('e') - value.find('.') - 1 >= 15);
  CHECK(std::stod(value) == r.eigenvalues[0]);
}

TEST_CASE("scan keeps going after a failed row") {
  const ExperimentConfig base = laplace_config(2);
  const std::vector<ScanRow> rows = scan(base, ScanAxis::B, {1, 1000, 3}, 2);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].record.has_value());
  CHECK_FALSE(rows[1].record.has_value());
  CHECK_FALSE(rows[1].error.empty());
  CHECK(rows[2].record.has_value());
  CHECK(rows[2].record->eigenvalues.size() == 3);

  const auto csv = lines(scan_csv(ScanAxis::B, rows));
  CHECK(csv.size() == 1 + 1 + 1 + 3);
  const nlohmann::json j = scan_to_json(base, ScanAxis::B, rows);
  CHECK(j.at("rows").at(1).at("status") == "error");

  CHECK_THROWS_AS(with_axis(base, ScanAxis::D, 2.5), ConfigError);
  CHECK(with_axis(base, ScanAxis::Eps, 1e-3).solver_config.eps == 1e-3);
  CHECK(with_axis(base, ScanAxis::N, 7).model.n == 7);
}

TEST_CASE("thread cap from the environment") {
  unsetenv("TTSPEC_THREADS");
  CHECK_FALSE(threads_from_env().has_value());
  setenv("TTSPEC_THREADS", "3", 1);
  CHECK(threads_from_env() == std::size_t{3});
  setenv("TTSPEC_THREADS", "zero", 1);
  CHECK_THROWS_AS(threads_from_env(), ConfigError);
  setenv("TTSPEC_THREADS", "0", 1);
  CHECK_THROWS_AS(threads_from_env(), ConfigError);
  unsetenv("TTSPEC_THREADS");
}

TEST_CASE("loglog_slope") {
  CHECK(loglog_slope({1, 10, 100}, {3, 300, 30000}) == doctest::Approx(2.0));
  CHECK(loglog_slope({2, 4}, {5, 5}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(loglog_slope({1}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(loglog_slope({1, 2}, {0, 1}), std::invalid_argument);
}
