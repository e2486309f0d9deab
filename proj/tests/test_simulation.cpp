#include "doctest.h"

#include <cmath>
#include <random>

#include "streamglm/simulation.hpp"

using namespace streamglm;

TEST_CASE("true_beta patterns") {
  const Eigen::VectorXd g = true_beta(10, Family::gaussian());
  Eigen::VectorXd expected(10);
  expected << 0.5, -0.5, 0.5, -0.5, 0.5, 0, 0, 0, 0, 0;
  CHECK((g - expected).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::VectorXd l = true_beta(6, Family::logit());
  Eigen::VectorXd expected_l(6);
  expected_l << 1, -1, 1, -1, 1, 0;
  CHECK((l - expected_l).cwiseAbs().maxCoeff() == 0.0);

  for (int p : {6, 11, 30}) {
    const Eigen::VectorXd b = true_beta(p, Family::gaussian());
    for (int j = 0; j < p; ++j) {
      CHECK((b[j] != 0.0) == (j < 5));
    }
  }
  CHECK_THROWS_AS(true_beta(5, Family::gaussian()), contract_violation);
}

TEST_CASE("gen_covariates moments") {
  std::mt19937_64 rng(1);
  const int n = 100000;

  SUBCASE("intercept column") {
    const Eigen::MatrixXd X = gen_covariates(50, 7, 0.5, rng);
    for (int i = 0; i < 50; ++i) CHECK(X(i, 0) == 1.0);
  }

  SUBCASE("rho = 0: near-orthogonal columns") {
    const Eigen::MatrixXd X = gen_covariates(n, 5, 0.0, rng);
    for (int a = 1; a < 5; ++a) {
      for (int b = a + 1; b < 5; ++b) {
        const double corr =
            X.col(a).dot(X.col(b)) / std::sqrt(X.col(a).squaredNorm() *
                                               X.col(b).squaredNorm());
        CHECK(std::fabs(corr) < 0.02);
      }
    }
  }

  SUBCASE("rho = 0.5: pairwise correlation near 0.5") {
    const Eigen::MatrixXd X = gen_covariates(n, 4, 0.5, rng);
    Eigen::VectorXd a = X.col(1), b = X.col(2);
    a.array() -= a.mean();
    b.array() -= b.mean();
    const double corr = a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
    CHECK(corr == doctest::Approx(0.5).epsilon(0.04));
    // unit variance
    CHECK(a.squaredNorm() / n == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("gen_response moments") {
  std::mt19937_64 rng(2);

  SUBCASE("zero noise is exact") {
    const Eigen::MatrixXd X = gen_covariates(200, 6, 0.5, rng);
    const Eigen::VectorXd beta0 = true_beta(6, Family::gaussian());
    const Eigen::VectorXd y =
        gen_response(Family::gaussian(), X, beta0, rng, 0.0);
    CHECK((y - X * beta0).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("logit at beta = 0 is a fair coin") {
    const Eigen::MatrixXd X = gen_covariates(100000, 6, 0.5, rng);
    const Eigen::VectorXd y =
        gen_response(Family::logit(), X, Eigen::VectorXd::Zero(6), rng);
    CHECK(y.mean() == doctest::Approx(0.5).epsilon(0.02));
    for (int i = 0; i < 100; ++i) {
      CHECK((y[i] == 0.0 || y[i] == 1.0));
    }
  }

  SUBCASE("gaussian noise is centered") {
    const Eigen::MatrixXd X = gen_covariates(100000, 6, 0.5, rng);
    const Eigen::VectorXd beta0 = true_beta(6, Family::gaussian());
    const Eigen::VectorXd y = gen_response(Family::gaussian(), X, beta0, rng, 1.0);
    CHECK((y - X * beta0).mean() == doctest::Approx(0.0).epsilon(0.02));
  }
}

TEST_CASE("eval_selection") {
  const std::vector<int> truth{0, 1, 2, 3, 4};

  SelectionRecord r = eval_selection(truth, truth, 10);
  CHECK(r.nv == 5);
  CHECK(r.includes_all);
  CHECK(r.exact);
  CHECK(r.type1 == 0.0);
  CHECK(r.type2 == 0.0);

  r = eval_selection({0, 1, 2, 3, 4, 6, 8}, truth, 10);
  CHECK(r.nv == 7);
  CHECK(r.includes_all);
  CHECK_FALSE(r.exact);
  CHECK(r.type1 == doctest::Approx(0.2));
  CHECK(r.type2 == 0.0);

  r = eval_selection({0, 1, 2}, truth, 10);
  CHECK_FALSE(r.includes_all);
  CHECK(r.type1 == 0.0);
  CHECK(r.type2 == doctest::Approx(0.2));
}

TEST_CASE("selection metric algebra holds per replication") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> size_draw(0, 10);
  std::uniform_int_distribution<int> idx_draw(0, 9);
  const std::vector<int> truth{0, 1, 2, 3, 4};
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<int> s_hat;
    const int target = size_draw(rng);
    while (static_cast<int>(s_hat.size()) < target) {
      const int j = idx_draw(rng);
      if (!std::binary_search(s_hat.begin(), s_hat.end(), j)) {
        s_hat.insert(std::lower_bound(s_hat.begin(), s_hat.end(), j), j);
      }
    }
    const SelectionRecord r = eval_selection(s_hat, truth, 10);
    // NV = |S| - II*p + I*p, exactly
    CHECK(r.nv == doctest::Approx(5.0 - r.type2 * 10 + r.type1 * 10));
    CHECK(r.exact == (r.type1 == 0.0 && r.type2 == 0.0));
    CHECK(r.includes_all == (r.type2 == 0.0));
  }
}

TEST_CASE("l2_error and r_squared") {
  Eigen::VectorXd a(3), b(3);
  a << 1, 2, 3;
  b << 1, 2, 3;
  CHECK(l2_error(a, b) == 0.0);
  b << 2, 2, 3;
  CHECK(l2_error(b, a) == doctest::Approx(1.0));
  Eigen::VectorXd c(2), d(2);
  c << 0.3, -0.4;
  d << 0, 0;
  CHECK(l2_error(c, d) == doctest::Approx(0.25));
  CHECK_THROWS_AS(l2_error(a, c), contract_violation);

  Eigen::VectorXd y(3), yhat(3);
  y << 0, 1, 2;
  CHECK(r_squared(y, y) == doctest::Approx(1.0));
  yhat.setConstant(y.mean());
  CHECK(r_squared(y, yhat) == doctest::Approx(0.0));
  yhat << 0, 1, 1;
  CHECK(r_squared(y, yhat) == doctest::Approx(0.5));
  Eigen::VectorXd constant = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(r_squared(constant, yhat), numeric_error);
}

TEST_CASE("run_experiment determinism") {
  ExperimentConfig config;
  config.family = Family::gaussian();
  config.penalty = PenaltyConfig::mcp();
  config.p = 8;
  config.n_per_batch = 60;
  config.n_batches = 6;
  config.replications = 4;
  config.seed = 99;
  config.init_samples = 120;

  const ExperimentResult a = run_experiment(config);
  const ExperimentResult b = run_experiment(config);
  CHECK(a.metrics.nv == b.metrics.nv);
  CHECK(a.metrics.l2_sq == b.metrics.l2_sq);
  CHECK(a.metrics.cs_rate == b.metrics.cs_rate);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t r = 0; r < a.records.size(); ++r) {
    CHECK(a.records[r].l2_sq == b.records[r].l2_sq);
    CHECK(a.records[r].selected == b.records[r].selected);
    CHECK(a.records[r].l2_trajectory == b.records[r].l2_trajectory);
  }
}

TEST_CASE("run_experiment trajectories and validation") {
  ExperimentConfig config;
  config.family = Family::gaussian();
  config.penalty = PenaltyConfig::scad();
  config.p = 8;
  config.n_per_batch = 50;
  config.n_batches = 8;
  config.replications = 2;
  config.seed = 5;
  config.init_samples = 100;  // pools the first 2 batches

  const ExperimentResult res = run_experiment(config);
  for (const auto& rec : res.records) {
    REQUIRE_FALSE(rec.failed);
    // init consumes 2 batches, then 6 streaming updates: 7 evaluation points
    CHECK(rec.n_trajectory.size() == 7);
    CHECK(rec.n_trajectory.front() == 100);
    CHECK(rec.n_trajectory.back() == 400);
    CHECK(rec.l2_trajectory.size() == rec.n_trajectory.size());
  }

  ExperimentConfig bad = config;
  bad.p = 5;
  CHECK_THROWS_AS(run_experiment(bad), contract_violation);
  bad = config;
  bad.rho = 1.0;
  CHECK_THROWS_AS(run_experiment(bad), contract_violation);
}

TEST_CASE("empirical sparsity and oracle behavior at N = 10^4") {
  for (const auto& pen : {PenaltyConfig::scad(), PenaltyConfig::mcp()}) {
    ExperimentConfig config;
    config.family = Family::gaussian();
    config.penalty = pen;
    config.p = 10;
    config.n_per_batch = 100;
    config.n_batches = 100;
    config.replications = 10;
    config.seed = 31;
    const ExperimentResult res = run_experiment(config);
    CHECK(res.metrics.type2 == 0.0);        // every replication keeps the truth
    CHECK(res.metrics.type1 <= 0.05);
    CHECK(res.metrics.in_rate == 1.0);
  }
}

TEST_CASE("online error tracks the pooled offline reference") {
  ExperimentConfig config;
  config.family = Family::gaussian();
  config.penalty = PenaltyConfig::mcp();
  config.p = 10;
  config.n_per_batch = 100;
  config.n_batches = 20;
  config.replications = 20;
  config.seed = 11;
  config.include_offline = true;
  const ExperimentResult res = run_experiment(config);
  REQUIRE(res.has_offline);
  CHECK(res.offline_metrics.replications == 20);
  CHECK(res.metrics.l2_sq <= 2.0 * res.offline_metrics.l2_sq);
}

TEST_CASE("method labels") {
  CHECK(method_label(PenaltyConfig::lasso(), false) == "Renew_LASSO");
  CHECK(method_label(PenaltyConfig::scad(), true) == "Total_data_SCAD");
  CHECK(method_label(PenaltyConfig::mcp(), false) == "Renew_MCP");
}
