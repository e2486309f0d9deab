#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "streamglm/simulation.hpp"
#include "streamglm/solver.hpp"
#include "streamglm/tuning.hpp"

using namespace streamglm;

namespace {

// A state that already consumed `batch0` with the given coefficients pinned.
SolverState seeded_state(const Family& family, const Batch& batch0,
                         const Eigen::VectorXd& beta) {
  SolverState state;
  state.p = static_cast<int>(batch0.p());
  state.family = family;
  state.batches_consumed = 1;
  state.total_samples = batch0.n();
  state.beta = beta;
  state.cum_hessian_diag = hessian_diag(family, batch0, beta);
  state.active = select_active(beta);
  state.tracked = state.active;
  state.cum_hessian_block = hessian_sub(family, batch0, beta, state.tracked);
  state.lambda_history.push_back(0.0);
  return state;
}

}  // namespace

TEST_CASE("lambda_max") {
  Eigen::VectorXd z(3);
  z << -3, 1, 2;
  CHECK(lambda_max(z) == 3.0);
  CHECK(lambda_max(Eigen::VectorXd::Zero(4)) == 0.0);
  Eigen::VectorXd single(1);
  single << 0.5;
  CHECK(lambda_max(single) == 0.5);
  CHECK_THROWS_AS(lambda_max(Eigen::VectorXd(0)), contract_violation);
}

TEST_CASE("lambda_grid") {
  const auto grid = lambda_grid(1.0, 3, 0.01);
  REQUIRE(grid.size() == 3);
  CHECK(grid[0] == 1.0);
  CHECK(grid[1] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(grid[2] == 0.01);

  const auto two = lambda_grid(2.0, 2, 0.5);
  CHECK(two[0] == 2.0);
  CHECK(two[1] == 1.0);

  // endpoints exact for arbitrary inputs
  const auto grid2 = lambda_grid(0.73, 17, 1e-3);
  CHECK(grid2.front() == 0.73);
  CHECK(grid2.back() == 1e-3 * 0.73);
  for (std::size_t i = 1; i < grid2.size(); ++i) CHECK(grid2[i] < grid2[i - 1]);

  CHECK_THROWS_AS(lambda_grid(0.0, 3, 0.1), contract_violation);
  CHECK_THROWS_AS(lambda_grid(1.0, 1, 0.1), contract_violation);
  CHECK_THROWS_AS(lambda_grid(1.0, 3, 1.5), contract_violation);
}

TEST_CASE("bic closed-form and additivity") {
  std::mt19937_64 rng(42);
  Batch batch0 = oracles::random_batch(Family::gaussian(), 30, 4, rng);
  Eigen::VectorXd beta(4);
  beta << 0.5, 0.0, -0.2, 0.0;
  const SolverState state = seeded_state(Family::gaussian(), batch0, beta);
  Batch batch = oracles::random_batch(Family::gaussian(), 20, 4, rng);
  batch.batch_index = 2;

  // candidate equal to the carried estimate: the quadratic term vanishes
  const double n_total = 50.0;
  CHECK(bic(state, batch, beta) ==
        doctest::Approx(2 * std::log(n_total) -
                        2 * log_likelihood(Family::gaussian(), batch, beta))
            .epsilon(1e-12));

  // every term zero
  Batch zero_batch = batch;
  zero_batch.y.setZero();
  SolverState zero_state;
  zero_state.p = 4;
  zero_state.family = Family::gaussian();
  zero_state.beta = Eigen::VectorXd::Zero(4);
  zero_state.cum_hessian_diag = Eigen::VectorXd::Zero(4);
  CHECK(bic(zero_state, zero_batch, Eigen::VectorXd::Zero(4)) == 0.0);

  // exact additivity of the three printed terms
  const Eigen::VectorXd candidate = oracles::random_beta(4, rng);
  const BicParts parts = bic_parts(state, batch, candidate);
  CHECK(bic(state, batch, candidate) ==
        parts.support_term + parts.carry_term + parts.fit_term);

  // independent term-by-term recomputation on a small instance
  Batch small = oracles::random_batch(Family::logit(), 5, 3, rng);
  small.batch_index = 2;
  Eigen::VectorXd prev(3);
  prev << 0.4, 0.0, -0.1;
  Batch small0 = oracles::random_batch(Family::logit(), 7, 3, rng);
  const SolverState st = seeded_state(Family::logit(), small0, prev);
  const Eigen::VectorXd cand = oracles::random_beta(3, rng);
  int s_hat = 0;
  for (int j = 0; j < 3; ++j) {
    if (cand[j] != 0.0) ++s_hat;
  }
  double quad = 0.0;
  for (int j = 0; j < 3; ++j) {
    quad += st.cum_hessian_diag[j] * (cand[j] - prev[j]) * (cand[j] - prev[j]);
  }
  double ll = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double theta = small.X.row(i).dot(cand);
    ll += small.y[i] * theta - std::log1p(std::exp(theta));
  }
  const double expected = s_hat * std::log(7.0 + 5.0) + quad - 2.0 * ll;
  CHECK(bic(st, small, cand) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("select_lambda tie and degeneracy rules") {
  std::mt19937_64 rng(7);
  Batch batch0 = oracles::random_batch(Family::gaussian(), 40, 3, rng);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(3);
  const SolverState state = seeded_state(Family::gaussian(), batch0, beta);
  Batch batch = oracles::random_batch(Family::gaussian(), 25, 3, rng);
  batch.batch_index = 2;
  SolverConfig config;

  // single-point grid: that lambda is chosen
  {
    auto [lambda, trace] = select_lambda_on_grid(state, batch, {0.9}, config);
    CHECK(lambda == 0.9);
    CHECK(trace.chosen_index == 0);
  }

  // two lambdas above lambda_max yield identical all-zero candidates and
  // identical criterion values: the larger one wins the tie
  {
    const WorkingStats zw = compute_zw(state, batch);
    const double lmax = lambda_max(zw.z);
    auto [lambda, trace] =
        select_lambda_on_grid(state, batch, {2 * lmax + 2, 2 * lmax + 1}, config);
    CHECK(trace.bic_values[0] == trace.bic_values[1]);
    CHECK(lambda == 2 * lmax + 2);
  }

  // appending grid points with strictly larger criterion values does not
  // change the choice
  {
    auto [lambda_base, trace_base] = select_lambda(state, batch, config);
    std::vector<double> extended = trace_base.lambdas;
    extended.push_back(extended.back() * 0.5);
    auto [lambda_ext, trace_ext] =
        select_lambda_on_grid(state, batch, extended, config);
    REQUIRE(trace_ext.bic_values.back() >
            trace_base.bic_values[trace_base.chosen_index]);
    CHECK(lambda_ext == lambda_base);
    CHECK(trace_ext.chosen_index == trace_base.chosen_index);
  }

  // degenerate working statistics: 0 sentinel and empty trace
  {
    Batch null_batch = batch;
    null_batch.y.setZero();
    null_batch.X.setZero();
    // score and carried coefficients are all zero
    SolverState null_state = state;
    null_state.beta.setZero();
    auto [lambda, trace] = select_lambda(null_state, null_batch, config);
    CHECK(lambda == 0.0);
    CHECK(trace.degenerate());
  }
}

TEST_CASE("lasso support size is nonincreasing in lambda on the surrogate") {
  std::mt19937_64 rng(99);
  Batch batch0 = oracles::random_batch(Family::gaussian(), 50, 8, rng);
  const SolverState state =
      seeded_state(Family::gaussian(), batch0, Eigen::VectorXd::Zero(8));
  Batch batch = oracles::random_batch(Family::gaussian(), 30, 8, rng);
  batch.batch_index = 2;
  SolverConfig config;
  auto [lambda, trace] = select_lambda(state, batch, config);
  // lambdas descending => support sizes nondecreasing along the stored order
  for (std::size_t i = 1; i < trace.support_sizes.size(); ++i) {
    CHECK(trace.support_sizes[i] >= trace.support_sizes[i - 1]);
  }
}

TEST_CASE("reference-design batch-2 selection recovers the true support size") {
  // gaussian design, warm start on 1000 pooled observations, then one more
  // batch: the chosen lambda should name exactly the five true covariates in
  // at least 80% of seeded replications.
  const Family family = Family::gaussian();
  const Eigen::VectorXd beta0 = true_beta(10, family);
  SolverConfig config;
  config.penalty = PenaltyConfig::mcp();
  int hits = 0;
  const int reps = 50;
  for (int rep = 0; rep < reps; ++rep) {
    std::mt19937_64 rng(9000 + rep);
    Batch init;
    init.X = gen_covariates(1000, 10, 0.5, rng);
    init.y = gen_response(family, init.X, beta0, rng, 1.0);
    init.batch_index = 1;
    const SolverState state = init_first_batch(init, config, family);

    Batch batch;
    batch.X = gen_covariates(100, 10, 0.5, rng);
    batch.y = gen_response(family, batch.X, beta0, rng, 1.0);
    batch.batch_index = 2;
    auto [lambda, trace] = select_lambda(state, batch, config);
    if (!trace.degenerate() && trace.support_sizes[trace.chosen_index] == 5) ++hits;
  }
  CHECK(hits >= static_cast<int>(0.8 * reps));
}
