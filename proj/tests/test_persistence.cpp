#include "doctest.h"

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "streamglm/persistence.hpp"
#include "streamglm/simulation.hpp"
#include "streamglm/solver.hpp"

using namespace streamglm;

namespace {

SolverState run_stream(const Family& family, const PenaltyConfig& penalty,
                       std::uint64_t seed, int batches, int n, int from_batch = 0,
                       SolverState resume_from = {}) {
  const Eigen::VectorXd beta0 = true_beta(8, family);
  SolverConfig config;
  config.penalty = penalty;
  std::mt19937_64 rng(seed);
  SolverState state = std::move(resume_from);
  for (int t = 0; t < batches; ++t) {
    Batch b;
    b.X = gen_covariates(n, 8, 0.5, rng);
    b.y = gen_response(family, b.X, beta0, rng, 1.0);
    b.batch_index = t + 1;
    if (t < from_batch) continue;  // consume rng identically, skip processing
    state = t == 0 ? init_first_batch(b, config, family)
                   : process_batch(state, b, config).first;
  }
  return state;
}

bool states_identical(const SolverState& a, const SolverState& b) {
  if (a.p != b.p || a.batches_consumed != b.batches_consumed ||
      a.total_samples != b.total_samples || a.family.kind != b.family.kind ||
      a.tracked != b.tracked || a.active != b.active ||
      a.lambda_history != b.lambda_history) {
    return false;
  }
  if ((a.beta.array() != b.beta.array()).any()) return false;
  if ((a.cum_hessian_diag.array() != b.cum_hessian_diag.array()).any()) return false;
  if (a.cum_hessian_block.rows() != b.cum_hessian_block.rows()) return false;
  if (a.cum_hessian_block.size() > 0 &&
      (a.cum_hessian_block.array() != b.cum_hessian_block.array()).any()) {
    return false;
  }
  return true;
}

}  // namespace

TEST_CASE("read_batch parses the documented layout") {
  std::istringstream in("y,x1,x2\n2,1,0\n");
  const Batch batch = read_batch(in, 1);
  CHECK(batch.n() == 1);
  CHECK(batch.p() == 2);
  CHECK(batch.y[0] == 2.0);
  CHECK(batch.X(0, 0) == 1.0);
  CHECK(batch.X(0, 1) == 0.0);
}

TEST_CASE("read_batch error reporting") {
  SUBCASE("ragged row names its line") {
    std::istringstream in("y,x1,x2\n2,1\n");
    try {
      read_batch(in, 1);
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(e.row == 2);
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
  }
  SUBCASE("non-numeric field") {
    std::istringstream in("y,x1\n1,2\n3,oops\n");
    try {
      read_batch(in, 1);
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(e.row == 3);
    }
  }
  SUBCASE("non-finite field is rejected") {
    std::istringstream in("y,x1\nnan,2\n");
    CHECK_THROWS_AS(read_batch(in, 1), parse_error);
  }
  SUBCASE("empty file") {
    std::istringstream in("");
    CHECK_THROWS_AS(read_batch(in, 1), parse_error);
  }
  SUBCASE("header only") {
    std::istringstream in("y,x1\n");
    CHECK_THROWS_AS(read_batch(in, 1), parse_error);
  }
  SUBCASE("missing covariate columns") {
    std::istringstream in("y\n1\n");
    CHECK_THROWS_AS(read_batch(in, 1), parse_error);
  }
}

TEST_CASE("large batch file round-trips exactly") {
  std::mt19937_64 rng(17);
  Batch batch;
  batch.X.resize(100000, 3);
  batch.y.resize(100000);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    batch.y[i] = normal(rng) * 1e3;
    for (int j = 0; j < 3; ++j) batch.X(i, j) = normal(rng);
  }
  batch.batch_index = 1;

  std::stringstream io;
  write_batch(io, batch);
  const Batch back = read_batch(io, 1);
  REQUIRE(back.n() == batch.n());
  REQUIRE(back.p() == batch.p());
  CHECK((back.y.array() == batch.y.array()).all());
  CHECK((back.X.array() == batch.X.array()).all());
}

TEST_CASE("checkpoint round trip is canonical") {
  const SolverState state =
      run_stream(Family::gaussian(), PenaltyConfig::mcp(), 5, 4, 60);

  std::stringstream first;
  save_checkpoint(first, state, PenaltyConfig::mcp());
  const Checkpoint loaded = load_checkpoint(first);
  CHECK(states_identical(loaded.state, state));
  CHECK(loaded.penalty.kind == PenaltyKind::mcp);

  std::stringstream second;
  save_checkpoint(second, loaded.state, loaded.penalty);
  CHECK(first.str() == second.str());  // byte-identical re-serialization
}

TEST_CASE("checkpoint corruption and version handling") {
  const SolverState state =
      run_stream(Family::logit(), PenaltyConfig::scad(), 7, 3, 50);
  std::stringstream out;
  save_checkpoint(out, state, PenaltyConfig::scad());
  const std::string text = out.str();

  SUBCASE("truncation") {
    std::istringstream in(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(load_checkpoint(in), corrupt_checkpoint_error);
  }
  SUBCASE("flipped payload byte") {
    std::string mangled = text;
    const std::size_t pos = mangled.find("beta ") + 6;
    mangled[pos] = mangled[pos] == '1' ? '2' : '1';
    std::istringstream in(mangled);
    CHECK_THROWS_AS(load_checkpoint(in), corrupt_checkpoint_error);
  }
  SUBCASE("future version") {
    std::string mangled = text;
    mangled.replace(mangled.find("checkpoint 1"), 12, "checkpoint 2");
    std::istringstream in(mangled);
    CHECK_THROWS_AS(load_checkpoint(in), unsupported_version_error);
  }
  SUBCASE("empty stream") {
    std::istringstream in("");
    CHECK_THROWS_AS(load_checkpoint(in), corrupt_checkpoint_error);
  }
}

TEST_CASE("resume equals an uninterrupted run bit for bit") {
  for (const Family& family : {Family::gaussian(), Family::logit()}) {
    for (const auto& penalty : {PenaltyConfig::lasso(), PenaltyConfig::scad(),
                                PenaltyConfig::mcp()}) {
      const std::uint64_t seed = 1000 + static_cast<int>(penalty.kind);
      const SolverState full = run_stream(family, penalty, seed, 10, 40);

      // same stream, suspended after batch 5 through a checkpoint
      const SolverState half = run_stream(family, penalty, seed, 5, 40);
      std::stringstream io;
      save_checkpoint(io, half, penalty);
      const Checkpoint cp = load_checkpoint(io);
      const SolverState resumed =
          run_stream(family, penalty, seed, 10, 40, 5, cp.state);

      CHECK(states_identical(full, resumed));
      std::stringstream a, b;
      save_checkpoint(a, full, penalty);
      save_checkpoint(b, resumed, penalty);
      CHECK(a.str() == b.str());
    }
  }
}

TEST_CASE("checkpoint size is governed by p and tracked, not N") {
  SolverConfig config;
  config.fixed_active = {0, 1, 2};
  const Eigen::VectorXd beta0 = true_beta(8, Family::gaussian());
  auto run_with_n = [&](int n) {
    std::mt19937_64 rng(23);
    SolverState state;
    for (int t = 1; t <= 2; ++t) {
      Batch b;
      b.X = gen_covariates(n, 8, 0.5, rng);
      b.y = gen_response(Family::gaussian(), b.X, beta0, rng, 1.0);
      b.batch_index = t;
      state = t == 1 ? init_first_batch(b, config, Family::gaussian())
                     : process_batch(state, b, config).first;
    }
    std::stringstream out;
    save_checkpoint(out, state, config.penalty);
    return out.str();
  };
  const std::string small = run_with_n(500);
  const std::string large = run_with_n(50000);
  auto tokens = [](const std::string& s) {
    std::stringstream ss(s);
    std::string tok;
    long count = 0;
    while (ss >> tok) ++count;
    return count;
  };
  CHECK(tokens(small) == tokens(large));
  CHECK(std::fabs(static_cast<double>(small.size()) - static_cast<double>(large.size())) <
        0.2 * static_cast<double>(small.size()));
}
