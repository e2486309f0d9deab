#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "streamglm/solver.hpp"

namespace streamglm {

/// Synthetic-stream design: per-batch size, batch count, compound-symmetry
/// correlation of the covariates, and replication control.
struct ExperimentConfig {
  Family family;
  int p = 10;
  int n_per_batch = 100;
  int n_batches = 50;
  double rho = 0.5;
  int replications = 20;
  std::uint64_t seed = 1;
  PenaltyConfig penalty;
  double noise_sd = 1.0;  // gaussian only
  // Observations pooled into the starting fit; with n_per_batch below this,
  // the leading ceil(init_samples / n) batches form the initialization.
  int init_samples = 1000;
  bool include_offline = false;  // also fit the pooled full-data reference
  SolverConfig solver;           // penalty field is overwritten by `penalty`

  void validate() const;
};

/// Selection outcome of one replication against the true support.
struct SelectionRecord {
  int nv = 0;               // selected-set size
  bool includes_all = false;
  bool exact = false;
  double type1 = 0.0;       // irrelevant inclusions / p
  double type2 = 0.0;       // active exclusions / p
};

struct SelectionMetrics {
  double nv = 0.0;
  double in_rate = 0.0;
  double cs_rate = 0.0;
  double type1 = 0.0;
  double type2 = 0.0;
  double l2_sq = 0.0;
  int replications = 0;  // successful replications behind the means
};

struct ReplicationRecord {
  int replication = 0;
  SelectionRecord selection;
  double l2_sq = 0.0;
  std::vector<int> selected;             // final active set, 0-based
  Eigen::VectorXd beta_hat;
  std::vector<long long> n_trajectory;   // cumulative N after init and each batch
  std::vector<double> l2_trajectory;     // squared l2 error at those points
  bool failed = false;
  std::string error;
};

struct ExperimentResult {
  SelectionMetrics metrics;
  std::vector<ReplicationRecord> records;
  bool has_offline = false;
  SelectionMetrics offline_metrics;
  std::vector<ReplicationRecord> offline_records;
};

// (0.5,-0.5,0.5,-0.5,0.5,0,...) for gaussian, (1,-1,1,-1,1,0,...) for logit;
// the true support is always the first five coordinates. Requires p >= 6.
Eigen::VectorXd true_beta(int p, const Family& family);

// Column 1 is the intercept (all ones); columns 2..p are unit-variance
// normals with pairwise correlation rho, built as
// sqrt(rho)*shared + sqrt(1-rho)*idiosyncratic.
Eigen::MatrixXd gen_covariates(int n, int p, double rho, std::mt19937_64& rng);

Eigen::VectorXd gen_response(const Family& family, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& beta0, std::mt19937_64& rng,
                             double noise_sd = 1.0);

// Both index sets 0-based, sorted.
SelectionRecord eval_selection(const std::vector<int>& s_hat,
                               const std::vector<int>& s_true, int p);

double l2_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0);

// 1 - SSE/SST. Requires length >= 2 and non-constant y.
double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat);

// Runs the full replication loop: generate batches, initialize on the pooled
// leading batches, stream the rest, score the final state. Deterministic for
// a fixed (config, seed); per-replication generators are seeded
// seed XOR replication-index. Failures are recorded per replication, never
// silently dropped.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Method label used in the metrics table, e.g. "Renew_MCP" for the online
// solver and "Total_data_MCP" for the pooled offline reference.
std::string method_label(const PenaltyConfig& penalty, bool offline);

}  // namespace streamglm
