#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "streamglm/glm.hpp"
#include "streamglm/penalty.hpp"

namespace streamglm {

/// Solver knobs. Defaults reproduce the reference experiment settings; the
/// per-batch coordinate step never needs more than one pass (the diagonal
/// surrogate is separable), so cd_max_passes bounds only the batch-1 offline
/// relinearization loop.
struct SolverConfig {
  PenaltyConfig penalty;
  int lambda_grid_size = 100;
  double lambda_min_ratio = 1e-3;
  double cd_tol = 1e-7;
  int cd_max_passes = 1000;
  int refit_max_steps = 1;
  // Exempts coordinate 1 (the intercept) from penalization. Off by default:
  // the reference experiments penalize the intercept like any coordinate.
  bool exempt_intercept = false;
  // Testing/diagnostic hook: when nonempty, variable selection is skipped and
  // this 0-based sorted set is the active set of every batch.
  std::vector<int> fixed_active;

  void validate() const;
};

/// The entire memory of a stream. Size depends only on the dimension and the
/// tracked-set cardinality, never on how many observations went by.
struct SolverState {
  int p = 0;
  Family family;
  int batches_consumed = 0;      // number of batches folded in so far
  long long total_samples = 0;   // running observation count

  Eigen::VectorXd beta;               // current estimate, zero off `active`
  Eigen::VectorXd cum_hessian_diag;   // per-coordinate accumulated curvature
  std::vector<int> tracked;           // union of all historical active sets, sorted 0-based
  Eigen::MatrixXd cum_hessian_block;  // accumulated negative-Hessian block over `tracked`
  std::vector<int> active;            // current active set, sorted 0-based, subset of tracked
  std::vector<double> lambda_history; // chosen penalty level per batch (0 = degenerate batch)
};

}  // namespace streamglm
