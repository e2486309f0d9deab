#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "streamglm/state.hpp"
#include "streamglm/tuning.hpp"

namespace streamglm {

/// Working statistics of one batch linearized at the carried estimate:
/// w = accumulated curvature + current batch curvature (diagonal),
/// z = batch score + carried coefficient times w, per coordinate.
/// n_total is the observation count behind w (stream plus current batch);
/// the penalized objective carries an n_total-scaled penalty, so coordinate
/// updates and penalty levels operate on the per-observation statistics
/// z / n_total and w / n_total. That keeps the curvature regimes of the
/// nonconvex operators live (w/n is O(1)) and makes lambda comparable
/// across batches.
struct WorkingStats {
  Eigen::VectorXd z;
  Eigen::VectorXd w;
  double n_total = 1.0;
};

WorkingStats compute_zw(const SolverState& state, const Batch& batch);

// One separable pass of closed-form coordinate updates on precomputed
// working statistics; coordinates with w == 0 are pinned at zero. This *is*
// the exact surrogate minimizer, so no iteration happens here.
Eigen::VectorXd coordinate_candidate(const WorkingStats& zw, double lambda,
                                     const SolverConfig& config);

// Convenience form matching the batch-level contract.
Eigen::VectorXd coordinate_descent(const SolverState& state, const Batch& batch,
                                   double lambda, const SolverConfig& config);

// Exact support of the candidate (literal nonzero test, no magnitude floor).
std::vector<int> select_active(const Eigen::VectorXd& candidate);

// Incremental Newton refit on the active block: starting from the carried
// estimate restricted to `active`, apply up to refit_max_steps steps of
//   beta_A += solve(cumulative-plus-current-batch block, batch score on A),
// relinearizing the score on the current batch only. Throws
// refit_degenerate_error when the block is singular or indefinite.
Eigen::VectorXd refit_renewable_mle(const SolverState& state, const Batch& batch,
                                    const std::vector<int>& active,
                                    int refit_max_steps = 1);

// Offline penalized fit used for the first batch: outer relinearization of
// the score/curvature at the current iterate, inner Gauss-Seidel coordinate
// pass on that cycle's quadratic surrogate, repeated until the largest
// coefficient change drops below cd_tol (or cd_max_passes cycles).
Eigen::VectorXd offline_penalized_fit(const Family& family, const Batch& batch,
                                      double lambda, const SolverConfig& config,
                                      Eigen::VectorXd warm_start);

// Unpenalized maximum-likelihood fit on the given columns (Newton iteration;
// exact single solve for the gaussian family). Returns coefficients over
// `active` only.
Eigen::VectorXd mle_on_active(const Family& family, const Batch& batch,
                              const std::vector<int>& active);

// Consumes the first batch: penalized path with the criterion specialized to
// one batch, support selection, unpenalized refit, and summary-statistic
// initialization. `trace_out`, when non-null, receives the selection trace.
SolverState init_first_batch(const Batch& batch, const SolverConfig& config,
                             const Family& family, BicTrace* trace_out = nullptr);

// Folds one more batch into the state: penalty-level selection, separable
// coordinate step, support selection, renewable refit, summary update. The
// batch is never needed again afterwards.
std::pair<SolverState, BicTrace> process_batch(const SolverState& state,
                                               const Batch& batch,
                                               const SolverConfig& config);

}  // namespace streamglm
