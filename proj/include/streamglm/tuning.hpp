#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "streamglm/state.hpp"

namespace streamglm {

/// Record of one per-batch penalty-level search. `lambdas` is strictly
/// descending; `chosen_index` attains the minimum of `bic_values` with ties
/// broken toward larger lambda. A degenerate trace (all working statistics
/// zero) has chosen_index == -1 and chosen_lambda == 0.
struct BicTrace {
  std::vector<double> lambdas;
  std::vector<double> bic_values;
  std::vector<int> support_sizes;
  double chosen_lambda = 0.0;
  int chosen_index = -1;

  bool degenerate() const { return chosen_index < 0; }
};

// max_j |z_j|; above this penalty level every coordinate update returns zero.
double lambda_max(const Eigen::VectorXd& z);

// `size` points log-uniformly spaced on [min_ratio*lmax, lmax], descending,
// with both endpoints exact. Requires lmax > 0, size >= 2, 0 < min_ratio < 1.
std::vector<double> lambda_grid(double lmax, int size, double min_ratio);

struct BicParts {
  double support_term = 0.0;  // s_hat * ln(N_b)
  double carry_term = 0.0;    // quadratic distance to the carried estimate
  double fit_term = 0.0;      // -2 * batch log-likelihood
  double total() const { return support_term + carry_term + fit_term; }
};

// The online model-selection criterion for one candidate:
//   s_hat*ln(N_b) + (cand-prev)' diag(cumulative curvature) (cand-prev)
//   - 2*loglik(cand; batch).
// The carried quadratic uses the diagonal accumulated curvature: that is the
// only history the streaming state possesses off the tracked set.
BicParts bic_parts(const SolverState& state, const Batch& batch,
                   const Eigen::VectorXd& candidate);
double bic(const SolverState& state, const Batch& batch,
           const Eigen::VectorXd& candidate);

// Evaluates the criterion over an explicit descending grid. Candidates are
// the closed-form coordinate updates from one shared linearization at the
// carried estimate (the working statistics are computed once, not per
// lambda). Grid points are independent; reduction is a deterministic argmin
// with ties toward larger lambda.
std::pair<double, BicTrace> select_lambda_on_grid(const SolverState& state,
                                                  const Batch& batch,
                                                  const std::vector<double>& grid,
                                                  const SolverConfig& config);

// Builds the grid from lambda_max and the config, then selects. When
// lambda_max == 0 returns the degenerate trace with a 0 sentinel.
std::pair<double, BicTrace> select_lambda(const SolverState& state,
                                          const Batch& batch,
                                          const SolverConfig& config);

}  // namespace streamglm
