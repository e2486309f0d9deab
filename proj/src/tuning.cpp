#include "streamglm/tuning.hpp"

#include <cmath>
#include <limits>

#include "streamglm/solver.hpp"

namespace streamglm {

double lambda_max(const Eigen::VectorXd& z) {
  if (z.size() == 0) throw contract_violation("lambda_max of an empty vector");
  return z.cwiseAbs().maxCoeff();
}

std::vector<double> lambda_grid(double lmax, int size, double min_ratio) {
  if (!(lmax > 0.0)) throw contract_violation("lambda_grid requires lmax > 0");
  if (size < 2) throw contract_violation("lambda_grid requires size >= 2");
  if (!(min_ratio > 0.0 && min_ratio < 1.0)) {
    throw contract_violation("lambda_grid requires 0 < min_ratio < 1");
  }
  std::vector<double> grid(size);
  const double log_hi = std::log(lmax);
  const double log_lo = std::log(min_ratio * lmax);
  for (int i = 0; i < size; ++i) {
    grid[i] = std::exp(log_hi + (log_lo - log_hi) * i / (size - 1));
  }
  grid.front() = lmax;              // endpoints exact
  grid.back() = min_ratio * lmax;
  return grid;
}

BicParts bic_parts(const SolverState& state, const Batch& batch,
                   const Eigen::VectorXd& candidate) {
  if (candidate.size() != state.p) {
    throw contract_violation("bic candidate length does not match dimension");
  }
  BicParts parts;
  int s_hat = 0;
  for (Eigen::Index j = 0; j < candidate.size(); ++j) {
    if (candidate[j] != 0.0) ++s_hat;
  }
  const double n_total = static_cast<double>(state.total_samples) +
                         static_cast<double>(batch.n());
  parts.support_term = s_hat * std::log(n_total);
  if (state.cum_hessian_diag.size() == candidate.size()) {
    double quad = 0.0;
    for (Eigen::Index j = 0; j < candidate.size(); ++j) {
      const double d = candidate[j] - state.beta[j];
      quad += state.cum_hessian_diag[j] * d * d;
    }
    parts.carry_term = quad;
  }
  parts.fit_term = -2.0 * log_likelihood(state.family, batch, candidate);
  return parts;
}

double bic(const SolverState& state, const Batch& batch,
           const Eigen::VectorXd& candidate) {
  return bic_parts(state, batch, candidate).total();
}

std::pair<double, BicTrace> select_lambda_on_grid(const SolverState& state,
                                                  const Batch& batch,
                                                  const std::vector<double>& grid,
                                                  const SolverConfig& config) {
  if (grid.empty()) throw contract_violation("empty lambda grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || (i > 0 && grid[i] >= grid[i - 1])) {
      throw contract_violation("lambda grid must be positive and strictly descending");
    }
  }
  const WorkingStats zw = compute_zw(state, batch);

  BicTrace trace;
  trace.lambdas = grid;
  trace.bic_values.reserve(grid.size());
  trace.support_sizes.reserve(grid.size());

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXd candidate = coordinate_candidate(zw, grid[i], config);
    const double value = bic(state, batch, candidate);
    int s_hat = 0;
    for (Eigen::Index j = 0; j < candidate.size(); ++j) {
      if (candidate[j] != 0.0) ++s_hat;
    }
    trace.bic_values.push_back(value);
    trace.support_sizes.push_back(s_hat);
    // strict comparison on a descending grid breaks ties toward larger lambda
    if (value < best) {
      best = value;
      trace.chosen_index = static_cast<int>(i);
      trace.chosen_lambda = grid[i];
    }
  }
  return {trace.chosen_lambda, trace};
}

std::pair<double, BicTrace> select_lambda(const SolverState& state,
                                          const Batch& batch,
                                          const SolverConfig& config) {
  const WorkingStats zw = compute_zw(state, batch);
  // penalty levels live on the per-observation scale of the working statistics
  const double lmax = lambda_max(zw.z) / zw.n_total;
  if (lmax == 0.0) {
    return {0.0, BicTrace{}};  // nothing to shrink; caller keeps the zero candidate
  }
  return select_lambda_on_grid(
      state, batch,
      lambda_grid(lmax, config.lambda_grid_size, config.lambda_min_ratio), config);
}

}  // namespace streamglm
