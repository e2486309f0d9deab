#include "streamglm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace streamglm {

namespace {

void check_sorted_subset(const std::vector<int>& idx, int p, const char* what) {
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= p) {
      throw contract_violation(std::string(what) + " index out of range: " +
                               std::to_string(idx[k]));
    }
    if (k > 0 && idx[k] <= idx[k - 1]) {
      throw contract_violation(std::string(what) +
                               " indices must be sorted and distinct");
    }
  }
}

std::vector<int> sorted_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Positions of `subset` inside `superset` (both sorted).
std::vector<int> positions_in(const std::vector<int>& subset,
                              const std::vector<int>& superset) {
  std::vector<int> pos(subset.size());
  std::size_t cursor = 0;
  for (std::size_t k = 0; k < subset.size(); ++k) {
    while (cursor < superset.size() && superset[cursor] < subset[k]) ++cursor;
    if (cursor == superset.size() || superset[cursor] != subset[k]) {
      throw contract_violation("active set escapes the tracked set");
    }
    pos[k] = static_cast<int>(cursor);
  }
  return pos;
}

// Solves H d = u for a symmetric block that must be positive definite;
// throws refit_degenerate_error otherwise.
Eigen::VectorXd solve_pd(const Eigen::MatrixXd& H, const Eigen::VectorXd& u,
                         const std::vector<int>& active) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
  bool ok = ldlt.info() == Eigen::Success;
  if (ok) {
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.size() ? d.maxCoeff() : 0.0;
    ok = dmax > 0.0 && d.minCoeff() > dmax * 1e-13;
  }
  if (!ok) {
    throw refit_degenerate_error("active-block Hessian is singular or indefinite",
                                 active);
  }
  Eigen::VectorXd step = ldlt.solve(u);
  if (!step.allFinite()) {
    throw refit_degenerate_error("active-block solve produced non-finite step",
                                 active);
  }
  return step;
}

double penalized_lambda(const SolverConfig& config, double lambda, int j) {
  return (config.exempt_intercept && j == 0) ? 0.0 : lambda;
}

}  // namespace

void SolverConfig::validate() const {
  penalty.validate();
  if (lambda_grid_size < 2) throw contract_violation("lambda_grid_size must be >= 2");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio < 1.0)) {
    throw contract_violation("lambda_min_ratio must be in (0, 1)");
  }
  if (!(cd_tol > 0.0)) throw contract_violation("cd_tol must be > 0");
  if (cd_max_passes < 1) throw contract_violation("cd_max_passes must be >= 1");
  if (refit_max_steps < 1) throw contract_violation("refit_max_steps must be >= 1");
  if (!fixed_active.empty()) {
    for (std::size_t k = 1; k < fixed_active.size(); ++k) {
      if (fixed_active[k] <= fixed_active[k - 1]) {
        throw contract_violation("fixed_active must be sorted and distinct");
      }
    }
    if (fixed_active.front() < 0) {
      throw contract_violation("fixed_active contains a negative index");
    }
  }
}

WorkingStats compute_zw(const SolverState& state, const Batch& batch) {
  batch.validate();
  if (batch.p() != state.p) {
    throw contract_violation("batch dimension " + std::to_string(batch.p()) +
                             " does not match stream dimension " +
                             std::to_string(state.p));
  }
  WorkingStats zw;
  const Eigen::VectorXd batch_curv = hessian_diag(state.family, batch, state.beta);
  zw.w = state.cum_hessian_diag + batch_curv;
  const Eigen::VectorXd u = score(state.family, batch, state.beta);
  zw.z = u + state.beta.cwiseProduct(zw.w);
  zw.n_total = static_cast<double>(state.total_samples) +
               static_cast<double>(batch.n());
  return zw;
}

Eigen::VectorXd coordinate_candidate(const WorkingStats& zw, double lambda,
                                     const SolverConfig& config) {
  const double n = zw.n_total > 0.0 ? zw.n_total : 1.0;
  Eigen::VectorXd candidate = Eigen::VectorXd::Zero(zw.z.size());
  for (Eigen::Index j = 0; j < zw.z.size(); ++j) {
    const auto value = coord_update(config.penalty, {zw.z[j] / n, zw.w[j] / n},
                                    penalized_lambda(config, lambda, static_cast<int>(j)));
    candidate[j] = value.value_or(0.0);  // zero-information coordinate stays 0
  }
  return candidate;
}

Eigen::VectorXd coordinate_descent(const SolverState& state, const Batch& batch,
                                   double lambda, const SolverConfig& config) {
  return coordinate_candidate(compute_zw(state, batch), lambda, config);
}

std::vector<int> select_active(const Eigen::VectorXd& candidate) {
  std::vector<int> active;
  for (Eigen::Index j = 0; j < candidate.size(); ++j) {
    if (candidate[j] != 0.0) active.push_back(static_cast<int>(j));
  }
  return active;
}

Eigen::VectorXd refit_renewable_mle(const SolverState& state, const Batch& batch,
                                    const std::vector<int>& active,
                                    int refit_max_steps) {
  batch.validate();
  check_sorted_subset(active, state.p, "active");
  const int k = static_cast<int>(active.size());
  if (k == 0) return Eigen::VectorXd(0);

  // Cumulative block over `active`, with zero history for indices that are
  // newly tracked (their cross terms begin accumulating this batch).
  Eigen::MatrixXd H = hessian_sub(state.family, batch, state.beta, active);
  {
    std::size_t cursor = 0;
    std::vector<int> hit_active, hit_tracked;
    for (int a = 0; a < k; ++a) {
      while (cursor < state.tracked.size() && state.tracked[cursor] < active[a])
        ++cursor;
      if (cursor < state.tracked.size() && state.tracked[cursor] == active[a]) {
        hit_active.push_back(a);
        hit_tracked.push_back(static_cast<int>(cursor));
      }
    }
    for (std::size_t a = 0; a < hit_active.size(); ++a) {
      for (std::size_t b = 0; b < hit_active.size(); ++b) {
        H(hit_active[a], hit_active[b]) +=
            state.cum_hessian_block(hit_tracked[a], hit_tracked[b]);
      }
    }
  }

  Eigen::VectorXd beta_active(k);
  for (int a = 0; a < k; ++a) beta_active[a] = state.beta[active[a]];

  Eigen::VectorXd full = state.beta;  // current full-length iterate
  for (int step = 0; step < refit_max_steps; ++step) {
    Eigen::VectorXd u_full = score(state.family, batch, full);
    Eigen::VectorXd u(k);
    for (int a = 0; a < k; ++a) u[a] = u_full[active[a]];
    beta_active += solve_pd(H, u, active);
    if (step + 1 < refit_max_steps) {
      full.setZero();
      for (int a = 0; a < k; ++a) full[active[a]] = beta_active[a];
    }
  }
  return beta_active;
}

Eigen::VectorXd offline_penalized_fit(const Family& family, const Batch& batch,
                                      double lambda, const SolverConfig& config,
                                      Eigen::VectorXd warm_start) {
  const int p = static_cast<int>(batch.p());
  const double n = static_cast<double>(batch.n());
  Eigen::VectorXd beta =
      warm_start.size() == p ? std::move(warm_start) : Eigen::VectorXd::Zero(p);

  for (int cycle = 0; cycle < config.cd_max_passes; ++cycle) {
    // relinearize: weights and score residual at the current iterate
    const Eigen::VectorXd theta = batch.X * beta;
    Eigen::VectorXd w(theta.size());
    Eigen::VectorXd v(theta.size());  // w .* working residual, no division by w
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      w[i] = family.variance(theta[i]);
      v[i] = batch.y[i] - family.mean(theta[i]);
    }
    Eigen::VectorXd curv(p);
    for (int j = 0; j < p; ++j) {
      curv[j] = batch.X.col(j).cwiseAbs2().dot(w);
    }

    // one Gauss-Seidel pass on this cycle's surrogate (per-observation scale)
    double max_change = 0.0;
    for (int j = 0; j < p; ++j) {
      const double old = beta[j];
      double next = 0.0;
      if (curv[j] > 0.0) {
        const double zj = batch.X.col(j).dot(v) + old * curv[j];
        next = coord_update(config.penalty, {zj / n, curv[j] / n},
                            penalized_lambda(config, lambda, j))
                   .value_or(0.0);
      }
      if (next != old) {
        v -= batch.X.col(j).cwiseProduct(w) * (next - old);
        beta[j] = next;
        max_change = std::max(max_change, std::fabs(next - old));
      }
    }
    if (max_change < config.cd_tol) break;
  }
  return beta;
}

Eigen::VectorXd mle_on_active(const Family& family, const Batch& batch,
                              const std::vector<int>& active) {
  batch.validate();
  check_sorted_subset(active, static_cast<int>(batch.p()), "active");
  const int k = static_cast<int>(active.size());
  if (k == 0) return Eigen::VectorXd(0);

  Eigen::MatrixXd Xa(batch.n(), k);
  for (int a = 0; a < k; ++a) Xa.col(a) = batch.X.col(active[a]);

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  const bool gaussian = family.kind == FamilyKind::gaussian_identity;
  const int max_newton = gaussian ? 1 : 50;
  for (int it = 0; it < max_newton; ++it) {
    const Eigen::VectorXd theta = Xa * beta;
    Eigen::VectorXd w(theta.size()), resid(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      w[i] = family.variance(theta[i]);
      resid[i] = batch.y[i] - family.mean(theta[i]);
    }
    const Eigen::MatrixXd H = Xa.transpose() * w.asDiagonal() * Xa;
    const Eigen::VectorXd u = Xa.transpose() * resid;
    const Eigen::VectorXd step = solve_pd(H, u, active);
    beta += step;
    if (step.cwiseAbs().maxCoeff() < 1e-10) break;
  }
  return beta;
}

SolverState init_first_batch(const Batch& batch, const SolverConfig& config,
                             const Family& family, BicTrace* trace_out) {
  batch.validate();
  config.validate();
  if (batch.batch_index != 1) {
    throw contract_violation("init_first_batch requires batch_index == 1");
  }
  const int p = static_cast<int>(batch.p());

  SolverState state;
  state.p = p;
  state.family = family;
  state.beta = Eigen::VectorXd::Zero(p);
  state.cum_hessian_diag = Eigen::VectorXd::Zero(p);

  BicTrace trace;

  if (!config.fixed_active.empty()) {
    check_sorted_subset(config.fixed_active, p, "fixed_active");
    state.active = config.fixed_active;
    const Eigen::VectorXd fit = mle_on_active(family, batch, state.active);
    for (std::size_t a = 0; a < state.active.size(); ++a) {
      state.beta[state.active[a]] = fit[a];
    }
    state.lambda_history.push_back(0.0);
  } else {
    const Eigen::VectorXd curv0 = hessian_diag(family, batch, state.beta);
    if (curv0.maxCoeff() <= 0.0) {
      throw degenerate_stream_error("no coordinate carries curvature in batch 1");
    }
    const double lmax =
        lambda_max(score(family, batch, state.beta)) / static_cast<double>(batch.n());
    if (lmax == 0.0) {
      // nothing correlates with the response: a valid all-zero start
      state.lambda_history.push_back(0.0);
    } else {
      const std::vector<double> grid =
          lambda_grid(lmax, config.lambda_grid_size, config.lambda_min_ratio);
      trace.lambdas = grid;
      double best = std::numeric_limits<double>::infinity();
      Eigen::VectorXd best_candidate = Eigen::VectorXd::Zero(p);
      Eigen::VectorXd warm = Eigen::VectorXd::Zero(p);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        warm = offline_penalized_fit(family, batch, grid[i], config, warm);
        const double value = bic(state, batch, warm);
        int s_hat = 0;
        for (int j = 0; j < p; ++j) {
          if (warm[j] != 0.0) ++s_hat;
        }
        trace.bic_values.push_back(value);
        trace.support_sizes.push_back(s_hat);
        if (value < best) {
          best = value;
          best_candidate = warm;
          trace.chosen_index = static_cast<int>(i);
          trace.chosen_lambda = grid[i];
        }
      }
      state.active = select_active(best_candidate);
      if (!state.active.empty()) {
        try {
          const Eigen::VectorXd refit = mle_on_active(family, batch, state.active);
          for (std::size_t a = 0; a < state.active.size(); ++a) {
            state.beta[state.active[a]] = refit[a];
          }
        } catch (const refit_degenerate_error&) {
          std::cerr << "streamglm: batch-1 refit degenerate, keeping the "
                       "penalized estimate\n";
          state.beta = best_candidate;
        }
      }
      state.lambda_history.push_back(trace.chosen_lambda);
    }
  }

  state.tracked = state.active;
  state.cum_hessian_diag = hessian_diag(family, batch, state.beta);
  state.cum_hessian_block = hessian_sub(family, batch, state.beta, state.tracked);
  state.batches_consumed = 1;
  state.total_samples = batch.n();
  if (trace_out) *trace_out = trace;
  return state;
}

std::pair<SolverState, BicTrace> process_batch(const SolverState& state,
                                               const Batch& batch,
                                               const SolverConfig& config) {
  batch.validate();
  config.validate();
  if (batch.batch_index != state.batches_consumed + 1) {
    throw contract_violation("batch " + std::to_string(batch.batch_index) +
                             " arrived after " +
                             std::to_string(state.batches_consumed) +
                             " consumed batches");
  }
  if (batch.p() != state.p) {
    throw contract_violation("batch dimension changed mid-stream");
  }

  BicTrace trace;
  std::vector<int> active;
  Eigen::VectorXd candidate = Eigen::VectorXd::Zero(state.p);

  if (!config.fixed_active.empty()) {
    check_sorted_subset(config.fixed_active, state.p, "fixed_active");
    active = config.fixed_active;
  } else {
    auto [lambda, t] = select_lambda(state, batch, config);
    trace = std::move(t);
    if (!trace.degenerate()) {
      candidate = coordinate_descent(state, batch, lambda, config);
    }
    active = select_active(candidate);
  }

  SolverState next = state;
  next.beta = Eigen::VectorXd::Zero(state.p);
  if (!active.empty()) {
    Eigen::VectorXd refitted;
    try {
      refitted = refit_renewable_mle(state, batch, active, config.refit_max_steps);
    } catch (const refit_degenerate_error& err) {
      std::cerr << "streamglm: batch " << batch.batch_index
                << " refit degenerate (" << err.what()
                << "), keeping the penalized candidate\n";
      refitted.resize(active.size());
      for (std::size_t a = 0; a < active.size(); ++a) {
        refitted[a] = candidate[active[a]];
      }
    }
    for (std::size_t a = 0; a < active.size(); ++a) {
      next.beta[active[a]] = refitted[a];
    }
  }

  // Summary update at the refitted estimate; cross terms of newly tracked
  // indices start accumulating from this batch.
  next.cum_hessian_diag =
      state.cum_hessian_diag + hessian_diag(state.family, batch, next.beta);
  const std::vector<int> tracked_next = sorted_union(state.tracked, active);
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(tracked_next.size(), tracked_next.size());
  if (!state.tracked.empty()) {
    const std::vector<int> old_pos = positions_in(state.tracked, tracked_next);
    for (std::size_t a = 0; a < old_pos.size(); ++a) {
      for (std::size_t b = 0; b < old_pos.size(); ++b) {
        block(old_pos[a], old_pos[b]) = state.cum_hessian_block(a, b);
      }
    }
  }
  block += hessian_sub(state.family, batch, next.beta, tracked_next);
  next.cum_hessian_block = std::move(block);
  next.tracked = tracked_next;
  next.active = active;
  next.batches_consumed = state.batches_consumed + 1;
  next.total_samples = state.total_samples + batch.n();
  next.lambda_history.push_back(trace.chosen_lambda);  // 0 on degenerate batches

  if (static_cast<int>(next.tracked.size()) >
          std::min<std::size_t>(state.p, 10 * std::max<std::size_t>(1, active.size())) &&
      next.tracked.size() > state.tracked.size()) {
    std::cerr << "streamglm: tracked set grew to " << next.tracked.size()
              << " indices against an active set of " << active.size()
              << " (batch " << batch.batch_index << ")\n";
  }

  return {std::move(next), std::move(trace)};
}

}  // namespace streamglm
