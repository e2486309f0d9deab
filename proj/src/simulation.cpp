#include "streamglm/simulation.hpp"

#include <algorithm>
#include <cmath>

namespace streamglm {

namespace {

// Compensated (Kahan) mean over values in index order.
double kahan_mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double y = v - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / static_cast<double>(values.size());
}

}  // namespace

void ExperimentConfig::validate() const {
  if (p < 6) throw contract_violation("experiment requires p >= 6");
  if (n_per_batch < 1) throw contract_violation("n_per_batch must be >= 1");
  if (n_batches < 1) throw contract_violation("n_batches must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw contract_violation("rho must be in [0, 1)");
  if (replications < 1) throw contract_violation("replications must be >= 1");
  if (!(noise_sd >= 0.0)) throw contract_violation("noise_sd must be >= 0");
  if (init_samples < 1) throw contract_violation("init_samples must be >= 1");
  penalty.validate();
}

Eigen::VectorXd true_beta(int p, const Family& family) {
  if (p < 6) throw contract_violation("true_beta requires p >= 6");
  const double scale =
      family.kind == FamilyKind::gaussian_identity ? 0.5 : 1.0;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (int j = 0; j < 5; ++j) {
    beta[j] = (j % 2 == 0 ? scale : -scale);
  }
  return beta;
}

Eigen::MatrixXd gen_covariates(int n, int p, double rho, std::mt19937_64& rng) {
  if (n < 1 || p < 1) throw contract_violation("gen_covariates needs n, p >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw contract_violation("rho must be in [0, 1)");
  std::normal_distribution<double> normal(0.0, 1.0);
  const double shared_scale = std::sqrt(rho);
  const double idio_scale = std::sqrt(1.0 - rho);
  Eigen::MatrixXd X(n, p);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    const double shared = normal(rng);
    for (int j = 1; j < p; ++j) {
      X(i, j) = shared_scale * shared + idio_scale * normal(rng);
    }
  }
  return X;
}

Eigen::VectorXd gen_response(const Family& family, const Eigen::MatrixXd& X,
                             const Eigen::VectorXd& beta0, std::mt19937_64& rng,
                             double noise_sd) {
  if (X.cols() != beta0.size()) {
    throw contract_violation("gen_response dimension mismatch");
  }
  const Eigen::VectorXd eta = X * beta0;
  Eigen::VectorXd y(X.rows());
  if (family.kind == FamilyKind::gaussian_identity) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y[i] = eta[i] + noise_sd * normal(rng);
    }
  } else {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      y[i] = unif(rng) < family.mean(eta[i]) ? 1.0 : 0.0;
    }
  }
  return y;
}

SelectionRecord eval_selection(const std::vector<int>& s_hat,
                               const std::vector<int>& s_true, int p) {
  SelectionRecord rec;
  rec.nv = static_cast<int>(s_hat.size());
  std::vector<int> extra, missed;
  std::set_difference(s_hat.begin(), s_hat.end(), s_true.begin(), s_true.end(),
                      std::back_inserter(extra));
  std::set_difference(s_true.begin(), s_true.end(), s_hat.begin(), s_hat.end(),
                      std::back_inserter(missed));
  rec.includes_all = missed.empty();
  rec.exact = missed.empty() && extra.empty();
  rec.type1 = static_cast<double>(extra.size()) / p;
  rec.type2 = static_cast<double>(missed.size()) / p;
  return rec;
}

double l2_error(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta0) {
  if (beta_hat.size() != beta0.size()) {
    throw contract_violation("l2_error length mismatch");
  }
  return (beta_hat - beta0).squaredNorm();
}

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& y_hat) {
  if (y.size() != y_hat.size()) throw contract_violation("r_squared length mismatch");
  if (y.size() < 2) throw contract_violation("r_squared needs length >= 2");
  const double mean = y.mean();
  const double sst = (y.array() - mean).square().sum();
  if (sst == 0.0) throw numeric_error("r_squared undefined for constant response");
  const double sse = (y - y_hat).squaredNorm();
  return 1.0 - sse / sst;
}

std::string method_label(const PenaltyConfig& penalty, bool offline) {
  std::string tag;
  switch (penalty.kind) {
    case PenaltyKind::lasso: tag = "LASSO"; break;
    case PenaltyKind::scad: tag = "SCAD"; break;
    case PenaltyKind::mcp: tag = "MCP"; break;
  }
  return (offline ? "Total_data_" : "Renew_") + tag;
}

namespace {

struct GeneratedStream {
  Eigen::MatrixXd X;  // (B*n) x p, batches stacked in order
  Eigen::VectorXd y;
};

GeneratedStream generate_stream(const ExperimentConfig& config,
                                const Eigen::VectorXd& beta0,
                                std::mt19937_64& rng) {
  GeneratedStream s;
  const long long total =
      static_cast<long long>(config.n_batches) * config.n_per_batch;
  s.X.resize(total, config.p);
  s.y.resize(total);
  long long row = 0;
  for (int t = 0; t < config.n_batches; ++t) {
    const Eigen::MatrixXd Xt =
        gen_covariates(config.n_per_batch, config.p, config.rho, rng);
    const Eigen::VectorXd yt =
        gen_response(config.family, Xt, beta0, rng, config.noise_sd);
    s.X.middleRows(row, config.n_per_batch) = Xt;
    s.y.segment(row, config.n_per_batch) = yt;
    row += config.n_per_batch;
  }
  return s;
}

Batch slice_batch(const GeneratedStream& s, long long row0, long long rows,
                  int batch_index) {
  Batch b;
  b.X = s.X.middleRows(row0, rows);
  b.y = s.y.segment(row0, rows);
  b.batch_index = batch_index;
  return b;
}

ReplicationRecord run_online_replication(const ExperimentConfig& config,
                                         const SolverConfig& solver,
                                         const GeneratedStream& stream,
                                         const Eigen::VectorXd& beta0, int rep) {
  ReplicationRecord rec;
  rec.replication = rep;
  const int n = config.n_per_batch;
  const int init_batches = std::clamp(
      static_cast<int>((std::min<long long>(config.init_samples,
                                            static_cast<long long>(n) * config.n_batches) +
                        n - 1) /
                       n),
      1, config.n_batches);

  SolverState state = init_first_batch(
      slice_batch(stream, 0, static_cast<long long>(init_batches) * n, 1), solver,
      config.family);
  rec.n_trajectory.push_back(state.total_samples);
  rec.l2_trajectory.push_back(l2_error(state.beta, beta0));

  for (int t = init_batches; t < config.n_batches; ++t) {
    Batch batch = slice_batch(stream, static_cast<long long>(t) * n, n,
                              state.batches_consumed + 1);
    auto [next, trace] = process_batch(state, batch, solver);
    state = std::move(next);
    rec.n_trajectory.push_back(state.total_samples);
    rec.l2_trajectory.push_back(l2_error(state.beta, beta0));
  }

  rec.selected = state.active;
  rec.beta_hat = state.beta;
  rec.l2_sq = l2_error(state.beta, beta0);
  return rec;
}

ReplicationRecord run_offline_replication(const ExperimentConfig& config,
                                          const SolverConfig& solver,
                                          const GeneratedStream& stream,
                                          const Eigen::VectorXd& beta0, int rep) {
  ReplicationRecord rec;
  rec.replication = rep;
  Batch pooled = slice_batch(stream, 0, stream.y.size(), 1);
  SolverState state = init_first_batch(pooled, solver, config.family);
  rec.selected = state.active;
  rec.beta_hat = state.beta;
  rec.l2_sq = l2_error(state.beta, beta0);
  rec.n_trajectory.push_back(state.total_samples);
  rec.l2_trajectory.push_back(rec.l2_sq);
  return rec;
}

SelectionMetrics aggregate(std::vector<ReplicationRecord>& records,
                           const std::vector<int>& s_true, int p) {
  std::vector<double> nv, in01, cs01, t1, t2, l2;
  for (auto& rec : records) {
    if (rec.failed) continue;
    rec.selection = eval_selection(rec.selected, s_true, p);
    nv.push_back(rec.selection.nv);
    in01.push_back(rec.selection.includes_all ? 1.0 : 0.0);
    cs01.push_back(rec.selection.exact ? 1.0 : 0.0);
    t1.push_back(rec.selection.type1);
    t2.push_back(rec.selection.type2);
    l2.push_back(rec.l2_sq);
  }
  SelectionMetrics m;
  m.replications = static_cast<int>(nv.size());
  m.nv = kahan_mean(nv);
  m.in_rate = kahan_mean(in01);
  m.cs_rate = kahan_mean(cs01);
  m.type1 = kahan_mean(t1);
  m.type2 = kahan_mean(t2);
  m.l2_sq = kahan_mean(l2);
  return m;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  SolverConfig solver = config.solver;
  solver.penalty = config.penalty;
  solver.validate();

  const Eigen::VectorXd beta0 = true_beta(config.p, config.family);
  std::vector<int> s_true;
  for (int j = 0; j < config.p; ++j) {
    if (beta0[j] != 0.0) s_true.push_back(j);
  }

  ExperimentResult result;
  result.records.reserve(config.replications);
  result.has_offline = config.include_offline;

  for (int rep = 0; rep < config.replications; ++rep) {
    std::mt19937_64 rng(config.seed ^ static_cast<std::uint64_t>(rep));
    const GeneratedStream stream = generate_stream(config, beta0, rng);
    try {
      result.records.push_back(
          run_online_replication(config, solver, stream, beta0, rep));
    } catch (const std::exception& e) {
      ReplicationRecord rec;
      rec.replication = rep;
      rec.failed = true;
      rec.error = e.what();
      result.records.push_back(std::move(rec));
    }
    if (config.include_offline) {
      try {
        result.offline_records.push_back(
            run_offline_replication(config, solver, stream, beta0, rep));
      } catch (const std::exception& e) {
        ReplicationRecord rec;
        rec.replication = rep;
        rec.failed = true;
        rec.error = e.what();
        result.offline_records.push_back(std::move(rec));
      }
    }
  }

  result.metrics = aggregate(result.records, s_true, config.p);
  if (config.include_offline) {
    result.offline_metrics = aggregate(result.offline_records, s_true, config.p);
  }
  return result;
}

}  // namespace streamglm
