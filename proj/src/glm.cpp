#include "streamglm/glm.hpp"

#include <algorithm>
#include <cmath>

namespace streamglm {

namespace {

double clamp_theta(double theta) {
  return std::clamp(theta, -Family::kLogitClamp, Family::kLogitClamp);
}

void check_beta(const Batch& batch, const Eigen::VectorXd& beta) {
  if (beta.size() != batch.p()) {
    throw contract_violation("coefficient vector length " +
                             std::to_string(beta.size()) +
                             " does not match batch dimension " +
                             std::to_string(batch.p()));
  }
}

}  // namespace

double Family::cumulant(double theta) const {
  switch (kind) {
    case FamilyKind::gaussian_identity:
      return 0.5 * theta * theta;
    case FamilyKind::binomial_logit: {
      const double t = clamp_theta(theta);
      // log(1 + e^t), evaluated without overflow on either tail
      return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
    }
  }
  return 0.0;
}

double Family::mean(double theta) const {
  switch (kind) {
    case FamilyKind::gaussian_identity:
      return theta;
    case FamilyKind::binomial_logit: {
      const double t = clamp_theta(theta);
      return 1.0 / (1.0 + std::exp(-t));
    }
  }
  return 0.0;
}

double Family::variance(double theta) const {
  switch (kind) {
    case FamilyKind::gaussian_identity:
      return 1.0;
    case FamilyKind::binomial_logit: {
      const double mu = mean(theta);
      return mu * (1.0 - mu);
    }
  }
  return 0.0;
}

const char* Family::name() const {
  switch (kind) {
    case FamilyKind::gaussian_identity:
      return "gaussian_identity";
    case FamilyKind::binomial_logit:
      return "binomial_logit";
  }
  return "unknown";
}

Family family_from_name(const std::string& name) {
  if (name == "gaussian_identity" || name == "gaussian") return Family::gaussian();
  if (name == "binomial_logit" || name == "logit" || name == "binomial")
    return Family::logit();
  throw contract_violation("unknown family: " + name);
}

void Batch::validate() const {
  if (y.size() == 0) throw contract_violation("empty batch");
  if (X.rows() != y.size()) {
    throw contract_violation("batch has " + std::to_string(X.rows()) +
                             " covariate rows but " + std::to_string(y.size()) +
                             " responses");
  }
  if (X.cols() == 0) throw contract_violation("batch has no covariates");
  if (batch_index < 1) throw contract_violation("batch_index must be >= 1");
  if (!y.allFinite() || !X.allFinite()) {
    throw contract_violation("batch contains non-finite entries");
  }
}

double log_likelihood(const Family& family, const Batch& batch,
                      const Eigen::VectorXd& beta) {
  check_beta(batch, beta);
  const Eigen::VectorXd theta = batch.X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    ll += batch.y[i] * theta[i] - family.cumulant(theta[i]);
  }
  if (!std::isfinite(ll)) {
    throw numeric_error("log-likelihood overflowed (|X beta| too large)");
  }
  return ll;
}

Eigen::VectorXd score(const Family& family, const Batch& batch,
                      const Eigen::VectorXd& beta) {
  check_beta(batch, beta);
  const Eigen::VectorXd theta = batch.X * beta;
  Eigen::VectorXd resid(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    resid[i] = batch.y[i] - family.mean(theta[i]);
  }
  Eigen::VectorXd u = batch.X.transpose() * resid;
  if (!u.allFinite()) throw numeric_error("score overflowed");
  return u;
}

namespace {

// Sum_i (a_i * b_i) * w_i with a fixed accumulation order. hessian_diag and
// hessian_sub both go through this so the block diagonal equals the diagonal
// vector bit for bit.
double weighted_col_product(const Eigen::MatrixXd& X, int a, int b,
                            const Eigen::VectorXd& w) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    acc += (X(i, a) * X(i, b)) * w[i];
  }
  return acc;
}

}  // namespace

Eigen::VectorXd hessian_diag(const Family& family, const Batch& batch,
                             const Eigen::VectorXd& beta) {
  check_beta(batch, beta);
  const Eigen::VectorXd theta = batch.X * beta;
  Eigen::VectorXd w(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    w[i] = family.variance(theta[i]);
  }
  Eigen::VectorXd d(batch.p());
  for (int j = 0; j < batch.p(); ++j) {
    d[j] = weighted_col_product(batch.X, j, j, w);
  }
  if (!d.allFinite()) throw numeric_error("hessian diagonal overflowed");
  return d;
}

Eigen::MatrixXd hessian_sub(const Family& family, const Batch& batch,
                            const Eigen::VectorXd& beta,
                            const std::vector<int>& idx) {
  check_beta(batch, beta);
  const int p = static_cast<int>(batch.p());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= p) {
      throw contract_violation("hessian_sub index out of range: " +
                               std::to_string(idx[k]));
    }
    if (k > 0 && idx[k] <= idx[k - 1]) {
      throw contract_violation("hessian_sub indices must be sorted and distinct");
    }
  }
  const int k = static_cast<int>(idx.size());
  if (k == 0) return Eigen::MatrixXd(0, 0);

  const Eigen::VectorXd theta = batch.X * beta;
  Eigen::VectorXd w(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    w[i] = family.variance(theta[i]);
  }
  Eigen::MatrixXd block(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      const double v = weighted_col_product(batch.X, idx[a], idx[b], w);
      block(a, b) = v;
      block(b, a) = v;
    }
  }
  if (!block.allFinite()) throw numeric_error("hessian block overflowed");
  return block;
}

}  // namespace streamglm
