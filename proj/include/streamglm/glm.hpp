#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "streamglm/errors.hpp"

namespace streamglm {

/// Exponential-family member with canonical link. The cumulant b and its
/// first two derivatives fully determine likelihood, score and Hessian;
/// the dispersion is fixed to 1 (it scales the objective without moving
/// the maximizer).
enum class FamilyKind {
  gaussian_identity,
  binomial_logit,
  // poisson_log is a planned extension point; not wired up.
};

struct Family {
  FamilyKind kind = FamilyKind::gaussian_identity;

  Family() = default;
  explicit Family(FamilyKind k) : kind(k) {}
  static Family gaussian() { return Family(FamilyKind::gaussian_identity); }
  static Family logit() { return Family(FamilyKind::binomial_logit); }

  // Linear predictors for the logit family are clamped to [-30, 30] before
  // exponentiation; this perturbs b' by < 1e-13 while keeping exp finite.
  static constexpr double kLogitClamp = 30.0;

  double cumulant(double theta) const;        // b
  double mean(double theta) const;            // b', in (0,1) for logit
  double variance(double theta) const;        // b'', >= 0

  const char* name() const;
};

Family family_from_name(const std::string& name);

/// One arriving chunk of the stream: response vector plus covariate matrix.
struct Batch {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  int batch_index = 1;  // position in the stream, 1-based

  Eigen::Index n() const { return y.size(); }
  Eigen::Index p() const { return X.cols(); }

  // Throws contract_violation on shape mismatch, empty batch, or
  // non-finite entries.
  void validate() const;
};

// Simplified batch log-likelihood: sum_i [ y_i*theta_i - b(theta_i) ],
// theta = X*beta. Throws numeric_error if the result is not finite.
double log_likelihood(const Family& family, const Batch& batch,
                      const Eigen::VectorXd& beta);

// Gradient of log_likelihood: X^T (y - b'(X beta)).
Eigen::VectorXd score(const Family& family, const Batch& batch,
                      const Eigen::VectorXd& beta);

// Diagonal of the negative Hessian X^T diag(b''(X beta)) X; entrywise >= 0.
Eigen::VectorXd hessian_diag(const Family& family, const Batch& batch,
                             const Eigen::VectorXd& beta);

// [idx, idx] block of the negative Hessian. idx must be sorted, distinct,
// 0-based and within [0, p).
Eigen::MatrixXd hessian_sub(const Family& family, const Batch& batch,
                            const Eigen::VectorXd& beta,
                            const std::vector<int>& idx);

}  // namespace streamglm
