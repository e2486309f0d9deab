#pragma once

#include <optional>
#include <string>

#include "streamglm/errors.hpp"

namespace streamglm {

enum class PenaltyKind { lasso, scad, mcp };

/// Penalty kind plus its shape constant. r is ignored for LASSO;
/// SCAD requires r > 2 (default 3.7), MCP requires r > 1 (default 3).
struct PenaltyConfig {
  PenaltyKind kind = PenaltyKind::lasso;
  double r = 3.7;

  static PenaltyConfig lasso() { return {PenaltyKind::lasso, 3.7}; }
  static PenaltyConfig scad(double r = 3.7) { return {PenaltyKind::scad, r}; }
  static PenaltyConfig mcp(double r = 3.0) { return {PenaltyKind::mcp, r}; }

  void validate() const;
  const char* name() const;
};

PenaltyConfig penalty_from_name(const std::string& name, double r);

/// One coordinate's working statistics: z aggregates the batch score and the
/// carried estimate, w is the cumulative diagonal negative-Hessian entry.
struct CoordinateStat {
  double z = 0.0;
  double w = 0.0;
};

// sign(z) * (|z| - gamma)_+ ; gamma must be >= 0.
double soft_threshold(double z, double gamma);

// Closed-form minimizers of 0.5*w*b^2 - z*b + p_lambda(b) for each penalty.
// Precondition w > 0 (contract_violation otherwise). lambda = 0 is permitted
// and yields the unpenalized update z/w.
double coord_update_lasso(const CoordinateStat& stat, double lambda);
double coord_update_scad(const CoordinateStat& stat, double lambda, double r);
double coord_update_mcp(const CoordinateStat& stat, double lambda, double r);

// Dispatch on config; empty result is the degenerate-coordinate signal
// (w == 0): the caller skips the coordinate and pins it at 0.
std::optional<double> coord_update(const PenaltyConfig& config,
                                   const CoordinateStat& stat, double lambda);

// Penalty value p_lambda(|beta|): the standard LASSO/SCAD/MCP definitions.
// Nonnegative, zero at zero, nondecreasing in |beta|.
double penalty_value(const PenaltyConfig& config, double beta, double lambda);

}  // namespace streamglm
