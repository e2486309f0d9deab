#include "streamglm/penalty.hpp"

#include <cmath>

namespace streamglm {

namespace {

constexpr double kRegimeTol = 1e-12;  // detects the w == 1/(r-1), w == 1/r regimes

void check_w(double w) {
  if (!(w > 0.0)) {
    throw contract_violation("coordinate update requires w > 0");
  }
}

double scad_value(double a, double lambda, double r) {
  // a = |beta|
  if (a <= lambda) return lambda * a;
  if (a <= r * lambda) {
    return (2.0 * r * lambda * a - a * a - lambda * lambda) / (2.0 * (r - 1.0));
  }
  return (r + 1.0) * lambda * lambda / 2.0;
}

double mcp_value(double a, double lambda, double r) {
  if (a <= r * lambda) return lambda * a - a * a / (2.0 * r);
  return r * lambda * lambda / 2.0;
}

}  // namespace

void PenaltyConfig::validate() const {
  switch (kind) {
    case PenaltyKind::lasso:
      return;
    case PenaltyKind::scad:
      if (!(r > 2.0)) throw contract_violation("SCAD requires r > 2");
      return;
    case PenaltyKind::mcp:
      if (!(r > 1.0)) throw contract_violation("MCP requires r > 1");
      return;
  }
}

const char* PenaltyConfig::name() const {
  switch (kind) {
    case PenaltyKind::lasso:
      return "lasso";
    case PenaltyKind::scad:
      return "scad";
    case PenaltyKind::mcp:
      return "mcp";
  }
  return "unknown";
}

PenaltyConfig penalty_from_name(const std::string& name, double r) {
  PenaltyConfig config;
  if (name == "lasso") {
    config = PenaltyConfig::lasso();
  } else if (name == "scad") {
    config = PenaltyConfig::scad(r > 0 ? r : 3.7);
  } else if (name == "mcp") {
    config = PenaltyConfig::mcp(r > 0 ? r : 3.0);
  } else {
    throw contract_violation("unknown penalty: " + name);
  }
  config.validate();
  return config;
}

double soft_threshold(double z, double gamma) {
  if (gamma < 0.0) throw contract_violation("soft_threshold requires gamma >= 0");
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double coord_update_lasso(const CoordinateStat& stat, double lambda) {
  check_w(stat.w);
  return soft_threshold(stat.z, lambda) / stat.w;
}

double coord_update_scad(const CoordinateStat& stat, double lambda, double r) {
  check_w(stat.w);
  const double w = stat.w;
  const double az = std::fabs(stat.z);
  const double sgn = stat.z < 0.0 ? -1.0 : 1.0;
  const double slope = 1.0 / (r - 1.0);  // penalty curvature in the middle piece

  if (std::fabs(w - slope) <= kRegimeTol) {
    // flat middle piece: the minimizer sits in the outer pieces
    if (az <= r * lambda / (r - 1.0)) return sgn * (r - 1.0) * soft_threshold(az, lambda);
    return (r - 1.0) * stat.z;
  }
  if (w > slope) {
    // strictly convex everywhere: the unique stationary point, located by |z|
    if (az <= lambda + lambda * w) return soft_threshold(stat.z, lambda) / w;
    if (az < r * lambda * w) return sgn * (az - r * lambda / (r - 1.0)) / (w - slope);
    return stat.z / w;
  }
  // w < 1/(r-1): the middle piece is concave, so the minimum is the better of
  // the inner soft-thresholded solution and the outer unshrunk one.
  const double b_inner = std::min(soft_threshold(az, lambda) / w, lambda);
  const double b_outer = std::max(az / w, r * lambda);
  const double f_inner =
      0.5 * w * b_inner * b_inner - az * b_inner + scad_value(b_inner, lambda, r);
  const double f_outer =
      0.5 * w * b_outer * b_outer - az * b_outer + scad_value(b_outer, lambda, r);
  return sgn * (f_inner <= f_outer ? b_inner : b_outer);
}

double coord_update_mcp(const CoordinateStat& stat, double lambda, double r) {
  check_w(stat.w);
  const double w = stat.w;
  const double az = std::fabs(stat.z);
  const double sgn = stat.z < 0.0 ? -1.0 : 1.0;
  const double slope = 1.0 / r;

  if (std::fabs(w - slope) <= kRegimeTol) {
    if (az <= lambda) return 0.0;
    return r * stat.z;
  }
  if (w > slope) {
    if (az <= r * lambda * w) return sgn * soft_threshold(az, lambda) / (w - slope);
    return stat.z / w;
  }
  // w < 1/r: hard-threshold behavior; the objective at 0 and at z/w crosses
  // when |z| = lambda * sqrt(r w).
  if (az <= lambda * std::sqrt(r * w)) return 0.0;
  return stat.z / w;
}

std::optional<double> coord_update(const PenaltyConfig& config,
                                   const CoordinateStat& stat, double lambda) {
  if (stat.w <= 0.0) return std::nullopt;
  switch (config.kind) {
    case PenaltyKind::lasso:
      return coord_update_lasso(stat, lambda);
    case PenaltyKind::scad:
      return coord_update_scad(stat, lambda, config.r);
    case PenaltyKind::mcp:
      return coord_update_mcp(stat, lambda, config.r);
  }
  return std::nullopt;
}

double penalty_value(const PenaltyConfig& config, double beta, double lambda) {
  const double a = std::fabs(beta);
  switch (config.kind) {
    case PenaltyKind::lasso:
      return lambda * a;
    case PenaltyKind::scad:
      return scad_value(a, lambda, config.r);
    case PenaltyKind::mcp:
      return mcp_value(a, lambda, config.r);
  }
  return 0.0;
}

}  // namespace streamglm
