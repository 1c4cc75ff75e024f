#pragma once
// Exponential model of the design density conditioned on failure,
// p(theta | F) ~ exp(-alpha - beta . theta), fitted online by driving the
// normalization residual to zero.

#include "rbto/error.hpp"
#include "rbto/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace rbto {

struct FailureDensityModel {
  double alpha = 0.0;
  Vector beta;
  double eta_F = 0.2;

  FailureDensityModel() = default;
  FailureDensityModel(double a, Vector b, double eta) : alpha(a), beta(std::move(b)), eta_F(eta) {
    if (!(eta_F > 0.0)) throw ConfigError("failure-model step size eta_F must be > 0");
    if (!std::isfinite(alpha) || !beta.allFinite()) throw ConfigError("failure-model parameters must be finite");
  }

  std::size_t dimension() const { return static_cast<std::size_t>(beta.size()); }
};

/// Largest exponent accepted before exp() is evaluated.
inline constexpr double kMaxExponent = 700.0;

inline double log_density(const FailureDensityModel& model, const Vector& theta) {
  if (theta.size() != model.beta.size()) throw ConfigError("design dimension does not match beta");
  return -model.alpha - model.beta.dot(theta);
}

struct ResidualScore {
  double q_hat = 0.0;
  /// d q_hat / d(alpha, beta_1, ..., beta_n).
  Vector L_hat;
};

inline ResidualScore residual_and_score(const FailureDensityModel& model, const std::vector<Vector>& failed) {
  if (failed.empty()) throw ConfigError("residual needs at least one failed design");
  const Eigen::Index n = model.beta.size();
  ResidualScore out;
  out.L_hat = Vector::Zero(n + 1);
  double sum = 0.0;
  for (const Vector& theta : failed) {
    const double exponent = log_density(model, theta);
    if (!(exponent <= kMaxExponent))
      throw NumericalError("failure-model exponent " + std::to_string(exponent) + " exceeds " +
                           std::to_string(kMaxExponent));
    const double e = std::exp(exponent);
    sum += e;
    out.L_hat[0] -= e;
    out.L_hat.tail(n) -= e * theta;
  }
  out.q_hat = sum - 1.0;
  return out;
}

/// One gradient step on q_hat^2 / 2. No-op when nothing failed.
inline FailureDensityModel update(const FailureDensityModel& model, const std::vector<Vector>& failed) {
  if (failed.empty()) return model;
  const ResidualScore rs = residual_and_score(model, failed);
  FailureDensityModel next = model;
  const double scale = model.eta_F * rs.q_hat;
  next.alpha -= scale * rs.L_hat[0];
  next.beta -= scale * rs.L_hat.tail(model.beta.size());
  if (!std::isfinite(next.alpha) || !next.beta.allFinite())
    throw NumericalError("failure-model update produced a non-finite parameter");
  return next;
}

/// kappa_F (ln p_hat - ln p_a)^+ beta. The optimizer subtracts this term,
/// since d ln P_F / d theta = -beta under the exponential model.
inline Vector penalty_gradient(const FailureDensityModel& model, double p_hat, double p_a, double kappa_F) {
  if (!(p_a > 0.0 && p_a < 1.0)) throw ConfigError("p_a must lie in (0, 1)");
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw ConfigError("p_hat must lie in [0, 1]");
  if (p_hat <= p_a) return Vector::Zero(model.beta.size());
  return kappa_F * (std::log(p_hat) - std::log(p_a)) * model.beta;
}

}  // namespace rbto
