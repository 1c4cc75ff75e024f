#pragma once
// Two-bar truss: design (lambda, delta) = (area fraction, bar angle from the
// vertical), volume objective lambda / cos(delta), and a compliance limit
// state under a horizontal load xi ~ N(0, 1).

#include "rbto/error.hpp"
#include "rbto/optimizer.hpp"
#include "rbto/probmod.hpp"
#include "rbto/reliability.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace rbto {

struct TrussSettings {
  /// Dimensionless compliance limit 2 C_max E A_max / (P^2 H).
  double c0 = 100.0;
  double P = 1.0;
  double lambda0 = 0.1;
  double delta0 = std::numbers::pi / 4;

  friend bool operator==(const TrussSettings&, const TrussSettings&) = default;
};

inline double truss_objective(double lambda, double delta) { return lambda / std::cos(delta); }

inline Vector truss_objective_gradient(double lambda, double delta) {
  const double c = std::cos(delta);
  Vector grad(2);
  grad << 1.0 / c, lambda * std::sin(delta) / (c * c);
  return grad;
}

/// g = c0 - (1 / (lambda cos d)) (1 / cos^2 d + xi^2 / (P^2 sin^2 d)); -inf at lambda <= 0.
inline double truss_limit_state(double lambda, double delta, double xi, double c0 = 100.0, double P = 1.0) {
  if (!(lambda > 0.0)) return -std::numeric_limits<double>::infinity();
  const double c = std::cos(delta);
  const double s = std::sin(delta);
  return c0 - (1.0 / (lambda * c)) * (1.0 / (c * c) + xi * xi / (P * P * s * s));
}

class TrussProblem final : public Problem {
 public:
  explicit TrussProblem(TrussSettings s = {})
      : s_(s),
        input_(RandomInput::standard_normal(1)),
        g_([c0 = s.c0, P = s.P](std::span<const double> th, std::span<const double> xi) {
          return truss_limit_state(th[0], th[1], xi[0], c0, P);
        }) {
    if (!(s_.c0 > 0.0)) throw ConfigError("truss c0 must be > 0");
    if (!(s_.P > 0.0)) throw ConfigError("truss load P must be > 0");
  }

  const TrussSettings& settings() const { return s_; }

  std::size_t dimension() const override { return 2; }
  const RandomInput& random_input() const override { return input_; }
  Vector lower_bounds() const override { return Vector{{0.0, kDeltaMargin}}; }
  Vector upper_bounds() const override { return Vector{{1.0, std::numbers::pi / 2 - kDeltaMargin}}; }
  Vector initial_design() const override { return Vector{{s_.lambda0, s_.delta0}}; }

  double objective_sample(const Vector& theta, std::span<const double>, Vector& grad) const override {
    grad = truss_objective_gradient(theta[0], theta[1]);
    return truss_objective(theta[0], theta[1]);
  }

  const LimitState& limit_state() const override { return g_; }

  static constexpr double kDeltaMargin = 1e-3;

 private:
  TrussSettings s_;
  RandomInput input_;
  LimitState g_;
};

}  // namespace rbto
