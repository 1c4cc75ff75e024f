#pragma once
// Penalized stochastic-gradient loop for reliability-based design: mini-batch
// gradients, periodic failure-probability estimates, online updates of the
// failure-density model, and projection onto the design box.

#include "rbto/error.hpp"
#include "rbto/failmodel.hpp"
#include "rbto/probmod.hpp"
#include "rbto/reliability.hpp"
#include "rbto/types.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rbto {

/// A design problem under uncertainty. Gradients are with respect to the
/// design vector and have length dimension().
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::size_t dimension() const = 0;
  virtual const RandomInput& random_input() const = 0;
  virtual Vector lower_bounds() const = 0;
  virtual Vector upper_bounds() const = 0;
  virtual Vector initial_design() const = 0;

  /// f(theta; xi); writes the gradient into `grad`.
  virtual double objective_sample(const Vector& theta, std::span<const double> xi, Vector& grad) const = 0;

  virtual std::size_t num_constraints() const { return 0; }
  /// q_i(theta; xi); writes the gradient into `grad`.
  virtual double constraint_sample(std::size_t i, const Vector& theta, std::span<const double> xi,
                                   Vector& grad) const {
    (void)theta, (void)xi, (void)grad;
    throw ConfigError("problem has no constraint " + std::to_string(i));
  }

  virtual const LimitState& limit_state() const = 0;
};

enum class RunMode { Rbto, Robust };

inline const char* to_string(RunMode m) { return m == RunMode::Rbto ? "rbto" : "robust"; }

struct OptimizerConfig {
  RunMode mode = RunMode::Rbto;
  double eta = 1e-5;
  std::size_t batch_size = 1;
  std::size_t refresh_interval = 100;
  double kappa_F = 2500.0;
  std::vector<double> kappa_C;
  double p_a = 1e-3;
  std::size_t iterations = 10000;
  EstimatorConfig estimator;
  /// Also estimate P_F before the first step instead of waiting for k = m.
  bool refresh_at_start = false;
  std::uint64_t seed = 1;
  double alpha0 = 0.01;
  double beta0 = 0.01;
  double eta_F = 0.2;

  void validate(std::size_t n_constraints) const {
    if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (refresh_interval < 1) throw ConfigError("refresh_interval must be at least 1");
    if (!(kappa_F >= 0.0)) throw ConfigError("kappa_F must be >= 0");
    if (!(p_a > 0.0 && p_a < 1.0)) throw ConfigError("p_a must lie in (0, 1)");
    if (iterations < 1) throw ConfigError("iterations must be at least 1");
    if (!(eta_F > 0.0)) throw ConfigError("eta_F must be > 0");
    if (!kappa_C.empty() && kappa_C.size() != n_constraints)
      throw ConfigError("kappa_C has " + std::to_string(kappa_C.size()) + " entries for " +
                        std::to_string(n_constraints) + " constraints");
    for (double k : kappa_C)
      if (!(k >= 0.0)) throw ConfigError("kappa_C entries must be >= 0");
  }

  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

struct RefreshRecord {
  std::size_t iteration = 0;
  ReliabilityEstimate estimate;
};

struct RunHistory {
  /// Indexed by iteration - 1.
  std::vector<double> batch_objective;
  std::vector<std::optional<double>> p_hat;
  std::vector<double> alpha;
  std::vector<double> beta_norm;
  std::vector<bool> failure_update;

  std::vector<RefreshRecord> refreshes;
  Vector theta;
  FailureDensityModel model;
  std::uint64_t exact_g_evals = 0;
  std::uint64_t objective_evals = 0;

  std::size_t completed() const { return batch_objective.size(); }
};

/// Componentwise clip into [lo, hi].
inline Vector project(const Vector& theta, const Vector& lo, const Vector& hi) {
  return theta.cwiseMax(lo).cwiseMin(hi);
}

/// h = sum_j grad f(theta; xi_j) + sum_j sum_i kappa_C,i q_i^+ grad q_i - penalty.
/// `failure_penalty` is the output of penalty_gradient and enters with a minus sign.
inline Vector stochastic_gradient(const Problem& problem, const Vector& theta, const SampleMatrix& batch,
                                  const std::vector<double>& kappa_C, const Vector& failure_penalty,
                                  double* objective_sum = nullptr) {
  if (batch.rows() < 1) throw ConfigError("stochastic gradient needs a nonempty batch");
  const Eigen::Index n = static_cast<Eigen::Index>(problem.dimension());
  Vector h = Vector::Zero(n);
  Vector grad(n);
  double fsum = 0.0;
  for (Eigen::Index j = 0; j < batch.rows(); ++j) {
    const auto xi = row_span(batch, j);
    fsum += problem.objective_sample(theta, xi, grad);
    h += grad;
    for (std::size_t i = 0; i < problem.num_constraints(); ++i) {
      const double kc = i < kappa_C.size() ? kappa_C[i] : 0.0;
      if (kc == 0.0) continue;
      const double q = problem.constraint_sample(i, theta, xi, grad);
      if (q > 0.0) h += kc * q * grad;
    }
  }
  if (failure_penalty.size() == n) h -= failure_penalty;
  if (objective_sum) *objective_sum = fsum;
  return h;
}

struct RunCallbacks {
  /// Called after every completed iteration k (1-based).
  std::function<void(std::size_t k, const RunHistory&)> on_iteration;
};

/// Runs the loop, appending to `history` as it goes so a partial trace survives
/// an exception. Randomness: batch k uses root.child("batch").child(k) and the
/// estimate at k uses root.child("estimate").child(k).
inline void run_into(const Problem& problem, const OptimizerConfig& cfg, RunHistory& history,
                     const RunCallbacks& callbacks = {}) {
  cfg.validate(problem.num_constraints());
  const std::size_t dim = problem.dimension();
  const RandomInput& input = problem.random_input();
  const Vector lo = problem.lower_bounds();
  const Vector hi = problem.upper_bounds();
  const bool rbto = cfg.mode == RunMode::Rbto;

  Vector theta = project(problem.initial_design(), lo, hi);
  if (static_cast<std::size_t>(theta.size()) != dim) throw ConfigError("initial design has the wrong dimension");

  FailureDensityModel model(cfg.alpha0, Vector::Constant(static_cast<Eigen::Index>(dim), cfg.beta0), cfg.eta_F);
  std::optional<double> p_hat;

  const SampleStream root(cfg.seed);
  const SampleStream batch_root = root.child("batch");
  const SampleStream estimate_root = root.child("estimate");
  const LimitState& g = problem.limit_state();

  history.theta = theta;
  history.model = model;

  for (std::size_t k = 1; k <= cfg.iterations; ++k) {
    std::optional<double> refreshed;
    if (rbto && (k % cfg.refresh_interval == 0 || (k == 1 && cfg.refresh_at_start))) {
      const ReliabilityEstimate est = estimate(g, as_span(theta), input, cfg.estimator, estimate_root.child(k));
      p_hat = est.p_hat;
      refreshed = est.p_hat;
      history.exact_g_evals += est.n_exact_evals;
      history.refreshes.push_back({k, est});
    }

    const SampleMatrix batch = input.sample(cfg.batch_size, batch_root.child(k));

    bool failed = false;
    if (rbto) {
      for (Eigen::Index j = 0; j < batch.rows(); ++j)
        if (g(as_span(theta), row_span(batch, j)) <= 0.0) failed = true;
      history.exact_g_evals += static_cast<std::uint64_t>(batch.rows());
      if (failed) model = update(model, {theta});
    }

    const Vector penalty = rbto && p_hat ? penalty_gradient(model, *p_hat, cfg.p_a, cfg.kappa_F) : Vector();
    double fsum = 0.0;
    const Vector h = stochastic_gradient(problem, theta, batch, cfg.kappa_C, penalty, &fsum);
    history.objective_evals += static_cast<std::uint64_t>(batch.rows());

    for (Eigen::Index i = 0; i < h.size(); ++i)
      if (!std::isfinite(h[i]))
        throw NumericalError("non-finite gradient component " + std::to_string(i) + " at iteration " +
                             std::to_string(k));
    if (!std::isfinite(fsum)) throw NumericalError("non-finite objective at iteration " + std::to_string(k));

    theta = project(theta - cfg.eta * h, lo, hi);

    history.batch_objective.push_back(fsum / static_cast<double>(batch.rows()));
    history.p_hat.push_back(refreshed);
    history.alpha.push_back(model.alpha);
    history.beta_norm.push_back(model.beta.norm());
    history.failure_update.push_back(failed);
    history.theta = theta;
    history.model = model;
    if (callbacks.on_iteration) callbacks.on_iteration(k, history);
  }
}

inline RunHistory run(const Problem& problem, const OptimizerConfig& cfg, const RunCallbacks& callbacks = {}) {
  RunHistory history;
  run_into(problem, cfg, history, callbacks);
  return history;
}

}  // namespace rbto
