#pragma once
// Command implementations behind the rbto_cli tool: `run` optimizes and writes
// history, design and summary files; `estimate` evaluates one design.

#include "rbto/config.hpp"
#include "rbto/error.hpp"
#include "rbto/fem/beam.hpp"
#include "rbto/io.hpp"
#include "rbto/optimizer.hpp"
#include "rbto/reliability.hpp"
#include "rbto/truss.hpp"

#include <chrono>
#include <filesystem>
#include <memory>
#include <numbers>
#include <ostream>
#include <string>

namespace rbto::app {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalError = 3 };

inline std::unique_ptr<Problem> make_problem(const RunConfig& c) {
  if (c.problem == ProblemKind::Truss) return std::make_unique<TrussProblem>(c.truss);
  return std::make_unique<fem::BeamProblem>(c.beam);
}

/// The design named by the config: explicit values, a uniform fill, a file,
/// or the problem's initial design.
inline Vector fixed_design(const RunConfig& c, const Problem& p) {
  std::vector<double> v = c.design;
  if (c.design_fill) v.assign(p.dimension(), *c.design_fill);
  if (!c.design_file.empty()) v = io::read_numbers(c.design_file);
  if (v.empty()) return p.initial_design();
  if (v.size() != p.dimension())
    throw ConfigError("design has " + std::to_string(v.size()) + " values, problem expects " +
                      std::to_string(p.dimension()));
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

struct RunOutcome {
  int exit_code = kOk;
  RunHistory history;
  Json summary;
  std::string error;
};

/// Runs the optimizer and writes history.csv, theta.csv, design.csv
/// (+ design.pgm for FEM problems), summary.json and timing.json into out_dir.
/// On a numerical failure the partial history is still written.
inline RunOutcome cmd_run(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream* log = nullptr) {
  namespace fs = std::filesystem;
  const auto t0 = std::chrono::steady_clock::now();
  RunOutcome out;
  const std::unique_ptr<Problem> problem = make_problem(cfg);
  const auto* beam = dynamic_cast<const fem::BeamProblem*>(problem.get());

  RunCallbacks cb;
  const std::size_t every = std::max<std::size_t>(1, cfg.opt.iterations / 10);
  if (log)
    cb.on_iteration = [&](std::size_t k, const RunHistory& h) {
      if (k % every != 0 && k != cfg.opt.iterations) return;
      *log << "iteration " << k << "/" << cfg.opt.iterations << "  batch objective "
           << h.batch_objective.back();
      if (!h.refreshes.empty()) *log << "  last p_hat " << h.refreshes.back().estimate.p_hat;
      *log << std::endl;
    };

  try {
    run_into(*problem, cfg.opt, out.history, cb);
  } catch (const NumericalError& e) {
    out.exit_code = kNumericalError;
    out.error = e.what();
  } catch (const DomainError& e) {
    out.exit_code = kNumericalError;
    out.error = e.what();
  }
  const RunHistory& h = out.history;

  Json summary;
  summary["config"] = config_to_json(cfg);
  summary["seed"] = cfg.opt.seed;
  summary["status"] = out.exit_code == kOk ? "completed" : "failed";
  if (!out.error.empty()) summary["error"] = out.error;
  summary["iterations_completed"] = h.completed();

  std::vector<double> theta(h.theta.data(), h.theta.data() + h.theta.size());
  io::write_atomic(out_dir / "history.csv", io::history_csv(h));
  io::write_atomic(out_dir / "theta.csv", io::vector_csv("theta", theta));

  if (cfg.problem == ProblemKind::Truss) {
    const double lambda = theta.at(0);
    const double delta = theta.at(1);
    summary["final"] = {{"lambda", lambda},
                        {"delta_rad", delta},
                        {"delta_deg", delta * 180.0 / std::numbers::pi},
                        {"objective", truss_objective(lambda, delta)}};
    io::write_atomic(out_dir / "design.csv",
                     "lambda,delta\n" + io::format_double(lambda) + "," + io::format_double(delta) + "\n");
  } else {
    const std::vector<double> grid = beam->density_grid(h.theta);
    const Vector rho = beam->filter().forward(h.theta);
    const double nominal_xi[2] = {0.0, cfg.beam.E0_mean};
    summary["final"] = {{"design_digest", io::fnv1a_hex(theta)},
                        {"elements", theta.size()},
                        {"volume_fraction", rho.mean()},
                        {"nominal_compliance", beam->compliance(h.theta, nominal_xi)},
                        {"symmetry_factor", beam->symmetry_factor()}};
    io::write_atomic(out_dir / "design.csv", io::grid_csv(grid, beam->mesh().nelx));
    io::write_atomic(out_dir / "design.pgm", io::grid_pgm(grid, beam->mesh().nelx));
  }

  Json run_info;
  run_info["exact_g_evals"] = h.exact_g_evals;
  run_info["objective_samples"] = h.objective_evals;
  run_info["refreshes"] = h.refreshes.size();
  if (!h.refreshes.empty()) run_info["last_p_hat"] = h.refreshes.back().estimate.p_hat;
  run_info["alpha"] = h.model.alpha;
  run_info["beta_norm"] = h.model.beta.norm();

  if (out.exit_code == kOk) {
    if (log) *log << "post-hoc Monte Carlo with " << cfg.posthoc_samples << " samples" << std::endl;
    const ReliabilityEstimate post = mc_estimate(problem->limit_state(), as_span(h.theta), problem->random_input(),
                                                 cfg.posthoc_samples, SampleStream(cfg.opt.seed).child("posthoc"));
    summary["posthoc"] = {{"method", "mc"},
                          {"samples", post.population},
                          {"failures", post.n_fail},
                          {"p_hat", post.p_hat}};
  }
  if (beam) run_info["fe_solves"] = beam->fe_solves();
  summary["run"] = run_info;
  out.summary = summary;
  io::write_atomic(out_dir / "summary.json", summary.dump(2) + "\n");

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::write_atomic(out_dir / "timing.json", Json{{"wall_time_s", wall}}.dump(2) + "\n");
  return out;
}

/// One estimator call at the configured design; prints a report to `os`.
inline ReliabilityEstimate cmd_estimate(const RunConfig& cfg, std::ostream& os) {
  const std::unique_ptr<Problem> problem = make_problem(cfg);
  const Vector theta = fixed_design(cfg, *problem);
  const ReliabilityEstimate est = estimate(problem->limit_state(), as_span(theta), problem->random_input(),
                                           cfg.opt.estimator, SampleStream(cfg.opt.seed).child("estimate"));
  os << "method: " << to_string(est.method) << "\n";
  os << "p_hat: " << io::format_double(est.p_hat) << "\n";
  os << "exact_evaluations: " << est.n_exact_evals << "\n";
  os << "surrogate_evaluations: " << est.n_surrogate_evals << "\n";
  os << "failures: " << est.n_fail << " of " << est.population << "\n";
  if (est.method == EstimatorMethod::Subset) {
    os << "levels: " << est.levels << "\n";
    os << "thresholds:";
    for (double b : est.thresholds) os << ' ' << io::format_double(b);
    os << "\n";
  }
  return est;
}

}  // namespace rbto::app
