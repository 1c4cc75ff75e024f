#pragma once
// SIMP compliance-plus-mass design problems on the half beam and the L-shape.
// Random input is (xi, E0): load P = P0 (1 + c xi), lognormal modulus E0.
// Compliance is quadratic in P and inversely proportional to E0, so one unit
// solve per design serves every realization at that design.

#include "rbto/error.hpp"
#include "rbto/fem/filter.hpp"
#include "rbto/fem/mesh.hpp"
#include "rbto/fem/solver.hpp"
#include "rbto/optimizer.hpp"
#include "rbto/probmod.hpp"
#include "rbto/reliability.hpp"

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace rbto::fem {

enum class MeshKind { Rect, LShape };

inline const char* to_string(MeshKind k) { return k == MeshKind::Rect ? "rect" : "lshape"; }

struct BeamSettings {
  MeshKind mesh = MeshKind::Rect;
  int nx = 120;
  int ny = 40;
  /// L-shape outer size in elements.
  int n = 72;
  double C_max = 700.0;
  double tau = 0.25;
  double P0 = 1.0;
  double load_cv = 0.25;
  double E0_mean = 1.0;
  double E0_std = 0.1;
  double theta_min = 1e-3;
  double theta0 = 0.5;
  double nu = 0.3;
  double penal = 3.0;
  /// In element widths.
  double filter_radius = 1.5;

  static BeamSettings beam() { return {}; }

  static BeamSettings lbeam() {
    BeamSettings s;
    s.mesh = MeshKind::LShape;
    s.C_max = 650.0;
    s.P0 = 0.5;
    s.load_cv = 0.5;
    s.E0_std = 0.2;
    return s;
  }

  friend bool operator==(const BeamSettings&, const BeamSettings&) = default;
};

inline Mesh build_mesh(const BeamSettings& s) {
  return s.mesh == MeshKind::Rect ? build_rect_mesh(s.nx, s.ny) : build_lshape_mesh(s.n);
}

class BeamProblem final : public Problem {
 public:
  explicit BeamProblem(const BeamSettings& s)
      : s_(s),
        mesh_(std::make_unique<Mesh>(build_mesh(s))),
        filter_(*mesh_, s.filter_radius * mesh_->h),
        solver_(std::make_unique<ComplianceSolver>(*mesh_, s.nu, s.penal)),
        input_({RandomVariable::standard_normal(), RandomVariable::lognormal(s.E0_mean, s.E0_std)}),
        g_([this](std::span<const double> theta, std::span<const double> xi) { return limit_state_value(theta, xi); }) {
    if (!(s.C_max > 0.0)) throw ConfigError("C_max must be > 0");
    if (!(s.tau >= 0.0)) throw ConfigError("tau must be >= 0");
    if (!(s.theta_min > 0.0 && s.theta_min < 1.0)) throw ConfigError("theta_min must lie in (0, 1)");
    if (!(s.theta0 >= s.theta_min && s.theta0 <= 1.0)) throw ConfigError("theta0 must lie in [theta_min, 1]");
    const Vector ones = Vector::Ones(static_cast<Eigen::Index>(mesh_->num_elements()));
    mass_gradient_ = s.tau * mesh_->h * mesh_->h * filter_.backward(ones);
  }

  BeamProblem(const BeamProblem&) = delete;
  BeamProblem& operator=(const BeamProblem&) = delete;

  const BeamSettings& settings() const { return s_; }
  const Mesh& mesh() const { return *mesh_; }
  const DensityFilter& filter() const { return filter_; }

  /// Factor from the modelled compliance to the full-structure compliance.
  double symmetry_factor() const { return s_.mesh == MeshKind::Rect ? 2.0 : 1.0; }

  std::size_t dimension() const override { return mesh_->num_elements(); }
  const RandomInput& random_input() const override { return input_; }
  Vector lower_bounds() const override { return Vector::Constant(dim(), s_.theta_min); }
  Vector upper_bounds() const override { return Vector::Constant(dim(), 1.0); }
  Vector initial_design() const override { return Vector::Constant(dim(), s_.theta0); }

  /// (P / P0)^2 P0^2 / E0, the factor applied to the unit-load, unit-modulus compliance.
  double compliance_scale(std::span<const double> xi) const {
    if (!(xi[1] > 0.0)) throw DomainError("modulus realization must be positive");
    const double P = s_.P0 * (1.0 + s_.load_cv * xi[0]);
    return P * P / xi[1];
  }

  double compliance(const Vector& theta, std::span<const double> xi) const {
    return compliance_scale(xi) * unit(as_span(theta))->C1;
  }

  /// Compliance from a dedicated solve with the realized load and modulus.
  double compliance_direct(const Vector& theta, std::span<const double> xi) const {
    const Vector rho = filter_.forward(theta);
    std::lock_guard lock(mutex_);
    ++solves_;
    return solver_->solve(rho, xi[1], s_.P0 * (1.0 + s_.load_cv * xi[0])).compliance;
  }

  double objective_sample(const Vector& theta, std::span<const double> xi, Vector& grad) const override {
    const std::shared_ptr<const UnitSolve> us = unit(as_span(theta));
    const double sc = compliance_scale(xi);
    grad = sc * us->dC1_dtheta + mass_gradient_;
    return sc * us->C1 + s_.tau * mesh_->h * mesh_->h * us->rho.sum();
  }

  const LimitState& limit_state() const override { return g_; }

  std::uint64_t fe_solves() const { return solves_.load(); }

  /// Filtered densities on the bounding grid, row-major from the top row,
  /// with 0 in void cells.
  std::vector<double> density_grid(const Vector& theta) const {
    const Vector rho = filter_.forward(theta);
    std::vector<double> grid(static_cast<std::size_t>(mesh_->nelx) * mesh_->nely, 0.0);
    for (int r = 0; r < mesh_->nely; ++r)
      for (int c = 0; c < mesh_->nelx; ++c) {
        const int e = mesh_->cell_element[static_cast<std::size_t>(mesh_->nely - 1 - r) * mesh_->nelx + c];
        if (e >= 0) grid[static_cast<std::size_t>(r) * mesh_->nelx + c] = rho[e];
      }
    return grid;
  }

 private:
  struct UnitSolve {
    Vector theta;
    Vector rho;
    double C1 = 0.0;
    Vector dC1_dtheta;
  };

  Eigen::Index dim() const { return static_cast<Eigen::Index>(mesh_->num_elements()); }

  double limit_state_value(std::span<const double> theta, std::span<const double> xi) const {
    return s_.C_max - compliance_scale(xi) * unit(theta)->C1;
  }

  std::shared_ptr<const UnitSolve> unit(std::span<const double> theta) const {
    if (theta.size() != mesh_->num_elements()) throw ConfigError("design length does not match the mesh");
    std::lock_guard lock(mutex_);
    if (cache_ && std::equal(theta.begin(), theta.end(), cache_->theta.data())) return cache_;
    auto us = std::make_shared<UnitSolve>();
    us->theta = Eigen::Map<const Vector>(theta.data(), dim());
    us->rho = filter_.forward(us->theta);
    const Solution sol = solver_->solve(us->rho, 1.0, 1.0);
    ++solves_;
    us->C1 = sol.compliance;
    us->dC1_dtheta = filter_.backward(
        compliance_sensitivity(*mesh_, us->rho, sol.u, 1.0, solver_->unit_element_matrix(), s_.penal));
    cache_ = std::move(us);
    return cache_;
  }

  BeamSettings s_;
  std::unique_ptr<Mesh> mesh_;
  DensityFilter filter_;
  std::unique_ptr<ComplianceSolver> solver_;
  RandomInput input_;
  LimitState g_;
  Vector mass_gradient_;

  mutable std::mutex mutex_;
  mutable std::shared_ptr<const UnitSolve> cache_;
  mutable std::atomic<std::uint64_t> solves_{0};
};

}  // namespace rbto::fem
