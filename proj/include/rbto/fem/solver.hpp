#pragma once
// SIMP stiffness assembly and sparse LDL^T compliance solves. The sparsity
// pattern and fill-reducing ordering are computed once per mesh.

#include "rbto/error.hpp"
#include "rbto/fem/element.hpp"
#include "rbto/fem/mesh.hpp"
#include "rbto/types.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace rbto::fem {

struct Solution {
  /// Full displacement vector, zero on constrained DOFs.
  Vector u;
  double compliance = 0.0;
};

inline std::array<int, 8> element_dofs(const Element& e) {
  std::array<int, 8> d{};
  for (int a = 0; a < 4; ++a) {
    d[2 * a] = 2 * e.nodes[a];
    d[2 * a + 1] = 2 * e.nodes[a] + 1;
  }
  return d;
}

class ComplianceSolver {
 public:
  using SparseMatrix = Eigen::SparseMatrix<double>;

  explicit ComplianceSolver(const Mesh& mesh, double nu = 0.3, double penal = 3.0)
      : mesh_(&mesh), penal_(penal), ke_(element_stiffness(1.0, nu, mesh.h)) {
    const std::size_t ndof = mesh.num_dofs();
    free_index_.assign(ndof, 0);
    for (int d : mesh.fixed_dofs) free_index_[static_cast<std::size_t>(d)] = -1;
    int nfree = 0;
    for (auto& f : free_index_)
      if (f == 0) f = nfree++;
    nfree_ = nfree;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.num_elements() * 36);
    for (const Element& e : mesh.elements) {
      const auto dofs = element_dofs(e);
      for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
          const int r = free_index_[dofs[a]];
          const int c = free_index_[dofs[b]];
          if (r >= 0 && c >= 0 && r >= c) trip.emplace_back(r, c, 0.0);
        }
    }
    K_.resize(nfree_, nfree_);
    K_.setFromTriplets(trip.begin(), trip.end());
    K_.makeCompressed();

    slot_.assign(mesh.num_elements() * 64, -1);
    for (std::size_t ei = 0; ei < mesh.num_elements(); ++ei) {
      const auto dofs = element_dofs(mesh.elements[ei]);
      for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
          const int r = free_index_[dofs[a]];
          const int c = free_index_[dofs[b]];
          if (r < 0 || c < 0 || r < c) continue;
          const int* begin = K_.innerIndexPtr() + K_.outerIndexPtr()[c];
          const int* end = K_.innerIndexPtr() + K_.outerIndexPtr()[c + 1];
          const int* it = std::lower_bound(begin, end, r);
          slot_[ei * 64 + a * 8 + b] = static_cast<int>(it - K_.innerIndexPtr());
        }
    }
    ldlt_.analyzePattern(K_);
  }

  const Mesh& mesh() const { return *mesh_; }
  double penal() const { return penal_; }
  const ElementMatrix& unit_element_matrix() const { return ke_; }
  int num_free() const { return nfree_; }

  /// K(rho) with element moduli E0 rho_e^penal, restricted to free DOFs (lower triangle).
  const SparseMatrix& assemble(const Vector& rho, double E0) {
    check_density(rho);
    std::fill_n(K_.valuePtr(), K_.nonZeros(), 0.0);
    double* values = K_.valuePtr();
    for (std::size_t ei = 0; ei < mesh_->num_elements(); ++ei) {
      const double scale = E0 * std::pow(rho[static_cast<Eigen::Index>(ei)], penal_);
      const int* s = slot_.data() + ei * 64;
      for (int k = 0; k < 64; ++k)
        if (s[k] >= 0) values[s[k]] += scale * ke_(k / 8, k % 8);
    }
    return K_;
  }

  /// Solves K(rho) u = P f and returns u with C = (P f)^T u.
  Solution solve(const Vector& rho, double E0, double P = 1.0) {
    assemble(rho, E0);
    ldlt_.factorize(K_);
    const double dmin = ldlt_.info() == Eigen::Success ? ldlt_.vectorD().minCoeff() : 0.0;
    if (ldlt_.info() != Eigen::Success || !(dmin > 0.0))
      throw SolverError("stiffness matrix is singular or indefinite (smallest pivot " + std::to_string(dmin) + ")",
                        dmin);
    Vector f_free(nfree_);
    for (std::size_t d = 0; d < free_index_.size(); ++d)
      if (free_index_[d] >= 0) f_free[free_index_[d]] = P * mesh_->load[static_cast<Eigen::Index>(d)];
    const Vector u_free = ldlt_.solve(f_free);
    Solution sol;
    sol.u = Vector::Zero(static_cast<Eigen::Index>(free_index_.size()));
    for (std::size_t d = 0; d < free_index_.size(); ++d)
      if (free_index_[d] >= 0) sol.u[static_cast<Eigen::Index>(d)] = u_free[free_index_[d]];
    sol.compliance = f_free.dot(u_free);
    if (!std::isfinite(sol.compliance)) throw NumericalError("non-finite compliance");
    return sol;
  }

 private:
  void check_density(const Vector& rho) const {
    if (static_cast<std::size_t>(rho.size()) != mesh_->num_elements())
      throw ConfigError("density vector length does not match the mesh");
    for (Eigen::Index i = 0; i < rho.size(); ++i)
      if (!(rho[i] > 0.0) || !std::isfinite(rho[i]))
        throw NumericalError("element density must be positive and finite (element " + std::to_string(i) + ")");
  }

  const Mesh* mesh_;
  double penal_;
  ElementMatrix ke_;
  std::vector<int> free_index_;
  int nfree_ = 0;
  SparseMatrix K_;
  std::vector<int> slot_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

/// dC/drho_e = -penal rho_e^(penal-1) E0 u_e^T k u_e, k the unit-modulus element matrix.
inline Vector compliance_sensitivity(const Mesh& mesh, const Vector& rho, const Vector& u, double E0,
                                     const ElementMatrix& unit_ke, double penal = 3.0) {
  Vector d(static_cast<Eigen::Index>(mesh.num_elements()));
  Eigen::Matrix<double, 8, 1> ue;
  for (std::size_t ei = 0; ei < mesh.num_elements(); ++ei) {
    const auto dofs = element_dofs(mesh.elements[ei]);
    for (int a = 0; a < 8; ++a) ue[a] = u[dofs[a]];
    const auto i = static_cast<Eigen::Index>(ei);
    d[i] = -penal * std::pow(rho[i], penal - 1.0) * E0 * ue.dot(unit_ke * ue);
  }
  return d;
}

}  // namespace rbto::fem
