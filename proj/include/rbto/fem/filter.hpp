#pragma once
// Cone density filter: rho_i = sum_e w_ie theta_e / sum_e w_ie with
// w_ie = max(0, r_f - |c_i - c_e|) over active elements.

#include "rbto/error.hpp"
#include "rbto/fem/mesh.hpp"
#include "rbto/types.hpp"

#include <Eigen/SparseCore>

#include <cmath>
#include <vector>

namespace rbto::fem {

class DensityFilter {
 public:
  using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  DensityFilter(const Mesh& mesh, double radius) : radius_(radius) {
    if (!(radius > 0.0)) throw ConfigError("filter radius must be > 0");
    const Eigen::Index ne = static_cast<Eigen::Index>(mesh.num_elements());
    const int reach = static_cast<int>(std::ceil(radius / mesh.h));
    std::vector<Eigen::Triplet<double>> trip;
    for (Eigen::Index i = 0; i < ne; ++i) {
      const Element& ei = mesh.elements[static_cast<std::size_t>(i)];
      const std::size_t row_begin = trip.size();
      double sum = 0.0;
      for (int dy = -reach; dy <= reach; ++dy)
        for (int dx = -reach; dx <= reach; ++dx) {
          const int gx = ei.gx + dx;
          const int gy = ei.gy + dy;
          if (gx < 0 || gy < 0 || gx >= mesh.nelx || gy >= mesh.nely) continue;
          const int e = mesh.cell_element[static_cast<std::size_t>(gy) * mesh.nelx + gx];
          if (e < 0) continue;
          const double w = radius - mesh.h * std::sqrt(static_cast<double>(dx * dx + dy * dy));
          if (w <= 0.0) continue;
          trip.emplace_back(i, e, w);
          sum += w;
        }
      for (std::size_t t = row_begin; t < trip.size(); ++t)
        trip[t] = Eigen::Triplet<double>(trip[t].row(), trip[t].col(), trip[t].value() / sum);
    }
    W_.resize(ne, ne);
    W_.setFromTriplets(trip.begin(), trip.end());
    Wt_ = W_.transpose();
  }

  double radius() const { return radius_; }
  const Matrix& matrix() const { return W_; }

  Vector forward(const Vector& theta) const { return W_ * theta; }
  Vector backward(const Vector& d_rho) const { return Wt_ * d_rho; }

 private:
  double radius_;
  Matrix W_;
  Matrix Wt_;
};

}  // namespace rbto::fem
