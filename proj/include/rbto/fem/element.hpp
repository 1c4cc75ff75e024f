#pragma once

#include <Eigen/Core>

#include <cmath>

namespace rbto::fem {

using ElementMatrix = Eigen::Matrix<double, 8, 8>;

/// Bilinear quad, plane stress, unit thickness, square side h, 2x2 Gauss.
/// DOFs are (u_x, u_y) per node, nodes counterclockwise from bottom-left.
inline ElementMatrix element_stiffness(double E, double nu = 0.3, double h = 1.0) {
  Eigen::Matrix3d D;
  D << 1.0, nu, 0.0, nu, 1.0, 0.0, 0.0, 0.0, 0.5 * (1.0 - nu);
  D *= E / (1.0 - nu * nu);

  const double xi_n[4] = {-1.0, 1.0, 1.0, -1.0};
  const double eta_n[4] = {-1.0, -1.0, 1.0, 1.0};
  const double gp = 1.0 / std::sqrt(3.0);
  const double jac = h / 2.0;  // dx/dxi for a square element

  ElementMatrix K = ElementMatrix::Zero();
  for (double xi : {-gp, gp})
    for (double eta : {-gp, gp}) {
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        const double dndx = 0.25 * xi_n[a] * (1.0 + eta_n[a] * eta) / jac;
        const double dndy = 0.25 * eta_n[a] * (1.0 + xi_n[a] * xi) / jac;
        B(0, 2 * a) = dndx;
        B(1, 2 * a + 1) = dndy;
        B(2, 2 * a) = dndy;
        B(2, 2 * a + 1) = dndx;
      }
      K += B.transpose() * D * B * (jac * jac);
    }
  return K;
}

}  // namespace rbto::fem
