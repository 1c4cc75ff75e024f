#pragma once
// Structured quad meshes on a unit-spaced grid (y up), with supports and a
// unit load template.

#include "rbto/error.hpp"
#include "rbto/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace rbto::fem {

struct Element {
  /// Counterclockwise from the bottom-left node.
  std::array<int, 4> nodes;
  int gx;
  int gy;
};

struct Mesh {
  /// Bounding grid in elements.
  int nelx = 0;
  int nely = 0;
  double h = 1.0;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<Element> elements;
  /// Grid cell (gx, gy) -> element index, -1 for voids. Index gy * nelx + gx.
  std::vector<int> cell_element;
  std::vector<int> fixed_dofs;
  /// Nodal force for a unit load multiplier.
  Vector load;

  std::size_t num_nodes() const { return x.size(); }
  std::size_t num_elements() const { return elements.size(); }
  std::size_t num_dofs() const { return 2 * x.size(); }
};

namespace detail {

// Adds the nodes and elements of every grid cell for which active(gx, gy) holds.
template <class Active>
Mesh build_grid(int nelx, int nely, Active&& active, std::vector<int>& grid_node) {
  Mesh m;
  m.nelx = nelx;
  m.nely = nely;
  m.cell_element.assign(static_cast<std::size_t>(nelx) * nely, -1);
  grid_node.assign(static_cast<std::size_t>(nelx + 1) * (nely + 1), -1);
  auto gid = [&](int i, int j) { return static_cast<std::size_t>(j) * (nelx + 1) + i; };
  for (int gy = 0; gy < nely; ++gy)
    for (int gx = 0; gx < nelx; ++gx)
      if (active(gx, gy))
        for (int dj = 0; dj <= 1; ++dj)
          for (int di = 0; di <= 1; ++di) grid_node[gid(gx + di, gy + dj)] = 0;
  for (int j = 0; j <= nely; ++j)
    for (int i = 0; i <= nelx; ++i)
      if (grid_node[gid(i, j)] == 0) {
        grid_node[gid(i, j)] = static_cast<int>(m.x.size());
        m.x.push_back(i);
        m.y.push_back(j);
      }
  for (int gy = 0; gy < nely; ++gy)
    for (int gx = 0; gx < nelx; ++gx)
      if (active(gx, gy)) {
        m.cell_element[static_cast<std::size_t>(gy) * nelx + gx] = static_cast<int>(m.elements.size());
        m.elements.push_back({{grid_node[gid(gx, gy)], grid_node[gid(gx + 1, gy)], grid_node[gid(gx + 1, gy + 1)],
                               grid_node[gid(gx, gy + 1)]},
                              gx,
                              gy});
      }
  m.load = Vector::Zero(static_cast<Eigen::Index>(m.num_dofs()));
  return m;
}

inline void finalize(Mesh& m) {
  std::sort(m.fixed_dofs.begin(), m.fixed_dofs.end());
  m.fixed_dofs.erase(std::unique(m.fixed_dofs.begin(), m.fixed_dofs.end()), m.fixed_dofs.end());
  if (m.fixed_dofs.empty()) throw ConfigError("mesh has no constrained degrees of freedom");
}

}  // namespace detail

/// Half of a simply supported beam: symmetry rollers (x fixed) along the left
/// edge, a vertical roller at the bottom-right node, and a unit downward load
/// at the top-left node.
inline Mesh build_rect_mesh(int nx = 120, int ny = 40) {
  if (nx < 1 || ny < 1) throw ConfigError("rect mesh needs nx, ny >= 1");
  std::vector<int> gn;
  Mesh m = detail::build_grid(nx, ny, [](int, int) { return true; }, gn);
  auto node = [&](int i, int j) { return gn[static_cast<std::size_t>(j) * (nx + 1) + i]; };
  for (int j = 0; j <= ny; ++j) m.fixed_dofs.push_back(2 * node(0, j));
  m.fixed_dofs.push_back(2 * node(nx, 0) + 1);
  m.load[2 * node(0, ny) + 1] = -1.0;
  detail::finalize(m);
  return m;
}

/// n x n square minus its top-right (2n/3) x (2n/3) block. The top edge of the
/// vertical leg is clamped; a unit downward load acts at mid-height of the
/// horizontal leg's right face, split between two nodes when n/6 is fractional.
inline Mesh build_lshape_mesh(int n = 72) {
  if (n < 3 || n % 3 != 0) throw ConfigError("lshape mesh needs n >= 3 divisible by 3, got " + std::to_string(n));
  const int leg = n / 3;
  std::vector<int> gn;
  Mesh m = detail::build_grid(n, n, [leg](int gx, int gy) { return gx < leg || gy < leg; }, gn);
  auto node = [&](int i, int j) { return gn[static_cast<std::size_t>(j) * (n + 1) + i]; };
  for (int i = 0; i <= leg; ++i) {
    m.fixed_dofs.push_back(2 * node(i, n));
    m.fixed_dofs.push_back(2 * node(i, n) + 1);
  }
  const double mid = leg / 2.0;
  const int lo = static_cast<int>(std::floor(mid));
  const int hi = static_cast<int>(std::ceil(mid));
  if (lo == hi) {
    m.load[2 * node(n, lo) + 1] = -1.0;
  } else {
    m.load[2 * node(n, lo) + 1] = -0.5;
    m.load[2 * node(n, hi) + 1] = -0.5;
  }
  detail::finalize(m);
  return m;
}

}  // namespace rbto::fem
