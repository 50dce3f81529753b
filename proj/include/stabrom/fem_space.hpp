// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stabrom/mesh.hpp"
#include "stabrom/quadrature.hpp"
#include "stabrom/types.hpp"

namespace stabrom {

/// Continuous Lagrange P1/P2 space on a structured triangulation with
/// homogeneous Dirichlet boundary treatment. Vertex dofs are numbered first
/// (row-major, following the mesh), then edge-midpoint dofs in order of first
/// appearance over the cell-major triangle sweep. Local dofs are the three
/// vertices followed by the midpoints of the edges opposite them.
struct FunctionSpace {
  StructuredTriMesh mesh;
  int degree = 1;
  std::vector<Eigen::Vector2d> dof_coords;
  std::vector<std::array<int, 6>> cell_dofs;  // first n_local_dofs entries used
  std::vector<int> interior_dofs;             // ascending global indices
  std::vector<int> interior_index;            // global -> interior position, -1 on boundary

  int n_local_dofs() const { return degree == 1 ? 3 : 6; }
  int n_dofs_total() const { return static_cast<int>(dof_coords.size()); }
  int n_interior() const { return static_cast<int>(interior_dofs.size()); }
};

inline FunctionSpace build_space(StructuredTriMesh mesh, int degree) {
  if (degree != 1 && degree != 2) {
    throw std::invalid_argument("build_space: degree must be 1 or 2");
  }
  FunctionSpace space;
  space.degree = degree;
  space.mesh = std::move(mesh);
  const auto& m = space.mesh;

  space.dof_coords.assign(m.vertices.begin(), m.vertices.end());
  space.cell_dofs.resize(static_cast<std::size_t>(m.n_triangles()));
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& tri = m.triangles[static_cast<std::size_t>(t)];
    space.cell_dofs[static_cast<std::size_t>(t)] = {tri[0], tri[1], tri[2], -1, -1, -1};
  }

  if (degree == 2) {
    std::map<std::pair<int, int>, int> edge_dof;
    for (int t = 0; t < m.n_triangles(); ++t) {
      const auto& tri = m.triangles[static_cast<std::size_t>(t)];
      for (int le = 0; le < 3; ++le) {
        // local edge le is opposite local vertex le
        const int a = tri[(le + 1) % 3];
        const int b = tri[(le + 2) % 3];
        const auto key = std::minmax(a, b);
        auto it = edge_dof.find(key);
        int dof;
        if (it == edge_dof.end()) {
          dof = static_cast<int>(space.dof_coords.size());
          edge_dof.emplace(key, dof);
          space.dof_coords.push_back(
              0.5 * (m.vertices[static_cast<std::size_t>(a)] +
                     m.vertices[static_cast<std::size_t>(b)]));
        } else {
          dof = it->second;
        }
        space.cell_dofs[static_cast<std::size_t>(t)][static_cast<std::size_t>(3 + le)] = dof;
      }
    }
  }

  space.interior_index.assign(space.dof_coords.size(), -1);
  constexpr double kBoundaryTol = 1e-12;
  for (int d = 0; d < space.n_dofs_total(); ++d) {
    const auto& p = space.dof_coords[static_cast<std::size_t>(d)];
    const bool on_boundary = p.x() < kBoundaryTol || p.x() > 1.0 - kBoundaryTol ||
                             p.y() < kBoundaryTol || p.y() > 1.0 - kBoundaryTol;
    if (!on_boundary) {
      space.interior_index[static_cast<std::size_t>(d)] = static_cast<int>(space.interior_dofs.size());
      space.interior_dofs.push_back(d);
    }
  }
  return space;
}

/// Lagrange basis data at one barycentric point of one triangle, mapped to
/// physical coordinates. Laplacians are exact (zero for P1, constant per
/// element for P2).
struct ShapeValues {
  int n_local = 0;
  Eigen::Matrix<double, 6, 1> value;
  Eigen::Matrix<double, 6, 2> grad;
  Eigen::Matrix<double, 6, 1> laplacian;
};

inline ShapeValues eval_shape(const FunctionSpace& space, int triangle,
                              const Eigen::Vector3d& lambda) {
  const auto& m = space.mesh;
  const auto& tri = m.triangles[static_cast<std::size_t>(triangle)];
  const Eigen::Vector2d& p0 = m.vertices[static_cast<std::size_t>(tri[0])];
  const Eigen::Vector2d& p1 = m.vertices[static_cast<std::size_t>(tri[1])];
  const Eigen::Vector2d& p2 = m.vertices[static_cast<std::size_t>(tri[2])];
  const double two_area = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                          (p2.x() - p0.x()) * (p1.y() - p0.y());

  // constant barycentric gradients of the affine cell map
  Eigen::Matrix<double, 3, 2> dl;
  dl.row(0) = Eigen::RowVector2d(p1.y() - p2.y(), p2.x() - p1.x()) / two_area;
  dl.row(1) = Eigen::RowVector2d(p2.y() - p0.y(), p0.x() - p2.x()) / two_area;
  dl.row(2) = Eigen::RowVector2d(p0.y() - p1.y(), p1.x() - p0.x()) / two_area;

  ShapeValues out;
  out.value.setZero();
  out.grad.setZero();
  out.laplacian.setZero();
  if (space.degree == 1) {
    out.n_local = 3;
    for (int i = 0; i < 3; ++i) {
      out.value(i) = lambda(i);
      out.grad.row(i) = dl.row(i);
    }
    return out;
  }

  out.n_local = 6;
  for (int i = 0; i < 3; ++i) {
    out.value(i) = lambda(i) * (2.0 * lambda(i) - 1.0);
    out.grad.row(i) = (4.0 * lambda(i) - 1.0) * dl.row(i);
    out.laplacian(i) = 4.0 * dl.row(i).dot(dl.row(i));
  }
  for (int le = 0; le < 3; ++le) {
    const int j = (le + 1) % 3;
    const int k = (le + 2) % 3;
    out.value(3 + le) = 4.0 * lambda(j) * lambda(k);
    out.grad.row(3 + le) = 4.0 * (lambda(j) * dl.row(k) + lambda(k) * dl.row(j));
    out.laplacian(3 + le) = 8.0 * dl.row(j).dot(dl.row(k));
  }
  return out;
}

/// Evaluate a coefficient vector over interior dofs at a physical point.
inline double eval_interior_function(const FunctionSpace& space, const Vec& interior_coeffs,
                                     const Eigen::Vector2d& x) {
  const PointLocation loc = locate_point(space.mesh, x);
  const ShapeValues sv = eval_shape(space, loc.triangle, loc.barycentric);
  const auto& dofs = space.cell_dofs[static_cast<std::size_t>(loc.triangle)];
  double value = 0.0;
  for (int i = 0; i < sv.n_local; ++i) {
    const int gi = space.interior_index[static_cast<std::size_t>(dofs[static_cast<std::size_t>(i)])];
    if (gi >= 0) value += sv.value(i) * interior_coeffs(gi);
  }
  return value;
}

}  // namespace stabrom
