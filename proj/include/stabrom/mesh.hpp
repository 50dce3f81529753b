// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "stabrom/types.hpp"

namespace stabrom {

/// Uniform triangulation of the unit square. Each square cell is split by the
/// diagonal running from its bottom-left to its top-right corner. Vertices are
/// numbered row-major over the grid; triangles cell-major with the triangle
/// below the diagonal preceding the one above it.
struct StructuredTriMesh {
  int n_per_side = 0;
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 3>> triangles;  // counterclockwise
  std::vector<std::uint8_t> boundary_vertex_flags;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }

  double signed_area(int t) const {
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    const Eigen::Vector2d& a = vertices[static_cast<std::size_t>(tri[0])];
    const Eigen::Vector2d& b = vertices[static_cast<std::size_t>(tri[1])];
    const Eigen::Vector2d& c = vertices[static_cast<std::size_t>(tri[2])];
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  }

  Eigen::Vector2d point_from_barycentric(int t, const Eigen::Vector3d& lambda) const {
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    return lambda[0] * vertices[static_cast<std::size_t>(tri[0])] +
           lambda[1] * vertices[static_cast<std::size_t>(tri[1])] +
           lambda[2] * vertices[static_cast<std::size_t>(tri[2])];
  }
};

inline StructuredTriMesh build_unit_square_mesh(int n_per_side) {
  if (n_per_side < 1) {
    throw std::invalid_argument("build_unit_square_mesh: n_per_side must be >= 1");
  }
  const int n = n_per_side;
  StructuredTriMesh mesh;
  mesh.n_per_side = n;
  mesh.vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  mesh.boundary_vertex_flags.assign(static_cast<std::size_t>((n + 1) * (n + 1)), 0);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      mesh.vertices.emplace_back(static_cast<double>(i) / n, static_cast<double>(j) / n);
      if (i == 0 || i == n || j == 0 || j == n) {
        mesh.boundary_vertex_flags[static_cast<std::size_t>(j * (n + 1) + i)] = 1;
      }
    }
  }
  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  mesh.triangles.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j);
      const int v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1);
      const int v11 = vid(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});  // below the diagonal
      mesh.triangles.push_back({v00, v11, v01});  // above the diagonal
    }
  }
  return mesh;
}

struct PointLocation {
  int triangle = -1;
  Eigen::Vector3d barycentric = Eigen::Vector3d::Zero();
};

/// Constant-time lookup of the triangle containing x. Points on a shared
/// edge or on the cell diagonal are assigned to the triangle with the lower
/// index (left/bottom cell, lower triangle).
inline PointLocation locate_point(const StructuredTriMesh& mesh, const Eigen::Vector2d& x) {
  if (x.x() < 0.0 || x.x() > 1.0 || x.y() < 0.0 || x.y() > 1.0) {
    throw std::invalid_argument("locate_point: point outside the unit square");
  }
  const int n = mesh.n_per_side;
  auto cell_index = [n](double coord) {
    const double s = coord * n;
    int i = static_cast<int>(std::floor(s));
    if (static_cast<double>(i) == s && i > 0) --i;  // grid-line tie: lower cell
    if (i > n - 1) i = n - 1;
    return i;
  };
  const int ix = cell_index(x.x());
  const int iy = cell_index(x.y());
  const double lx = x.x() * n - ix;
  const double ly = x.y() * n - iy;

  PointLocation loc;
  const int cell = iy * n + ix;
  if (ly <= lx) {  // diagonal tie: lower triangle
    loc.triangle = 2 * cell;
    loc.barycentric = Eigen::Vector3d(1.0 - lx, lx - ly, ly);
  } else {
    loc.triangle = 2 * cell + 1;
    loc.barycentric = Eigen::Vector3d(1.0 - ly, lx, ly - lx);
  }
  return loc;
}

}  // namespace stabrom
