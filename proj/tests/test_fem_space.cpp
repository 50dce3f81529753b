// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <random>

#include "stabrom/fem_space.hpp"

using namespace stabrom;

namespace {

// Reference P2 quadratics on the unit triangle (x, y), x + y <= 1, written as
// explicit monomial tables: value = c0 + c1 x + c2 y + c3 x^2 + c4 x y + c5 y^2.
// Local order: vertices (0,0), (1,0), (0,1), then midpoints opposite them.
constexpr std::array<std::array<double, 6>, 6> kP2Coeffs = {{
    {1, -3, -3, 2, 4, 2},    // (1-x-y)(1-2x-2y)
    {0, -1, 0, 2, 0, 0},     // x(2x-1)
    {0, 0, -1, 0, 0, 2},     // y(2y-1)
    {0, 0, 0, 0, 4, 0},      // 4xy          (opposite vertex 0)
    {0, 0, 4, 0, -4, -4},    // 4y(1-x-y)    (opposite vertex 1)
    {0, 4, 0, -4, -4, 0},    // 4x(1-x-y)    (opposite vertex 2)
}};

double ref_value(int i, double x, double y) {
  const auto& c = kP2Coeffs[i];
  return c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
}

Eigen::Vector2d ref_grad(int i, double x, double y) {
  const auto& c = kP2Coeffs[i];
  return {c[1] + 2.0 * c[3] * x + c[4] * y, c[2] + c[4] * x + 2.0 * c[5] * y};
}

}  // namespace

TEST_CASE("dof counts for P1 and P2") {
  CHECK(build_space(build_unit_square_mesh(1), 1).n_dofs_total() == 4);
  CHECK(build_space(build_unit_square_mesh(1), 1).n_interior() == 0);
  CHECK(build_space(build_unit_square_mesh(2), 1).n_dofs_total() == 9);
  CHECK(build_space(build_unit_square_mesh(2), 1).n_interior() == 1);
  const auto p2 = build_space(build_unit_square_mesh(32), 2);
  CHECK(p2.n_dofs_total() == 4225);   // (2*32+1)^2
  CHECK(p2.n_interior() == 3969);     // (2*32-1)^2
}

TEST_CASE("boundary dofs lie on the boundary, interior strictly inside") {
  const auto space = build_space(build_unit_square_mesh(3), 2);
  for (int d = 0; d < space.n_dofs_total(); ++d) {
    const auto& p = space.dof_coords[d];
    const bool on_gamma = p.x() == 0.0 || p.x() == 1.0 || p.y() == 0.0 || p.y() == 1.0;
    const bool interior = space.interior_index[d] >= 0;
    CHECK(on_gamma != interior);
  }
}

TEST_CASE("rejects unsupported degree") {
  CHECK_THROWS_AS(build_space(build_unit_square_mesh(2), 3), std::invalid_argument);
}

TEST_CASE("shared edges reference the same midpoint dof") {
  const auto space = build_space(build_unit_square_mesh(3), 2);
  // map each edge (by endpoint pair) to the midpoint dof seen, expect no conflicts
  std::map<std::pair<int, int>, int> seen;
  for (int t = 0; t < space.mesh.n_triangles(); ++t) {
    const auto& tri = space.mesh.triangles[t];
    const auto& dofs = space.cell_dofs[t];
    for (int le = 0; le < 3; ++le) {
      const auto key = std::minmax(tri[(le + 1) % 3], tri[(le + 2) % 3]);
      const auto [it, inserted] = seen.emplace(key, dofs[3 + le]);
      if (!inserted) CHECK(it->second == dofs[3 + le]);
    }
  }
}

TEST_CASE("P1 shape functions are the Lagrange hat functions") {
  const auto space = build_space(build_unit_square_mesh(2), 1);
  for (int v = 0; v < 3; ++v) {
    Eigen::Vector3d lambda = Eigen::Vector3d::Zero();
    lambda[v] = 1.0;
    const auto sv = eval_shape(space, 0, lambda);
    for (int i = 0; i < 3; ++i) {
      CHECK(sv.value(i) == Catch::Approx(i == v ? 1.0 : 0.0).margin(1e-14));
      CHECK(sv.laplacian(i) == 0.0);
    }
  }
}

TEST_CASE("P2 values and gradients match the symbolic oracle") {
  const auto space = build_space(build_unit_square_mesh(3), 2);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t : {0, 1, 7, 12}) {
    const auto& tri = space.mesh.triangles[t];
    const Eigen::Vector2d p0 = space.mesh.vertices[tri[0]];
    const Eigen::Vector2d p1 = space.mesh.vertices[tri[1]];
    const Eigen::Vector2d p2 = space.mesh.vertices[tri[2]];
    // reference-to-physical Jacobian for the affine map x = p0 + J [xr yr]^T
    Eigen::Matrix2d J;
    J.col(0) = p1 - p0;
    J.col(1) = p2 - p0;
    const Eigen::Matrix2d Jinv_t = J.inverse().transpose();
    for (int trial = 0; trial < 10; ++trial) {
      double xr = unit(rng), yr = unit(rng);
      if (xr + yr > 1.0) {
        xr = 1.0 - xr;
        yr = 1.0 - yr;
      }
      const Eigen::Vector3d lambda(1.0 - xr - yr, xr, yr);
      const auto sv = eval_shape(space, t, lambda);
      for (int i = 0; i < 6; ++i) {
        CHECK(sv.value(i) == Catch::Approx(ref_value(i, xr, yr)).margin(1e-12));
        const Eigen::Vector2d g = Jinv_t * ref_grad(i, xr, yr);
        CHECK((sv.grad.row(i).transpose() - g).norm() < 1e-10);
      }
    }
  }
}

TEST_CASE("partition of unity at quadrature points") {
  for (int degree : {1, 2}) {
    const auto space = build_space(build_unit_square_mesh(4), degree);
    const auto& rule = triangle_quadrature(6);
    for (int t = 0; t < space.mesh.n_triangles(); ++t) {
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto sv = eval_shape(space, t, rule.points[q]);
        double sum = 0.0;
        Eigen::Vector2d gsum = Eigen::Vector2d::Zero();
        for (int i = 0; i < sv.n_local; ++i) {
          sum += sv.value(i);
          gsum += sv.grad.row(i);
        }
        CHECK(sum == Catch::Approx(1.0).margin(1e-13));
        CHECK(gsum.norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("P2 interpolation reproduces a global quadratic") {
  const auto space = build_space(build_unit_square_mesh(4), 2);
  auto poly = [](const Eigen::Vector2d& p) {
    return 1.0 + 2.0 * p.x() - 0.5 * p.y() + 3.0 * p.x() * p.x() - p.x() * p.y() +
           0.25 * p.y() * p.y();
  };
  Vec coeffs(space.n_dofs_total());
  for (int d = 0; d < space.n_dofs_total(); ++d) coeffs(d) = poly(space.dof_coords[d]);

  std::mt19937 rng(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector2d x(unit(rng), unit(rng));
    const auto loc = locate_point(space.mesh, x);
    const auto sv = eval_shape(space, loc.triangle, loc.barycentric);
    double value = 0.0;
    for (int i = 0; i < sv.n_local; ++i) value += sv.value(i) * coeffs(space.cell_dofs[loc.triangle][i]);
    CHECK(value == Catch::Approx(poly(x)).margin(1e-12));
  }
}

TEST_CASE("P2 laplacians are constant per element and exact for quadratics") {
  const auto space = build_space(build_unit_square_mesh(2), 2);
  // laplacian of the interpolant of x^2 + y^2 must be 4 everywhere
  Vec coeffs(space.n_dofs_total());
  for (int d = 0; d < space.n_dofs_total(); ++d) coeffs(d) = space.dof_coords[d].squaredNorm();
  for (int t = 0; t < space.mesh.n_triangles(); ++t) {
    for (const auto& lambda : {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0.2, 0.3, 0.5)}) {
      const auto sv = eval_shape(space, t, lambda);
      double lap = 0.0;
      for (int i = 0; i < 6; ++i) lap += sv.laplacian(i) * coeffs(space.cell_dofs[t][i]);
      CHECK(lap == Catch::Approx(4.0).margin(1e-10));
    }
  }
}

TEST_CASE("quadrature rules are exact to their declared degree") {
  auto exact = [](int p, int q) {
    // integral of x^p y^q over the reference triangle = p! q! / (p+q+2)!
    double num = 1.0;
    for (int i = 2; i <= p; ++i) num *= i;
    for (int i = 2; i <= q; ++i) num *= i;
    double den = 1.0;
    for (int i = 2; i <= p + q + 2; ++i) den *= i;
    return num / den;
  };
  for (int degree : {2, 4, 6}) {
    const auto& rule = triangle_quadrature(degree);
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == Catch::Approx(0.5).margin(1e-14));
    for (int p = 0; p <= degree; ++p) {
      for (int q = 0; p + q <= degree; ++q) {
        double integral = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k) {
          const double x = rule.points[k][1];
          const double y = rule.points[k][2];
          integral += rule.weights[k] * std::pow(x, p) * std::pow(y, q);
        }
        CHECK(integral == Catch::Approx(exact(p, q)).margin(1e-14));
      }
    }
  }
}
