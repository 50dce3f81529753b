// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <stdexcept>

#include "stabrom/assembly.hpp"
#include "stabrom/types.hpp"

namespace stabrom {

/// States of a time march, one column per time instance on the uniform grid
/// t^n = n*dt. Columns are coefficient vectors over interior dofs (or reduced
/// coordinates, for ROM trajectories).
struct Trajectory {
  double dt = 0.0;
  Mat states;  // N x (n_steps + 1)

  int n_steps() const { return static_cast<int>(states.cols()) - 1; }
};

/// Implicit-Euler march of the (possibly stabilized) OdE system. The system
/// matrix is factorized once and reused for every step; each state is handed
/// to `sink` as it is produced.
inline void solve_fom_stream(const AssembledOperators& ops, double dt, int n_steps, const Vec& a0,
                             const std::function<void(int, const Vec&)>& sink) {
  if (dt <= 0.0) throw std::invalid_argument("solve_fom: dt must be positive");
  if (n_steps < 0) throw std::invalid_argument("solve_fom: n_steps must be >= 0");
  if (ops.stab && is_ds_kind(ops.stab->kind) && ops.stab->dt != dt) {
    throw std::runtime_error("solve_fom: DS stabilization was assembled for a different time step");
  }

  SpMat system = ops.M * (1.0 / dt) + ops.dynamics(dt);
  system.makeCompressed();
  Eigen::SparseLU<SpMat> lu;
  lu.compute(system);
  if (lu.info() != Eigen::Success) {
    throw std::runtime_error("solve_fom: singular system matrix");
  }

  const SpMat lag = ops.lag_mass();
  const Vec load = ops.load();

  Vec a = a0;
  sink(0, a);
  for (int n = 1; n <= n_steps; ++n) {
    const Vec rhs = load + lag * (a / dt);
    a = lu.solve(rhs);
    sink(n, a);
  }
}

inline Trajectory solve_fom(const AssembledOperators& ops, double dt, int n_steps, const Vec& a0) {
  Trajectory traj;
  traj.dt = dt;
  traj.states.resize(a0.size(), n_steps + 1);
  solve_fom_stream(ops, dt, n_steps, a0,
                   [&traj](int n, const Vec& a) { traj.states.col(n) = a; });
  return traj;
}

/// L2 projection of u0 onto the interior of the space: M a = (v_i, u0).
inline Vec project_initial_condition(const FunctionSpace& space, const ScalarField& u0) {
  const int ni = space.n_interior();
  if (!u0) return Vec::Zero(ni);

  const auto& mesh = space.mesh;
  const QuadratureRule& rule = triangle_quadrature(6);
  const int nl = space.n_local_dofs();
  Vec rhs_full = Vec::Zero(space.n_dofs_total());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double jac = 2.0 * mesh.signed_area(t);
    const auto& dofs = space.cell_dofs[static_cast<std::size_t>(t)];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const ShapeValues sv = eval_shape(space, t, rule.points[q]);
      const double w = rule.weights[q] * jac;
      const double u0x = u0(mesh.point_from_barycentric(t, rule.points[q]));
      for (int i = 0; i < nl; ++i) {
        rhs_full(dofs[static_cast<std::size_t>(i)]) += w * sv.value(i) * u0x;
      }
    }
  }

  CDRProblem unit;  // only the Galerkin mass block is needed
  unit.epsilon = 1.0;
  const AssembledOperators ops = assemble_galerkin(space, unit);
  return SpdSolver(ops.M).solve(detail::restrict_interior(space, rhs_full));
}

/// Mixed mass matrix T_ij = integral of v_i^coarse * v_j^fine over the fine
/// mesh, restricted to interior dofs on both sides. The right-hand side of
/// the coarse L2 projection of a fine function is T * a_fine.
inline SpMat build_restriction_rhs_matrix(const FunctionSpace& fine, const FunctionSpace& coarse) {
  if (fine.mesh.n_per_side % coarse.mesh.n_per_side != 0) {
    throw std::invalid_argument("restriction requires nested meshes (fine n a multiple of coarse n)");
  }
  const auto& fmesh = fine.mesh;
  const QuadratureRule& rule = triangle_quadrature(6);
  const int nlf = fine.n_local_dofs();
  const int nlc = coarse.n_local_dofs();

  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(fmesh.n_triangles() * nlf * nlc));
  for (int t = 0; t < fmesh.n_triangles(); ++t) {
    const double jac = 2.0 * fmesh.signed_area(t);
    const auto& fdofs = fine.cell_dofs[static_cast<std::size_t>(t)];
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const ShapeValues fsv = eval_shape(fine, t, rule.points[q]);
      const double w = rule.weights[q] * jac;
      const Eigen::Vector2d x = fmesh.point_from_barycentric(t, rule.points[q]);
      const PointLocation loc = locate_point(coarse.mesh, x);
      const ShapeValues csv = eval_shape(coarse, loc.triangle, loc.barycentric);
      const auto& cdofs = coarse.cell_dofs[static_cast<std::size_t>(loc.triangle)];
      for (int ci = 0; ci < nlc; ++ci) {
        const int cg = coarse.interior_index[static_cast<std::size_t>(cdofs[static_cast<std::size_t>(ci)])];
        if (cg < 0) continue;
        for (int fj = 0; fj < nlf; ++fj) {
          const int fg = fine.interior_index[static_cast<std::size_t>(fdofs[static_cast<std::size_t>(fj)])];
          if (fg < 0) continue;
          trip.emplace_back(cg, fg, w * csv.value(ci) * fsv.value(fj));
        }
      }
    }
  }
  SpMat T(coarse.n_interior(), fine.n_interior());
  T.setFromTriplets(trip.begin(), trip.end());
  return T;
}

/// L2 projection of a fine-space function onto a nested coarse space.
inline Vec restrict_to_coarse(const FunctionSpace& fine, const Vec& fine_coeffs,
                              const FunctionSpace& coarse) {
  const SpMat T = build_restriction_rhs_matrix(fine, coarse);
  CDRProblem unit;
  unit.epsilon = 1.0;
  const AssembledOperators ops = assemble_galerkin(coarse, unit);
  return SpdSolver(ops.M).solve(Vec(T * fine_coeffs));
}

}  // namespace stabrom
