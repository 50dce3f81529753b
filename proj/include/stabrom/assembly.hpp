// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stabrom/fem_space.hpp"
#include "stabrom/types.hpp"

namespace stabrom {

using ScalarField = std::function<double(const Eigen::Vector2d&)>;

/// Transient convection-diffusion-reaction problem on the unit square with
/// homogeneous Dirichlet conditions.
struct CDRProblem {
  double epsilon = 1.0;
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  double sigma = 0.0;
  ScalarField forcing;  // null means zero
  double T = 1.0;
  ScalarField u0;  // null means zero

  void validate() const {
    if (epsilon <= 0.0) throw std::invalid_argument("CDRProblem: epsilon must be positive");
    if (sigma < 0.0) throw std::invalid_argument("CDRProblem: sigma must be nonnegative");
    if (T <= 0.0) throw std::invalid_argument("CDRProblem: final time must be positive");
  }
};

enum class StabilizationKind { None, SUPG, GLS_DS, ADJ_DS, GLS_ST, ADJ_ST };

inline bool is_ds_kind(StabilizationKind k) {
  return k == StabilizationKind::GLS_DS || k == StabilizationKind::ADJ_DS;
}

inline std::string stabilization_name(StabilizationKind k) {
  switch (k) {
    case StabilizationKind::None: return "none";
    case StabilizationKind::SUPG: return "supg";
    case StabilizationKind::GLS_DS: return "gls_ds";
    case StabilizationKind::ADJ_DS: return "adj_ds";
    case StabilizationKind::GLS_ST: return "gls_st";
    case StabilizationKind::ADJ_ST: return "adj_st";
  }
  return "?";
}

/// Element-wise stabilization blocks. Q_op holds the L-part of the right
/// slot; the full stabilization matrix adds the transient part M_S/dt. For
/// SUPG and the space-time kinds the test operator is independent of dt, so
/// only the recombination changes with the time step; the DS kinds embed dt
/// in the test operator and must be reassembled when it changes.
struct StabilizationOps {
  StabilizationKind kind = StabilizationKind::None;
  double tau = 0.0;
  double dt = 0.0;
  SpMat Q_op;  // sum_K (Q v_i, tau L v_j)_K
  SpMat M_S;   // sum_K (Q v_i, tau v_j)_K
  Vec f_S;     // sum_K (Q v_i, tau f)_K

  SpMat full_Q(double run_dt) const {
    if (is_ds_kind(kind) && run_dt != dt) {
      throw std::runtime_error("StabilizationOps: DS kinds must be assembled at the run time step");
    }
    return SpMat(Q_op + M_S * (1.0 / run_dt));
  }
};

/// Sparse operators of the (possibly stabilized) FOM ordinary difference
/// equation, restricted to interior dofs.
struct AssembledOperators {
  SpMat M;  // mass
  SpMat D;  // diffusion (grad-grad)
  SpMat A;  // convection
  SpMat B;  // A + epsilon*D + sigma*M
  Vec f;
  std::optional<StabilizationOps> stab;

  bool stabilized() const { return stab.has_value(); }
  StabilizationKind kind() const { return stab ? stab->kind : StabilizationKind::None; }
  double tau() const { return stab ? stab->tau : 0.0; }

  /// B + Q at the given time step.
  SpMat dynamics(double run_dt) const {
    if (!stab) return B;
    return SpMat(B + stab->full_Q(run_dt));
  }
  /// M + M_S, the coefficient of the previous state (before the 1/dt factor).
  SpMat lag_mass() const {
    if (!stab) return M;
    return SpMat(M + stab->M_S);
  }
  Vec load() const {
    if (!stab) return f;
    return f + stab->f_S;
  }
};

/// Cholesky factorization of an SPD sparse matrix, shareable read-only.
class SpdSolver {
 public:
  explicit SpdSolver(const SpMat& A) {
    ldlt_.compute(A);
    if (ldlt_.info() != Eigen::Success) {
      throw std::runtime_error("SpdSolver: factorization failed");
    }
  }
  Vec solve(const Vec& rhs) const { return ldlt_.solve(rhs); }
  Mat solve(const Mat& rhs) const { return ldlt_.solve(rhs); }

 private:
  Eigen::SimplicialLDLT<SpMat> ldlt_;
};

namespace detail {

/// All-dof Galerkin matrices, used by the restriction step and by tests that
/// check partition-of-unity identities before boundary elimination.
struct GalerkinFull {
  SpMat M, D, A;
  Vec f;
};

inline GalerkinFull assemble_galerkin_full(const FunctionSpace& space, const CDRProblem& problem) {
  problem.validate();
  const auto& mesh = space.mesh;
  const QuadratureRule& rule = triangle_quadrature(4);
  const int nl = space.n_local_dofs();
  const int nd = space.n_dofs_total();

  std::vector<Triplet> tm, td, ta;
  tm.reserve(static_cast<std::size_t>(mesh.n_triangles() * nl * nl));
  td.reserve(tm.capacity());
  ta.reserve(tm.capacity());
  Vec f = Vec::Zero(nd);

  Eigen::Matrix<double, 6, 6> m_loc, d_loc, a_loc;
  Eigen::Matrix<double, 6, 1> f_loc;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    m_loc.setZero();
    d_loc.setZero();
    a_loc.setZero();
    f_loc.setZero();
    const double jac = 2.0 * mesh.signed_area(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const ShapeValues sv = eval_shape(space, t, rule.points[q]);
      const double w = rule.weights[q] * jac;
      const Eigen::Vector2d x = mesh.point_from_barycentric(t, rule.points[q]);
      const double fx = problem.forcing ? problem.forcing(x) : 0.0;
      for (int i = 0; i < nl; ++i) {
        f_loc(i) += w * sv.value(i) * fx;
        for (int j = 0; j < nl; ++j) {
          m_loc(i, j) += w * sv.value(i) * sv.value(j);
          d_loc(i, j) += w * sv.grad.row(i).dot(sv.grad.row(j));
          a_loc(i, j) += w * sv.value(i) * problem.b.dot(sv.grad.row(j));
        }
      }
    }
    const auto& dofs = space.cell_dofs[static_cast<std::size_t>(t)];
    for (int i = 0; i < nl; ++i) {
      f(dofs[static_cast<std::size_t>(i)]) += f_loc(i);
      for (int j = 0; j < nl; ++j) {
        tm.emplace_back(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)], m_loc(i, j));
        td.emplace_back(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)], d_loc(i, j));
        ta.emplace_back(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)], a_loc(i, j));
      }
    }
  }

  GalerkinFull out;
  out.M.resize(nd, nd);
  out.D.resize(nd, nd);
  out.A.resize(nd, nd);
  out.M.setFromTriplets(tm.begin(), tm.end());
  out.D.setFromTriplets(td.begin(), td.end());
  out.A.setFromTriplets(ta.begin(), ta.end());
  out.f = f;
  return out;
}

inline SpMat restrict_interior(const FunctionSpace& space, const SpMat& full) {
  const int ni = space.n_interior();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<std::size_t>(full.nonZeros()));
  for (int col = 0; col < full.outerSize(); ++col) {
    const int jc = space.interior_index[static_cast<std::size_t>(col)];
    if (jc < 0) continue;
    for (SpMat::InnerIterator it(full, col); it; ++it) {
      const int ir = space.interior_index[static_cast<std::size_t>(it.row())];
      if (ir >= 0) trip.emplace_back(ir, jc, it.value());
    }
  }
  SpMat out(ni, ni);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

inline Vec restrict_interior(const FunctionSpace& space, const Vec& full) {
  Vec out(space.n_interior());
  for (int k = 0; k < space.n_interior(); ++k) {
    out(k) = full(space.interior_dofs[static_cast<std::size_t>(k)]);
  }
  return out;
}

}  // namespace detail

inline AssembledOperators assemble_galerkin(const FunctionSpace& space, const CDRProblem& problem) {
  const detail::GalerkinFull full = detail::assemble_galerkin_full(space, problem);
  AssembledOperators ops;
  ops.M = detail::restrict_interior(space, full.M);
  ops.D = detail::restrict_interior(space, full.D);
  ops.A = detail::restrict_interior(space, full.A);
  ops.B = ops.A + problem.epsilon * ops.D + problem.sigma * ops.M;
  ops.f = detail::restrict_interior(space, full.f);
  return ops;
}

inline StabilizationOps assemble_stabilization(const FunctionSpace& space,
                                               const CDRProblem& problem, StabilizationKind kind,
                                               double tau, double dt) {
  problem.validate();
  if (kind == StabilizationKind::None) {
    throw std::invalid_argument("assemble_stabilization: kind must not be None");
  }
  if (tau < 0.0) throw std::invalid_argument("assemble_stabilization: tau must be >= 0");
  if (dt <= 0.0) throw std::invalid_argument("assemble_stabilization: dt must be positive");

  const auto& mesh = space.mesh;
  const QuadratureRule& rule = triangle_quadrature(6);
  const int nl = space.n_local_dofs();
  const int nd = space.n_dofs_total();
  const double eps = problem.epsilon;
  const double sigma = problem.sigma;

  std::vector<Triplet> tq, tms;
  tq.reserve(static_cast<std::size_t>(mesh.n_triangles() * nl * nl));
  tms.reserve(tq.capacity());
  Vec fs = Vec::Zero(nd);

  Eigen::Matrix<double, 6, 1> Lv, test;
  Eigen::Matrix<double, 6, 6> q_loc, ms_loc;
  Eigen::Matrix<double, 6, 1> fs_loc;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    q_loc.setZero();
    ms_loc.setZero();
    fs_loc.setZero();
    const double jac = 2.0 * mesh.signed_area(t);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const ShapeValues sv = eval_shape(space, t, rule.points[q]);
      const double w = rule.weights[q] * jac;
      const Eigen::Vector2d x = mesh.point_from_barycentric(t, rule.points[q]);
      const double fx = problem.forcing ? problem.forcing(x) : 0.0;
      for (int i = 0; i < nl; ++i) {
        const double conv = problem.b.dot(sv.grad.row(i));
        Lv(i) = -eps * sv.laplacian(i) + conv + sigma * sv.value(i);
        const double Ladj = -eps * sv.laplacian(i) - conv + sigma * sv.value(i);
        switch (kind) {
          case StabilizationKind::SUPG: test(i) = conv; break;
          case StabilizationKind::GLS_DS: test(i) = sv.value(i) / dt + Lv(i); break;
          case StabilizationKind::ADJ_DS: test(i) = -sv.value(i) / dt - Ladj; break;
          case StabilizationKind::GLS_ST: test(i) = Lv(i); break;
          case StabilizationKind::ADJ_ST: test(i) = -Ladj; break;
          case StabilizationKind::None: break;
        }
      }
      for (int i = 0; i < nl; ++i) {
        const double wt = w * tau * test(i);
        fs_loc(i) += wt * fx;
        for (int j = 0; j < nl; ++j) {
          q_loc(i, j) += wt * Lv(j);
          ms_loc(i, j) += wt * sv.value(j);
        }
      }
    }
    const auto& dofs = space.cell_dofs[static_cast<std::size_t>(t)];
    for (int i = 0; i < nl; ++i) {
      fs(dofs[static_cast<std::size_t>(i)]) += fs_loc(i);
      for (int j = 0; j < nl; ++j) {
        tq.emplace_back(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)], q_loc(i, j));
        tms.emplace_back(dofs[static_cast<std::size_t>(i)], dofs[static_cast<std::size_t>(j)], ms_loc(i, j));
      }
    }
  }

  SpMat q_full(nd, nd), ms_full(nd, nd);
  q_full.setFromTriplets(tq.begin(), tq.end());
  ms_full.setFromTriplets(tms.begin(), tms.end());

  StabilizationOps out;
  out.kind = kind;
  out.tau = tau;
  out.dt = dt;
  out.Q_op = detail::restrict_interior(space, q_full);
  out.M_S = detail::restrict_interior(space, ms_full);
  out.f_S = detail::restrict_interior(space, fs);
  return out;
}

inline AssembledOperators assemble_stabilized(const FunctionSpace& space,
                                              const CDRProblem& problem, StabilizationKind kind,
                                              double tau, double dt) {
  AssembledOperators ops = assemble_galerkin(space, problem);
  if (kind != StabilizationKind::None) {
    ops.stab = assemble_stabilization(space, problem, kind, tau, dt);
  }
  return ops;
}

/// Grid Peclet number ||b|| h / epsilon with the h = 1/(n p) convention.
inline double grid_peclet(double b_norm, double h, double epsilon) {
  if (h <= 0.0) throw std::invalid_argument("grid_peclet: h must be positive");
  if (epsilon <= 0.0) throw std::invalid_argument("grid_peclet: epsilon must be positive");
  return b_norm * h / epsilon;
}

}  // namespace stabrom
