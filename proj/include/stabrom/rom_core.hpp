// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "stabrom/assembly.hpp"
#include "stabrom/fom_solver.hpp"
#include "stabrom/pod.hpp"
#include "stabrom/types.hpp"

namespace stabrom {

inline constexpr int kMaxReducedDim = 200;

/// Dense blocks of a reduced ordinary difference equation
///   E (y^n - y^{n-1})/dt + G y^n = g  with lag coefficient E_lag,
/// stepped as (E/dt + G) y^n = g + E_lag y^{n-1} / dt.
/// LSPG reductions fold the whole normal-equation matrix into G (E = 0).
struct ReducedOperators {
  Mat E;      // reduced mass-like matrix
  Mat G;      // reduced dynamics
  Mat E_lag;  // coefficient of the previous state (captures (M + M_S)/dt terms)
  Vec g;      // reduced forcing
  std::string formulation;
  double tau = 0.0;
  double dt = 0.0;       // time step the blocks embed, when dt_locked
  double tau_apg = 0.0;
  bool dt_locked = false;

  int dim() const { return static_cast<int>(G.rows()); }
};

enum class DiscreteWeighting { Identity, InverseMass };

namespace detail {

/// Petrov-Galerkin blocks test^T * (FOM OdE blocks) * Psi for a given test
/// matrix (trial basis for Galerkin projections).
inline ReducedOperators project_blocks(const AssembledOperators& ops, const Mat& test,
                                       const Mat& Psi, double dt) {
  if (test.rows() != Psi.rows() || ops.M.rows() != Psi.rows()) {
    throw std::invalid_argument("reduction: dimension mismatch");
  }
  if (Psi.cols() > kMaxReducedDim) {
    throw std::invalid_argument("reduction: reduced dimension exceeds limit");
  }
  ReducedOperators red;
  red.E = test.transpose() * (ops.M * Psi);
  red.G = test.transpose() * (ops.dynamics(dt) * Psi);
  red.E_lag = test.transpose() * (ops.lag_mass() * Psi);
  red.g = test.transpose() * ops.load();
  red.tau = ops.tau();
  red.dt = dt;
  red.dt_locked = ops.stabilized();
  return red;
}

inline double stab_dt(const AssembledOperators& ops, double fallback = 0.0) {
  return ops.stab ? ops.stab->dt : fallback;
}

}  // namespace detail

/// Continuous-projection ROM of the (possibly stabilized) weak form:
/// E = Psi^T M Psi, G = Psi^T (B + Q) Psi, and so on. For stabilized
/// operators the run time step is the one the stabilization was built with.
inline ReducedOperators reduce_continuous(const AssembledOperators& ops, const PODBasis& basis) {
  if (basis.rank() < 1) throw std::invalid_argument("reduce_continuous: empty basis");
  return detail::project_blocks(ops, basis.Psi, basis.Psi, detail::stab_dt(ops, 1.0));
}

/// Discrete-projection Galerkin ROM: restricts the FOM OdE residual to be
/// W-orthogonal to the trial space. W = I recovers the continuous ROM of the
/// same FOM; W = M^{-1} is applied through mass solves.
inline ReducedOperators reduce_discrete_galerkin(const AssembledOperators& ops,
                                                 const PODBasis& basis, DiscreteWeighting W,
                                                 const SpdSolver* mass = nullptr) {
  if (basis.rank() < 1) throw std::invalid_argument("reduce_discrete_galerkin: empty basis");
  if (W == DiscreteWeighting::Identity) {
    return detail::project_blocks(ops, basis.Psi, basis.Psi, detail::stab_dt(ops, 1.0));
  }
  if (mass == nullptr) {
    throw std::invalid_argument("reduce_discrete_galerkin: InverseMass requires a mass factorization");
  }
  const Mat test = mass->solve(basis.Psi);
  return detail::project_blocks(ops, test, basis.Psi, detail::stab_dt(ops, 1.0));
}

/// Reduced initial condition y0 = Psi^T P a0 (the P-projection coordinates
/// for a P-orthonormal basis).
inline Vec reduced_initial_condition(const PODBasis& basis, const SpMat& M, const Vec& a0) {
  if (basis.weighting == PodWeighting::Mass) return basis.Psi.transpose() * (M * a0);
  return basis.Psi.transpose() * a0;
}

/// March the reduced OdE with one dense factorization.
inline Trajectory solve_rom(const ReducedOperators& red, double dt, int n_steps, const Vec& y0) {
  if (dt <= 0.0) throw std::invalid_argument("solve_rom: dt must be positive");
  if (red.dt_locked && std::abs(red.dt - dt) > 1e-14 * std::max(1.0, std::abs(red.dt))) {
    throw std::runtime_error("solve_rom: reduced operators were built for a different time step");
  }
  const Mat system = red.E / dt + red.G;
  Eigen::FullPivLU<Mat> lu(system);
  if (!lu.isInvertible()) throw std::runtime_error("solve_rom: singular reduced system");

  Trajectory traj;
  traj.dt = dt;
  traj.states.resize(red.dim(), n_steps + 1);
  Vec y = y0;
  traj.states.col(0) = y;
  for (int n = 1; n <= n_steps; ++n) {
    y = lu.solve(Vec(red.g + red.E_lag * (y / dt)));
    traj.states.col(n) = y;
  }
  return traj;
}

}  // namespace stabrom
