// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>

#include "stabrom/rom_core.hpp"

namespace stabrom {

struct LSPGConfig {
  StabilizationKind base_kind = StabilizationKind::None;
  DiscreteWeighting W = DiscreteWeighting::InverseMass;
  double tau = 0.0;
  double dt = 0.0;
};

struct APGConfig {
  StabilizationKind base_kind = StabilizationKind::None;  // DS kinds not permitted
  double tau_apg = 0.0;
  double tau = 0.0;
  double dt = 0.0;
};

/// LSPG reduction: exact normal equations of the per-step linear
/// least-squares problem min_y || r(Psi y; Psi z) ||_W. The combined system
/// matrix (J Psi)^T W (J Psi) with J = M/dt + B + Q is stored in G; the lag
/// and forcing blocks carry (J Psi)^T W (M + M_S) Psi and (J Psi)^T W (f + f_S).
inline ReducedOperators lspg_reduce(const AssembledOperators& ops, const PODBasis& basis,
                                    const LSPGConfig& cfg, const SpdSolver* mass = nullptr) {
  if (cfg.base_kind != ops.kind()) {
    throw std::invalid_argument("lspg_reduce: config base kind does not match the operators");
  }
  if (cfg.dt <= 0.0) throw std::invalid_argument("lspg_reduce: dt must be positive");
  if (basis.rank() > kMaxReducedDim) throw std::invalid_argument("lspg_reduce: reduced dimension exceeds limit");
  const Mat& Psi = basis.Psi;
  const SpMat system = ops.M * (1.0 / cfg.dt) + ops.dynamics(cfg.dt);
  const Mat JPsi = system * Psi;

  Mat WJPsi;
  if (cfg.W == DiscreteWeighting::InverseMass) {
    if (mass == nullptr) throw std::invalid_argument("lspg_reduce: InverseMass requires a mass factorization");
    WJPsi = mass->solve(JPsi);
  } else {
    WJPsi = JPsi;
  }

  ReducedOperators red;
  red.E = Mat::Zero(basis.rank(), basis.rank());
  red.G = JPsi.transpose() * WJPsi;
  Eigen::FullPivLU<Mat> lu(red.G);
  if (!lu.isInvertible()) throw std::runtime_error("lspg_reduce: rank-deficient least-squares system");
  red.E_lag = WJPsi.transpose() * (ops.lag_mass() * Psi);
  red.g = WJPsi.transpose() * ops.load();
  red.tau = ops.tau();
  red.dt = cfg.dt;
  red.dt_locked = true;  // J embeds 1/dt
  return red;
}

/// APG test basis W = Psi - tau_apg (M^{-1} - Psi Psi^T) dyn^T Psi. The
/// fine-scale correction is M-orthogonal to range(Psi), so W^T M Psi = I.
inline Mat apg_test_basis(const PODBasis& basis, const SpMat& dyn, double tau_apg,
                          const SpdSolver& mass) {
  const Mat& Psi = basis.Psi;
  const Mat Y = dyn.transpose() * Psi;
  const Mat Z = mass.solve(Y);
  return Psi - tau_apg * (Z - Psi * (Psi.transpose() * Y));
}

/// Adjoint Petrov-Galerkin reduction of the Galerkin FOM (base None) or of a
/// SUPG / space-time stabilized FOM. The discretize-then-stabilize kinds put
/// v/dt terms in the test operator and are rejected.
inline ReducedOperators apg_reduce(const AssembledOperators& ops, const PODBasis& basis,
                                   const APGConfig& cfg, const SpdSolver& mass) {
  if (cfg.base_kind != ops.kind()) {
    throw std::invalid_argument("apg_reduce: config base kind does not match the operators");
  }
  if (is_ds_kind(ops.kind())) {
    throw std::invalid_argument("apg_reduce: DS base kinds are not permitted");
  }
  if (cfg.tau_apg < 0.0) throw std::invalid_argument("apg_reduce: tau_apg must be >= 0");
  const double dt = detail::stab_dt(ops, cfg.dt > 0.0 ? cfg.dt : 1.0);
  const SpMat dyn = ops.dynamics(dt);
  const Mat test = apg_test_basis(basis, dyn, cfg.tau_apg, mass);
  ReducedOperators red = detail::project_blocks(ops, test, basis.Psi, dt);
  red.tau_apg = cfg.tau_apg;
  return red;
}

}  // namespace stabrom
