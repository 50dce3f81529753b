// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "stabrom/fom_solver.hpp"
#include "stabrom/pod.hpp"
#include "stabrom/types.hpp"

namespace stabrom {

enum class RunStatus { Converged, Diverged };

struct ErrorReport {
  double err_l2 = 0.0;
  double err_h1 = 0.0;
  std::string formulation;
  int R = 0;
  double tau = 0.0;
  double dt = 0.0;
  double tau_apg = 0.0;
  RunStatus status = RunStatus::Converged;
};

namespace detail {

inline int step_ratio(double rom_dt, double truth_dt) {
  const double ratio = rom_dt / truth_dt;
  const long long k = std::llround(ratio);
  if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-8 * ratio) {
    throw std::invalid_argument("time_integrated_errors: ROM dt must be an integer multiple of the truth dt");
  }
  return static_cast<int>(k);
}

inline double ratio_or_zero(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace detail

/// Time-integrated relative L2 and H1 best-fit errors between a reduced
/// trajectory and the truth restricted to the FOM space. Sums start at n = 1
/// and run on the coarser ROM time grid; both numerator and denominator
/// compare against the G-orthogonal projection of the truth onto range(Psi).
/// The squared-norm ratio is reported without a square root.
inline ErrorReport time_integrated_errors(const Trajectory& rom_traj, const PODBasis& basis,
                                          const Trajectory& truth, const SpMat& M,
                                          const SpMat& D) {
  const int k = detail::step_ratio(rom_traj.dt, truth.dt);
  const int n_rom = rom_traj.n_steps();
  if (static_cast<long long>(n_rom) * k != truth.n_steps()) {
    throw std::invalid_argument("time_integrated_errors: ROM horizon does not match the truth horizon");
  }
  if (rom_traj.states.rows() != basis.rank()) {
    throw std::invalid_argument("time_integrated_errors: trajectory dimension does not match basis rank");
  }

  ErrorReport report;
  report.dt = rom_traj.dt;
  report.R = basis.rank();
  if (!rom_traj.states.allFinite()) {
    report.status = RunStatus::Diverged;
    report.err_l2 = std::numeric_limits<double>::infinity();
    report.err_h1 = std::numeric_limits<double>::infinity();
    return report;
  }

  const Mat& Psi = basis.Psi;
  const Mat Er = Psi.transpose() * (M * Psi);
  const Mat Dr = Psi.transpose() * (D * Psi);
  const Eigen::LDLT<Mat> Er_fact(Er);
  const Eigen::LDLT<Mat> Dr_fact(Dr);

  double num_l2 = 0.0, den_l2 = 0.0, num_h1 = 0.0, den_h1 = 0.0;
  for (int n = 1; n <= n_rom; ++n) {
    const Vec u_truth = truth.states.col(static_cast<Eigen::Index>(n) * k);
    const Vec y = rom_traj.states.col(n);
    const Vec c_m = Er_fact.solve(Vec(Psi.transpose() * (M * u_truth)));
    const Vec c_d = Dr_fact.solve(Vec(Psi.transpose() * (D * u_truth)));
    const Vec dm = y - c_m;
    const Vec dd = y - c_d;
    num_l2 += dm.dot(Er * dm);
    den_l2 += c_m.dot(Er * c_m);
    num_h1 += dd.dot(Dr * dd);
    den_h1 += c_d.dot(Dr * c_d);
  }
  report.err_l2 = detail::ratio_or_zero(num_l2, den_l2);
  report.err_h1 = detail::ratio_or_zero(num_h1, den_h1);
  return report;
}

}  // namespace stabrom
