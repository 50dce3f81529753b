// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <random>

#include "stabrom/rom_core.hpp"

using namespace stabrom;

namespace {

CDRProblem example1_coeffs() {
  CDRProblem p;
  p.epsilon = 1e-3;
  p.b = Eigen::Vector2d(0.25, 0.25 * std::sqrt(3.0));
  p.sigma = 1.0;
  p.forcing = [](const Eigen::Vector2d&) { return 1.0; };
  p.T = 5.0;
  return p;
}

struct DeskProblem {
  FunctionSpace space;
  CDRProblem problem;
  AssembledOperators ops;
  PODBasis basis;  // from snapshots of the FOM's own run
  Trajectory fom_traj;
};

DeskProblem make_desk(StabilizationKind kind, double tau, double dt, int n_steps, int rank) {
  DeskProblem d;
  d.space = build_space(build_unit_square_mesh(4), 2);
  d.problem = example1_coeffs();
  d.ops = assemble_stabilized(d.space, d.problem, kind, tau, dt);
  // a seeded random start keeps the snapshot spectrum well separated
  std::mt19937 rng(424242);
  std::normal_distribution<double> gauss;
  Vec a0(d.space.n_interior());
  for (int i = 0; i < a0.size(); ++i) a0(i) = gauss(rng);
  d.fom_traj = solve_fom(d.ops, dt, n_steps, a0);
  SnapshotMatrix snaps;
  snaps.S = d.fom_traj.states;
  snaps.source_dt = dt;
  d.basis = compute_pod(snaps, &d.ops.M, rank > 0 ? PodCutoff::rank(rank) : PodCutoff::energy(1.0));
  return d;
}

}  // namespace

TEST_CASE("Galerkin reduction with an M-orthonormal basis has E = I") {
  const auto d = make_desk(StabilizationKind::None, 0.0, 1e-2, 12, 5);
  const auto red = reduce_continuous(d.ops, d.basis);
  CHECK((red.E - Mat::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("reduced blocks match the dense triple-product oracle") {
  const auto d = make_desk(StabilizationKind::GLS_ST, 0.01, 1e-2, 12, 4);
  const auto red = reduce_continuous(d.ops, d.basis);
  const Mat Psi = d.basis.Psi;
  const Mat Qfull = Mat(d.ops.stab->full_Q(1e-2));
  CHECK((red.E - Psi.transpose() * Mat(d.ops.M) * Psi).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((red.G - Psi.transpose() * (Mat(d.ops.B) + Qfull) * Psi).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((red.E_lag - Psi.transpose() * (Mat(d.ops.M) + Mat(d.ops.stab->M_S)) * Psi)
            .cwiseAbs()
            .maxCoeff() < 1e-13);
  CHECK((red.g - Psi.transpose() * Vec(d.ops.f + d.ops.stab->f_S)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("full-rank basis reproduces the FOM trajectory") {
  const auto d = make_desk(StabilizationKind::SUPG, 0.02, 1e-2, 55, 0);
  const auto red = reduce_continuous(d.ops, d.basis);
  const Vec y0 = reduced_initial_condition(d.basis, d.ops.M, d.fom_traj.states.col(0));
  const auto rom = solve_rom(red, 1e-2, 55, y0);
  const Mat lifted = d.basis.Psi * rom.states;
  CHECK((lifted - d.fom_traj.states).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("discrete Galerkin with W = I matches the continuous reduction") {
  for (auto kind : {StabilizationKind::None, StabilizationKind::ADJ_DS, StabilizationKind::GLS_ST}) {
    const auto d = make_desk(kind, kind == StabilizationKind::None ? 0.0 : 2e-3, 1e-2, 10, 4);
    const auto cont = reduce_continuous(d.ops, d.basis);
    const auto disc = reduce_discrete_galerkin(d.ops, d.basis, DiscreteWeighting::Identity);
    CHECK((cont.E - disc.E).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((cont.G - disc.G).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((cont.E_lag - disc.E_lag).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((cont.g - disc.g).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("discrete Galerkin with W = inverse mass") {
  const auto d = make_desk(StabilizationKind::None, 0.0, 1e-2, 10, 4);
  const SpdSolver mass(d.ops.M);
  const auto red = reduce_discrete_galerkin(d.ops, d.basis, DiscreteWeighting::InverseMass, &mass);
  const Mat Psi = d.basis.Psi;
  // dense oracle with an explicit inverse mass
  const Mat Minv = Mat(d.ops.M).inverse();
  CHECK((red.E - Psi.transpose() * Psi).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((red.G - Psi.transpose() * Minv * Mat(d.ops.B) * Psi).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_THROWS_AS(reduce_discrete_galerkin(d.ops, d.basis, DiscreteWeighting::InverseMass, nullptr),
                  std::invalid_argument);
}

TEST_CASE("reduced dynamics of the Galerkin ROM is coercive") {
  const auto d = make_desk(StabilizationKind::None, 0.0, 1e-2, 12, 5);
  const auto red = reduce_continuous(d.ops, d.basis);
  const Mat Dr = d.basis.Psi.transpose() * (d.ops.D * d.basis.Psi);
  const Mat Mr = d.basis.Psi.transpose() * (d.ops.M * d.basis.Psi);
  std::mt19937 rng(77);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    Vec y(5);
    for (int i = 0; i < 5; ++i) y(i) = gauss(rng);
    const double lhs = y.dot(red.G * y);
    const double rhs = d.problem.epsilon * y.dot(Dr * y) + d.problem.sigma * y.dot(Mr * y);
    CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
    CHECK(lhs > 0.0);
  }
}

TEST_CASE("scalar reduced recursion matches the closed form") {
  ReducedOperators red;
  red.E = Mat::Constant(1, 1, 2.0);
  red.G = Mat::Constant(1, 1, 3.0);
  red.E_lag = Mat::Constant(1, 1, 2.0);
  red.g = Vec::Constant(1, 0.7);
  const double dt = 0.1;
  Vec y0 = Vec::Constant(1, 0.2);
  const auto traj = solve_rom(red, dt, 3, y0);
  double y = 0.2;
  for (int n = 1; n <= 3; ++n) {
    y = (0.7 + 2.0 * y / dt) / (2.0 / dt + 3.0);
    CHECK(traj.states(0, n) == Catch::Approx(y).epsilon(1e-14));
  }
}

TEST_CASE("zero forcing and zero start stay at zero in reduced space") {
  const auto d = make_desk(StabilizationKind::None, 0.0, 1e-2, 8, 3);
  ReducedOperators red = reduce_continuous(d.ops, d.basis);
  red.g.setZero();
  const auto traj = solve_rom(red, 1e-2, 8, Vec::Zero(3));
  CHECK(traj.states.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("reduced initial condition is the M-projection") {
  const auto d = make_desk(StabilizationKind::None, 0.0, 1e-2, 10, 4);
  std::mt19937 rng(3);
  std::normal_distribution<double> gauss;
  Vec a0(d.space.n_interior());
  for (int i = 0; i < a0.size(); ++i) a0(i) = gauss(rng);
  const Vec y0 = reduced_initial_condition(d.basis, d.ops.M, a0);
  const Vec projected = best_fit_project(d.basis.Psi, d.ops.M, a0);
  CHECK((d.basis.Psi * y0 - projected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("singular reduced system is reported") {
  ReducedOperators red;
  red.E = Mat::Zero(2, 2);
  red.G = Mat::Zero(2, 2);
  red.E_lag = Mat::Zero(2, 2);
  red.g = Vec::Zero(2);
  CHECK_THROWS_AS(solve_rom(red, 0.1, 1, Vec::Zero(2)), std::runtime_error);
}

TEST_CASE("type 2 consistency per stabilization kind") {
  for (auto kind : {StabilizationKind::None, StabilizationKind::SUPG, StabilizationKind::GLS_DS,
                    StabilizationKind::ADJ_DS, StabilizationKind::GLS_ST, StabilizationKind::ADJ_ST}) {
    // keep tau well away from dt for the DS kinds (tau ~ dt cancels the
    // transient term of the ADJ_DS test operator)
    const double tau = kind == StabilizationKind::None ? 0.0 : 2e-3;
    const auto d = make_desk(kind, tau, 1e-2, 55, 0);  // full-rank POD of own snapshots
    const auto red = reduce_continuous(d.ops, d.basis);
    const Vec y0 = reduced_initial_condition(d.basis, d.ops.M, d.fom_traj.states.col(0));
    const auto rom = solve_rom(red, 1e-2, 55, y0);
    const Mat lifted = d.basis.Psi * rom.states;
    const double scale = std::max(1.0, d.fom_traj.states.cwiseAbs().maxCoeff());
    CHECK((lifted - d.fom_traj.states).cwiseAbs().maxCoeff() < 1e-8 * scale);
  }
}
