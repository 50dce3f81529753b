// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <atomic>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "stabrom/metrics.hpp"
#include "stabrom/rom_petrov.hpp"

namespace stabrom {

// ---------------------------------------------------------------------------
// formulation registry
// ---------------------------------------------------------------------------

enum class Formulation {
  Galerkin,
  SUPG,
  GLS_DS,
  ADJ_DS,
  GLS_ST,
  ADJ_ST,
  G_LSPG,
  SUPG_LSPG,
  GLS_DS_LSPG,
  ADJ_DS_LSPG,
  GLS_ST_LSPG,
  ADJ_ST_LSPG,
  G_APG,
  SUPG_APG,
  GLS_ST_APG,
  ADJ_ST_APG,
};

inline const std::array<Formulation, 16>& all_formulations() {
  static const std::array<Formulation, 16> all = {
      Formulation::Galerkin,    Formulation::SUPG,        Formulation::GLS_DS,
      Formulation::ADJ_DS,      Formulation::GLS_ST,      Formulation::ADJ_ST,
      Formulation::G_LSPG,      Formulation::SUPG_LSPG,   Formulation::GLS_DS_LSPG,
      Formulation::ADJ_DS_LSPG, Formulation::GLS_ST_LSPG, Formulation::ADJ_ST_LSPG,
      Formulation::G_APG,       Formulation::SUPG_APG,    Formulation::GLS_ST_APG,
      Formulation::ADJ_ST_APG,
  };
  return all;
}

inline std::string formulation_name(Formulation f) {
  switch (f) {
    case Formulation::Galerkin: return "galerkin";
    case Formulation::SUPG: return "supg";
    case Formulation::GLS_DS: return "gls_ds";
    case Formulation::ADJ_DS: return "adj_ds";
    case Formulation::GLS_ST: return "gls_st";
    case Formulation::ADJ_ST: return "adj_st";
    case Formulation::G_LSPG: return "g-lspg";
    case Formulation::SUPG_LSPG: return "supg-lspg";
    case Formulation::GLS_DS_LSPG: return "gls_ds-lspg";
    case Formulation::ADJ_DS_LSPG: return "adj_ds-lspg";
    case Formulation::GLS_ST_LSPG: return "gls_st-lspg";
    case Formulation::ADJ_ST_LSPG: return "adj_st-lspg";
    case Formulation::G_APG: return "g-apg";
    case Formulation::SUPG_APG: return "supg-apg";
    case Formulation::GLS_ST_APG: return "gls_st-apg";
    case Formulation::ADJ_ST_APG: return "adj_st-apg";
  }
  return "?";
}

inline Formulation formulation_from_name(const std::string& name) {
  for (Formulation f : all_formulations()) {
    if (formulation_name(f) == name) return f;
  }
  throw std::invalid_argument("unknown formulation: " + name);
}

enum class RomKind { Continuous, Lspg, Apg };

struct FormulationTraits {
  RomKind kind;
  StabilizationKind base;
  bool sweeps_tau;      // depends on the FEM stabilization parameter
  bool sweeps_tau_apg;  // depends on the APG stabilization parameter
  bool sweeps_dt;       // swept over the time-step axis (APG on stabilized FOMs
                        // runs at a fixed time step instead)
};

inline FormulationTraits formulation_traits(Formulation f) {
  using K = StabilizationKind;
  switch (f) {
    case Formulation::Galerkin: return {RomKind::Continuous, K::None, false, false, true};
    case Formulation::SUPG: return {RomKind::Continuous, K::SUPG, true, false, true};
    case Formulation::GLS_DS: return {RomKind::Continuous, K::GLS_DS, true, false, true};
    case Formulation::ADJ_DS: return {RomKind::Continuous, K::ADJ_DS, true, false, true};
    case Formulation::GLS_ST: return {RomKind::Continuous, K::GLS_ST, true, false, true};
    case Formulation::ADJ_ST: return {RomKind::Continuous, K::ADJ_ST, true, false, true};
    case Formulation::G_LSPG: return {RomKind::Lspg, K::None, false, false, true};
    case Formulation::SUPG_LSPG: return {RomKind::Lspg, K::SUPG, true, false, true};
    case Formulation::GLS_DS_LSPG: return {RomKind::Lspg, K::GLS_DS, true, false, true};
    case Formulation::ADJ_DS_LSPG: return {RomKind::Lspg, K::ADJ_DS, true, false, true};
    case Formulation::GLS_ST_LSPG: return {RomKind::Lspg, K::GLS_ST, true, false, true};
    case Formulation::ADJ_ST_LSPG: return {RomKind::Lspg, K::ADJ_ST, true, false, true};
    case Formulation::G_APG: return {RomKind::Apg, K::None, false, true, true};
    case Formulation::SUPG_APG: return {RomKind::Apg, K::SUPG, true, true, false};
    case Formulation::GLS_ST_APG: return {RomKind::Apg, K::GLS_ST, true, true, false};
    case Formulation::ADJ_ST_APG: return {RomKind::Apg, K::ADJ_ST, true, true, false};
  }
  throw std::invalid_argument("bad formulation");
}

// ---------------------------------------------------------------------------
// parameter grid
// ---------------------------------------------------------------------------

struct SweepGrid {
  std::vector<double> tau_values;
  std::vector<double> dt_values;
  std::vector<double> tau_apg_values;
  std::vector<int> R_values;
};

/// The 26-value sweep list used for tau, dt and tau_APG alike.
inline std::vector<double> default_grid_values() {
  return {1e-4,    2.5e-4, 5e-4,    1e-3,    2e-3, 3e-3, 4e-3, 5e-3, 6e-3,
          7e-3,    8e-3,   9e-3,    1e-2,    1.5e-2, 2e-2, 2.5e-2, 3e-2, 4e-2,
          5e-2,    6e-2,   8e-2,    1e-1,    2e-1, 3e-1, 4e-1, 5e-1};
}

inline SweepGrid default_grid() {
  SweepGrid grid;
  grid.tau_values = default_grid_values();
  grid.dt_values = default_grid_values();
  grid.tau_apg_values = default_grid_values();
  return grid;
}

/// Snap a requested ROM time step to k * truth_dt with k a divisor of the
/// truth step count, keeping both N_t integral and the ROM/truth ratio a
/// positive integer. `adjusted` marks values that moved.
struct DtChoice {
  double dt = 0.0;
  int stride = 1;   // ROM dt / truth dt
  int n_steps = 0;  // ROM steps across the full horizon
  bool adjusted = false;
};

inline DtChoice adjust_dt(double requested, int truth_steps, double truth_dt) {
  if (requested <= 0.0) throw std::invalid_argument("adjust_dt: dt must be positive");
  const double raw = requested / truth_dt;
  long long k = std::llround(raw);
  if (k < 1) k = 1;
  if (k > truth_steps) k = truth_steps;
  // nearest divisor of the truth step count; ties go to the smaller one
  long long best = 1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (long long d = 1; d * d <= truth_steps; ++d) {
    if (truth_steps % d != 0) continue;
    for (long long cand : {d, static_cast<long long>(truth_steps) / d}) {
      const double dist = std::abs(static_cast<double>(cand - k));
      if (dist < best_dist || (dist == best_dist && cand < best)) {
        best = cand;
        best_dist = dist;
      }
    }
  }
  DtChoice choice;
  choice.stride = static_cast<int>(best);
  choice.dt = truth_dt * static_cast<double>(best);
  choice.n_steps = truth_steps / choice.stride;
  choice.adjusted = std::abs(choice.dt - requested) > 1e-12 * std::max(choice.dt, requested);
  return choice;
}

// ---------------------------------------------------------------------------
// execution context and per-case runner
// ---------------------------------------------------------------------------

struct SweepContext {
  const FunctionSpace* space = nullptr;
  const CDRProblem* problem = nullptr;
  const AssembledOperators* galerkin = nullptr;  // unstabilized operators
  const SpdSolver* mass = nullptr;               // factorization of galerkin->M
  const PODBasis* basis = nullptr;               // R_max columns
  const Trajectory* truth = nullptr;             // restricted truth on the FOM space
  double apg_fixed_dt = 1e-3;
};

/// Reduced projections of the truth trajectory, shared across all grid
/// points of a sweep. Slicing the leading R rows/blocks reproduces the
/// per-rank projectors of the error metric.
class ProjectedTruth {
 public:
  ProjectedTruth(const PODBasis& basis, const Trajectory& truth, const SpMat& M, const SpMat& D)
      : truth_dt_(truth.dt), truth_steps_(truth.n_steps()) {
    const Mat& Psi = basis.Psi;
    Ym_ = Psi.transpose() * (M * truth.states);
    Yd_ = Psi.transpose() * (D * truth.states);
    E_ = Psi.transpose() * (M * Psi);
    Dr_ = Psi.transpose() * (D * Psi);
  }

  ErrorReport errors(const Trajectory& rom_traj, int R) const {
    const int k = detail::step_ratio(rom_traj.dt, truth_dt_);
    const int n_rom = rom_traj.n_steps();
    if (static_cast<long long>(n_rom) * k != truth_steps_) {
      throw std::invalid_argument("ProjectedTruth: ROM horizon does not match the truth horizon");
    }
    ErrorReport report;
    report.dt = rom_traj.dt;
    report.R = R;
    if (!rom_traj.states.allFinite()) {
      report.status = RunStatus::Diverged;
      report.err_l2 = std::numeric_limits<double>::infinity();
      report.err_h1 = std::numeric_limits<double>::infinity();
      return report;
    }
    const Mat Er = E_.topLeftCorner(R, R);
    const Mat Dr = Dr_.topLeftCorner(R, R);
    const Eigen::LDLT<Mat> Er_fact(Er);
    const Eigen::LDLT<Mat> Dr_fact(Dr);
    double num_l2 = 0.0, den_l2 = 0.0, num_h1 = 0.0, den_h1 = 0.0;
    for (int n = 1; n <= n_rom; ++n) {
      const Vec y = rom_traj.states.col(n);
      const Vec c_m = Er_fact.solve(Vec(Ym_.col(static_cast<Eigen::Index>(n) * k).head(R)));
      const Vec c_d = Dr_fact.solve(Vec(Yd_.col(static_cast<Eigen::Index>(n) * k).head(R)));
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

 private:
  Mat Ym_, Yd_, E_, Dr_;
  double truth_dt_;
  int truth_steps_;
};

/// One ROM execution at a fixed parameter point, with a divergence-safe
/// error report. Diverged or failed runs carry infinite errors.
inline ErrorReport run_case(const SweepContext& ctx, Formulation f, int R, double tau,
                            double dt_requested, double tau_apg,
                            const ProjectedTruth* cache = nullptr) {
  const FormulationTraits tr = formulation_traits(f);
  ErrorReport report;
  report.formulation = formulation_name(f);
  report.R = R;
  report.tau = tr.sweeps_tau ? tau : 0.0;
  report.tau_apg = tr.sweeps_tau_apg ? tau_apg : 0.0;
  report.dt = dt_requested;
  report.status = RunStatus::Diverged;
  report.err_l2 = std::numeric_limits<double>::infinity();
  report.err_h1 = std::numeric_limits<double>::infinity();
  try {
    const DtChoice choice = adjust_dt(dt_requested, ctx.truth->n_steps(), ctx.truth->dt);
    report.dt = choice.dt;
    const PODBasis basis_R = ctx.basis->truncated(R);

    AssembledOperators stabilized;
    const AssembledOperators* ops = ctx.galerkin;
    if (tr.base != StabilizationKind::None) {
      stabilized = *ctx.galerkin;
      stabilized.stab = assemble_stabilization(*ctx.space, *ctx.problem, tr.base, tau, choice.dt);
      ops = &stabilized;
    }

    ReducedOperators red;
    switch (tr.kind) {
      case RomKind::Continuous:
        red = reduce_continuous(*ops, basis_R);
        break;
      case RomKind::Lspg:
        red = lspg_reduce(*ops, basis_R,
                          LSPGConfig{tr.base, DiscreteWeighting::InverseMass,
                                     tr.sweeps_tau ? tau : 0.0, choice.dt},
                          ctx.mass);
        break;
      case RomKind::Apg:
        red = apg_reduce(*ops, basis_R,
                         APGConfig{tr.base, tau_apg, tr.sweeps_tau ? tau : 0.0, choice.dt},
                         *ctx.mass);
        break;
    }

    const Vec y0 = reduced_initial_condition(basis_R, ctx.galerkin->M, ctx.truth->states.col(0));
    const Trajectory rom = solve_rom(red, choice.dt, choice.n_steps, y0);
    const ErrorReport metric =
        cache ? cache->errors(rom, R)
              : time_integrated_errors(rom, basis_R, *ctx.truth, ctx.galerkin->M, ctx.galerkin->D);
    report.err_l2 = metric.err_l2;
    report.err_h1 = metric.err_h1;
    report.status = metric.status;
  } catch (const std::exception&) {
    // singular or blown-up runs count as diverged grid points
  }
  return report;
}

// ---------------------------------------------------------------------------
// grid sweep
// ---------------------------------------------------------------------------

struct SweepResult {
  std::vector<ErrorReport> rows;
};

struct SweepTask {
  Formulation f;
  int R;
  double tau;
  double dt;
  double tau_apg;
};

inline std::vector<SweepTask> enumerate_tasks(const std::vector<Formulation>& formulations,
                                              const SweepGrid& grid, double apg_fixed_dt) {
  std::vector<SweepTask> tasks;
  for (Formulation f : formulations) {
    const FormulationTraits tr = formulation_traits(f);
    for (int R : grid.R_values) {
      if (tr.kind == RomKind::Apg && tr.base != StabilizationKind::None) {
        for (double tau : grid.tau_values) {
          for (double tau_apg : grid.tau_apg_values) {
            tasks.push_back({f, R, tau, apg_fixed_dt, tau_apg});
          }
        }
      } else if (tr.kind == RomKind::Apg) {  // G-APG: (tau_apg, dt)
        for (double tau_apg : grid.tau_apg_values) {
          for (double dt : grid.dt_values) {
            tasks.push_back({f, R, 0.0, dt, tau_apg});
          }
        }
      } else if (tr.sweeps_tau) {
        for (double tau : grid.tau_values) {
          for (double dt : grid.dt_values) {
            tasks.push_back({f, R, tau, dt, 0.0});
          }
        }
      } else {  // Galerkin and G-LSPG: dt axis only
        for (double dt : grid.dt_values) {
          tasks.push_back({f, R, 0.0, dt, 0.0});
        }
      }
    }
  }
  return tasks;
}

/// Embarrassingly parallel sweep; rows come back in task order regardless of
/// worker scheduling. Shared inputs are read-only.
inline SweepResult run_sweep(const std::vector<Formulation>& formulations, const SweepGrid& grid,
                             const SweepContext& ctx, int workers = 1) {
  if (grid.R_values.empty()) throw std::invalid_argument("run_sweep: no basis dimensions given");
  const std::vector<SweepTask> tasks = enumerate_tasks(formulations, grid, ctx.apg_fixed_dt);
  const ProjectedTruth cache(*ctx.basis, *ctx.truth, ctx.galerkin->M, ctx.galerkin->D);

  SweepResult result;
  result.rows.resize(tasks.size());
  if (workers < 1) workers = 1;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      const SweepTask& t = tasks[i];
      result.rows[i] = run_case(ctx, t.f, t.R, t.tau, t.dt, t.tau_apg, &cache);
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return result;
}

// ---------------------------------------------------------------------------
// optima and scoring
// ---------------------------------------------------------------------------

enum class ErrorNorm { L2, H1 };

inline const ErrorReport& select_optimal(const SweepResult& result, Formulation f, int R,
                                         ErrorNorm criterion) {
  const std::string name = formulation_name(f);
  const ErrorReport* best = nullptr;
  for (const ErrorReport& row : result.rows) {
    if (row.formulation != name || row.R != R) continue;
    if (best == nullptr) {
      best = &row;
      continue;
    }
    const double err = criterion == ErrorNorm::L2 ? row.err_l2 : row.err_h1;
    const double err_best = criterion == ErrorNorm::L2 ? best->err_l2 : best->err_h1;
    const auto key = std::make_tuple(err, row.tau, row.dt, row.tau_apg);
    const auto key_best = std::make_tuple(err_best, best->tau, best->dt, best->tau_apg);
    if (key < key_best) best = &row;
  }
  if (best == nullptr) throw std::invalid_argument("select_optimal: no rows for this formulation");
  if (best->status == RunStatus::Diverged) {
    throw std::runtime_error("select_optimal: all rows diverged");
  }
  return *best;
}

struct OptimumRow {
  std::string experiment;
  Formulation formulation;
  int R = 0;
  double err_l2 = 0.0;
  double err_h1 = 0.0;
};

struct ScoreTables {
  int n_roms = 0;
  std::map<Formulation, int> count_best_l2, count_best_h1;
  std::map<Formulation, int> rank_score_l2, rank_score_h1;
};

/// Count-of-best and rank scores across (R, experiment) groups: the best
/// formulation in a group earns N_ROMS points down to 1 for the worst; ties
/// resolve by registry order.
inline ScoreTables score_formulations(const std::vector<OptimumRow>& optima) {
  std::set<Formulation> formulations;
  std::map<std::pair<std::string, int>, std::vector<OptimumRow>> groups;
  for (const auto& row : optima) {
    formulations.insert(row.formulation);
    groups[{row.experiment, row.R}].push_back(row);
  }
  ScoreTables tables;
  tables.n_roms = static_cast<int>(formulations.size());
  for (Formulation f : formulations) {
    tables.count_best_l2[f] = 0;
    tables.count_best_h1[f] = 0;
    tables.rank_score_l2[f] = 0;
    tables.rank_score_h1[f] = 0;
  }

  auto registry_index = [](Formulation f) {
    const auto& all = all_formulations();
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (all[i] == f) return static_cast<int>(i);
    }
    return -1;
  };

  for (const auto& [key, rows] : groups) {
    if (static_cast<int>(rows.size()) != tables.n_roms) {
      throw std::invalid_argument("score_formulations: missing formulations for experiment '" +
                                  key.first + "' at R = " + std::to_string(key.second));
    }
    for (ErrorNorm norm : {ErrorNorm::L2, ErrorNorm::H1}) {
      std::vector<const OptimumRow*> order;
      order.reserve(rows.size());
      for (const auto& r : rows) order.push_back(&r);
      std::sort(order.begin(), order.end(), [&](const OptimumRow* a, const OptimumRow* b) {
        const double ea = norm == ErrorNorm::L2 ? a->err_l2 : a->err_h1;
        const double eb = norm == ErrorNorm::L2 ? b->err_l2 : b->err_h1;
        if (ea != eb) return ea < eb;
        return registry_index(a->formulation) < registry_index(b->formulation);
      });
      auto& count = norm == ErrorNorm::L2 ? tables.count_best_l2 : tables.count_best_h1;
      auto& score = norm == ErrorNorm::L2 ? tables.rank_score_l2 : tables.rank_score_h1;
      count[order.front()->formulation] += 1;
      for (std::size_t i = 0; i < order.size(); ++i) {
        score[order[i]->formulation] += tables.n_roms - static_cast<int>(i);
      }
    }
  }
  return tables;
}

// ---------------------------------------------------------------------------
// CSV interface
// ---------------------------------------------------------------------------

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline constexpr const char* kSweepCsvHeader = "formulation,R,tau,dt,tau_apg,err_l2,err_h1,status";

inline void write_sweep_csv(std::ostream& os, const std::vector<ErrorReport>& rows) {
  os << kSweepCsvHeader << "\n";
  for (const ErrorReport& row : rows) {
    os << row.formulation << ',' << row.R << ',' << format_g17(row.tau) << ','
       << format_g17(row.dt) << ',' << format_g17(row.tau_apg) << ',' << format_g17(row.err_l2)
       << ',' << format_g17(row.err_h1) << ','
       << (row.status == RunStatus::Converged ? "Converged" : "Diverged") << "\n";
  }
}

inline std::vector<ErrorReport> read_sweep_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kSweepCsvHeader) {
    throw std::runtime_error("read_sweep_csv: bad header");
  }
  std::vector<ErrorReport> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    ErrorReport row;
    std::getline(ss, field, ',');
    row.formulation = field;
    std::getline(ss, field, ',');
    row.R = std::stoi(field);
    std::getline(ss, field, ',');
    row.tau = std::stod(field);
    std::getline(ss, field, ',');
    row.dt = std::stod(field);
    std::getline(ss, field, ',');
    row.tau_apg = std::stod(field);
    std::getline(ss, field, ',');
    row.err_l2 = std::stod(field);
    std::getline(ss, field, ',');
    row.err_h1 = std::stod(field);
    std::getline(ss, field, ',');
    row.status = field == "Converged" ? RunStatus::Converged : RunStatus::Diverged;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace stabrom
