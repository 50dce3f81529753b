// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stabrom/fom_solver.hpp"
#include "stabrom/types.hpp"

namespace stabrom {

struct SnapshotMatrix {
  Mat S;                  // N x N_s, columns ordered by time
  double source_dt = 0.0;
  int stride = 1;
};

/// Subsampled snapshot matrix. The stride is the smallest value keeping the
/// column count at or below `max_columns`, so the Gram eigensolve stays
/// tractable for long trajectories.
inline SnapshotMatrix make_snapshot_matrix(const Trajectory& traj, int max_columns = 2000) {
  const int cols = static_cast<int>(traj.states.cols());
  const int stride = (cols + max_columns - 1) / max_columns;
  SnapshotMatrix snaps;
  snaps.source_dt = traj.dt;
  snaps.stride = stride;
  const int kept = (cols + stride - 1) / stride;
  snaps.S.resize(traj.states.rows(), kept);
  for (int k = 0; k < kept; ++k) snaps.S.col(k) = traj.states.col(static_cast<Eigen::Index>(k) * stride);
  return snaps;
}

struct PodCutoff {
  static PodCutoff energy(double e) {
    if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("PodCutoff: energy must be in (0,1]");
    return PodCutoff{true, e, 0};
  }
  static PodCutoff rank(int r) {
    if (r < 1) throw std::invalid_argument("PodCutoff: rank must be >= 1");
    return PodCutoff{false, 0.0, r};
  }
  bool is_energy = true;
  double energy_value = 1.0;
  int rank_value = 0;
};

enum class PodWeighting { Identity, Mass };

/// P-orthonormal reduced basis with the eigenvalue spectrum of the snapshot
/// Gram matrix (descending; entries below 1e-14 * Lambda_1 reported as zero).
struct PODBasis {
  Mat Psi;          // N x R
  Vec eigenvalues;  // full spectrum, descending
  PodWeighting weighting = PodWeighting::Identity;

  int rank() const { return static_cast<int>(Psi.cols()); }

  PODBasis truncated(int R) const {
    if (R < 1 || R > rank()) throw std::invalid_argument("PODBasis::truncated: bad rank");
    PODBasis out;
    out.Psi = Psi.leftCols(R);
    out.eigenvalues = eigenvalues;
    out.weighting = weighting;
    return out;
  }
};

namespace detail {

inline Mat apply_weight(const SpMat* P, const Mat& X) {
  return P != nullptr ? Mat((*P) * X) : X;
}

struct GramEig {  // descending eigenpairs of S^T P S
  Vec lambda;
  Mat vectors;
};

inline GramEig gram_eig(const Mat& S, const SpMat* P) {
  const Mat K = S.transpose() * apply_weight(P, S);
  Eigen::SelfAdjointEigenSolver<Mat> eig(K);
  if (eig.info() != Eigen::Success) throw std::runtime_error("compute_pod: eigensolver failed");
  const int n = static_cast<int>(K.rows());
  GramEig out;
  out.lambda.resize(n);
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.lambda(i) = eig.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = eig.eigenvectors().col(n - 1 - i);
  }
  return out;
}

/// In-place P-orthonormalization through the Cholesky factor of the Gram
/// matrix; the triangular mixing never leaves the leading-R subspaces.
inline void orthonormalize(Mat& Psi, const SpMat* P) {
  if (Psi.cols() == 0) return;
  const Mat gram = Psi.transpose() * apply_weight(P, Psi);
  const Eigen::LLT<Mat> llt(gram);
  if (llt.info() == Eigen::Success) {
    Psi = llt.matrixL().transpose().solve<Eigen::OnTheRight>(Psi);
  }
}

}  // namespace detail

/// Gram-matrix POD: K = S^T P S, K E = E Lambda, Psi = S E_R Lambda_R^{-1/2}.
/// Pass P = nullptr for the identity weighting. Column signs are fixed so the
/// largest-magnitude entry of each column is positive.
///
/// The Gram route resolves directions down to about sqrt(eps) of the leading
/// eigenvalue; requests reaching past that band (full-rank consistency
/// checks) are served by a second eigensolve of the deflated snapshots, which
/// recovers the genuine tail content instead of eigensolver noise.
inline PODBasis compute_pod(const SnapshotMatrix& snaps, const SpMat* P, PodCutoff cutoff) {
  const Mat& S = snaps.S;
  if (S.cols() < 1 || S.norm() == 0.0) {
    throw std::invalid_argument("compute_pod: snapshot matrix must be nonzero");
  }
  const int ns = static_cast<int>(S.cols());

  Mat Psi(S.rows(), 0);
  Vec lambda = Vec::Zero(ns);
  double lambda1 = -1.0;
  int cols = 0;
  bool exhausted = false;

  for (int stage = 0; stage < 8 && !exhausted && cols < ns; ++stage) {
    if (lambda1 > 0.0) {
      // stop deflating once the request is already satisfiable
      if (!cutoff.is_energy && cols >= cutoff.rank_value) break;
      if (cutoff.is_energy && cutoff.energy_value < 1.0 - 1e-7) {
        const double total = lambda.sum();
        double cumulative = 0.0;
        bool reached = false;
        for (int i = 0; i < cols && !reached; ++i) {
          cumulative += lambda(i);
          reached = cumulative / total >= cutoff.energy_value;
        }
        if (reached) break;
      }
    }
    const Mat work = (cols == 0)
                         ? S
                         : Mat(S - Psi * (Psi.transpose() * detail::apply_weight(P, S)));
    const detail::GramEig eig = detail::gram_eig(work, P);
    const double head = eig.lambda(0);
    if (stage == 0) {
      lambda1 = head;
      if (!(lambda1 > 0.0)) throw std::runtime_error("compute_pod: snapshots are numerically zero");
    }
    if (head <= 1e-22 * lambda1) {
      exhausted = true;
      break;
    }
    int k = 0;
    while (cols + k < ns && eig.lambda(k) >= 1e-8 * head) ++k;
    if (k == 0) {
      exhausted = true;
      break;
    }
    Psi.conservativeResize(Eigen::NoChange, cols + k);
    for (int r = 0; r < k; ++r) {
      Psi.col(cols + r) = work * (eig.vectors.col(r) / std::sqrt(eig.lambda(r)));
      lambda(cols + r) = eig.lambda(r);
    }
    detail::orthonormalize(Psi, P);
    cols += k;
  }

  int R;
  if (cutoff.is_energy) {
    if (cutoff.energy_value >= 1.0) {
      R = cols;  // full numerical rank
    } else {
      const double total = lambda.sum();
      double cumulative = 0.0;
      R = cols;
      for (int i = 0; i < cols; ++i) {
        cumulative += lambda(i);
        if (cumulative / total >= cutoff.energy_value) {
          R = i + 1;
          break;
        }
      }
    }
  } else {
    if (cutoff.rank_value > cols) {
      throw std::invalid_argument("compute_pod: requested rank exceeds numerical rank");
    }
    R = cutoff.rank_value;
  }

  PODBasis basis;
  basis.weighting = (P != nullptr) ? PodWeighting::Mass : PodWeighting::Identity;
  basis.Psi = Psi.leftCols(R);
  for (int r = 0; r < R; ++r) {
    Eigen::Index imax;
    basis.Psi.col(r).cwiseAbs().maxCoeff(&imax);
    if (basis.Psi(imax, r) < 0.0) basis.Psi.col(r) = -basis.Psi.col(r);
  }

  // reporting convention: spectrum entries below 1e-14 * Lambda_1 read as zero
  basis.eigenvalues = lambda;
  for (int i = 0; i < ns; ++i) {
    if (basis.eigenvalues(i) < 1e-14 * lambda1) basis.eigenvalues(i) = 0.0;
  }
  return basis;
}

/// Fraction of statistical energy missed by the leading R eigenvalues.
inline double residual_energy(const Vec& eigenvalues, int R) {
  if (R < 0 || R > eigenvalues.size()) throw std::invalid_argument("residual_energy: bad rank");
  const double total = eigenvalues.sum();
  if (total <= 0.0) return 0.0;
  return 1.0 - eigenvalues.head(R).sum() / total;
}

/// G-orthogonal projection of `target` onto range(Psi):
/// Psi (Psi^T G Psi)^{-1} Psi^T G target.
inline Vec best_fit_project(const Mat& Psi, const SpMat& G, const Vec& target) {
  const Mat GPsi = G * Psi;
  const Mat gram = Psi.transpose() * GPsi;
  Eigen::FullPivLU<Mat> lu(gram);
  if (!lu.isInvertible()) throw std::runtime_error("best_fit_project: singular reduced Gram matrix");
  return Psi * lu.solve(Vec(GPsi.transpose() * target));
}

}  // namespace stabrom
