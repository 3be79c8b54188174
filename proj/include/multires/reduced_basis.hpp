// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "multires/fem.hpp"
#include "multires/measurement.hpp"

namespace multires {

// Affine reduced space V = offset + span(basis) with an H1-orthonormal basis.
struct AffineReducedSpace {
  FemVector offset;
  std::vector<FemVector> basis;
  std::vector<int> picked;           // training indices of the chosen snapshots
  std::vector<double> eps_history;   // worst training distance after each step
  double mu = 1.0;                   // inf-sup vs the measurement space
  double sigma_est = 0.0;            // mu * eps_est

  int dim() const { return static_cast<int>(basis.size()); }
  double eps_est() const {
    return eps_history.empty() ? 0.0 : eps_history.back();
  }
};

struct GreedyOptions {
  int max_dim = 0;
  double target_eps = 0.0;
  // Candidates whose orthogonalization residual falls below
  // drop_tol * ||candidate|| cannot enrich the space and stop the build.
  double drop_tol = 1e-10;
};

/// Greedy build over pool[members]: repeatedly picks the member farthest from
/// the current space (ties to the lowest index) and orthonormalizes it in.
/// eps_history[0] is the worst distance to the bare offset; one entry is
/// appended per accepted basis vector, so the history is non-increasing.
/// pool_norms2 optionally carries precomputed <u_i, u_i> for the whole pool.
AffineReducedSpace greedy_build(const std::vector<FemVector>& pool,
                                std::span<const int> members,
                                const FemVector& offset, const H1Gram& gram,
                                const GreedyOptions& options,
                                const Eigen::VectorXd* pool_norms2 = nullptr);

/// Distance ||u - P_V u|| of u to the affine space.
double dist_to(const AffineReducedSpace& space, const FemVector& u,
               const H1Gram& gram);

/// Stability constant mu(V, W) = 1 / smin of the cross-Gramian; 1 for the
/// zero-dimensional space, +infinity below the rank tolerance.
double inf_sup(const AffineReducedSpace& space, const MeasurementSpace& ms);

/// Measurement-consistent reconstruction: the minimizer of dist(v, V) over
/// all v with P_W v = reconstruct(w).
FemVector pbdw_estimate(const AffineReducedSpace& space,
                        const MeasurementSpace& ms, const Eigen::VectorXd& w);

}  // namespace multires
