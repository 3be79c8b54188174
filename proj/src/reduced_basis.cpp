// SPDX-License-Identifier: Apache-2.0
#include "multires/reduced_basis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace multires {

namespace {

constexpr double kRankTol = 1e-12;

int argmax_tie_lowest(const Eigen::VectorXd& values) {
  int best = 0;
  for (int i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace

AffineReducedSpace greedy_build(const std::vector<FemVector>& pool,
                                std::span<const int> members,
                                const FemVector& offset, const H1Gram& gram,
                                const GreedyOptions& options,
                                const Eigen::VectorXd* pool_norms2) {
  if (members.empty()) {
    throw EmptyTrainingSet("greedy_build: no training snapshots");
  }
  check_level(offset.level, gram.level(), "greedy_build offset");
  for (int idx : members) {
    if (idx < 0 || idx >= static_cast<int>(pool.size())) {
      throw InvalidInput("greedy_build: member index out of range");
    }
  }

  const int count = static_cast<int>(members.size());
  const DualVector g_offset = gram.apply(offset);
  const double offset_norm2 = g_offset.coeffs.dot(offset.coeffs);

  // Squared distance of each member to the current space, updated per step.
  Eigen::VectorXd resid2(count);
  for (int i = 0; i < count; ++i) {
    const FemVector& u = pool[static_cast<std::size_t>(members[i])];
    check_level(u.level, gram.level(), "greedy_build snapshot");
    const double un2 = pool_norms2 ? (*pool_norms2)[members[i]]
                                   : gram.inner(u, u);
    const double cross = g_offset.coeffs.dot(u.coeffs);
    resid2[i] = std::max(0.0, un2 - 2.0 * cross + offset_norm2);
  }

  AffineReducedSpace space;
  space.offset = offset;
  OrthonormalSet ortho;
  space.eps_history.push_back(std::sqrt(resid2.maxCoeff()));

  while (static_cast<int>(ortho.size()) < options.max_dim &&
         space.eps_history.back() > options.target_eps) {
    const int pick = argmax_tie_lowest(resid2);
    const FemVector& u = pool[static_cast<std::size_t>(members[pick])];
    FemVector shifted{u.level, u.coeffs - offset.coeffs};
    if (!ortho.try_append(gram, std::move(shifted), options.drop_tol)) {
      break;  // nothing left to enrich with
    }
    space.picked.push_back(members[pick]);

    const DualVector& g_phi = ortho.gvectors().back();
    const double phi_dot_offset = g_phi.coeffs.dot(offset.coeffs);
    for (int i = 0; i < count; ++i) {
      const FemVector& ui = pool[static_cast<std::size_t>(members[i])];
      const double t = g_phi.coeffs.dot(ui.coeffs) - phi_dot_offset;
      resid2[i] = std::max(0.0, resid2[i] - t * t);
    }
    space.eps_history.push_back(std::sqrt(resid2.maxCoeff()));
  }

  space.basis = ortho.vectors();
  return space;
}

double dist_to(const AffineReducedSpace& space, const FemVector& u,
               const H1Gram& gram) {
  check_level(u.level, gram.level(), "dist_to");
  FemVector z{u.level, u.coeffs - space.offset.coeffs};
  for (const FemVector& phi : space.basis) {
    const double c = gram.inner(phi, z);
    z.coeffs -= c * phi.coeffs;
  }
  return gram.norm(z);
}

double inf_sup(const AffineReducedSpace& space, const MeasurementSpace& ms) {
  if (space.dim() == 0) return 1.0;
  const Eigen::MatrixXd c = cross_gramian(ms, space.basis);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(c);
  const double smin = svd.singularValues().minCoeff();
  if (smin < kRankTol) return std::numeric_limits<double>::infinity();
  // Orthonormal bases on both sides keep the singular values at most 1;
  // clamping guards the mu >= 1 invariant against roundoff.
  return 1.0 / std::min(smin, 1.0);
}

FemVector pbdw_estimate(const AffineReducedSpace& space,
                        const MeasurementSpace& ms, const Eigen::VectorXd& w) {
  if (w.size() != ms.size()) {
    throw DimensionMismatch("pbdw_estimate: expected " +
                            std::to_string(ms.size()) +
                            " measurement values, got " +
                            std::to_string(w.size()));
  }
  check_level(space.offset.level, ms.level(), "pbdw_estimate offset");
  if (space.dim() >= ms.size()) {
    throw DimensionMismatch(
        "pbdw_estimate: reduced dimension must stay below m");
  }

  const Eigen::VectorXd wt = w - ms.measure(space.offset);
  const int n = space.dim();

  Eigen::VectorXd a(n);
  Eigen::VectorXd slack = wt;
  if (n > 0) {
    const Eigen::MatrixXd c = cross_gramian(ms, space.basis);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(c);
    if (svd.singularValues().minCoeff() < kRankTol) {
      throw UnstableEstimate(
          "pbdw_estimate: measurement space nearly blind to the reduced "
          "space");
    }
    a = c.colPivHouseholderQr().solve(wt);
    slack = wt - c * a;
  }

  FemVector out = space.offset;
  for (int j = 0; j < n; ++j) {
    out.coeffs += a[j] * space.basis[static_cast<std::size_t>(j)].coeffs;
  }
  for (int i = 0; i < ms.size(); ++i) {
    out.coeffs +=
        slack[i] * ms.ortho_basis()[static_cast<std::size_t>(i)].coeffs;
  }
  return out;
}

}  // namespace multires
