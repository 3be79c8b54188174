// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "multires/fem.hpp"

namespace multires {

// Axis-aligned square observation window, fully inside the unit square.
struct MeasurementBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double width = 0.0;
};

// m local-average functionals l_i(u) = |B_i|^-1 int_{B_i} u together with
// their Riesz representers and an H1-orthonormal basis of the measurement
// space W = span of the representers.
class MeasurementSpace {
 public:
  int size() const { return static_cast<int>(duals_.size()); }
  int level() const { return level_; }
  const std::vector<MeasurementBox>& boxes() const { return boxes_; }
  const std::vector<DualVector>& duals() const { return duals_; }
  const std::vector<FemVector>& representers() const { return representers_; }
  const std::vector<FemVector>& ortho_basis() const { return ortho_.vectors(); }
  const std::vector<DualVector>& ortho_duals() const { return ortho_.gvectors(); }

  /// l_i(u), the raw local average.
  double apply_functional(int i, const FemVector& u) const;

  /// Coordinates <q_i, u> of P_W u in the orthonormal basis.
  Eigen::VectorXd measure(const FemVector& u) const;

  /// sum_i w_i q_i; composing with measure() reproduces P_W u.
  FemVector reconstruct(const Eigen::VectorXd& w) const;

 private:
  int level_ = 0;
  std::vector<MeasurementBox> boxes_;
  std::vector<DualVector> duals_;
  std::vector<FemVector> representers_;
  OrthonormalSet ortho_;

  friend MeasurementSpace make_measurements(const H1Gram& gram, int m,
                                            double width, std::uint64_t seed);
  friend MeasurementSpace make_measurements_with_boxes(
      const H1Gram& gram, const std::vector<MeasurementBox>& boxes);
};

/// m boxes of the given width with lower-left corners drawn uniformly from
/// [0, 1-width]^2. Throws DependentRepresenters if the representers fail to
/// span an m-dimensional space.
MeasurementSpace make_measurements(const H1Gram& gram, int m, double width,
                                   std::uint64_t seed);

MeasurementSpace make_measurements_with_boxes(
    const H1Gram& gram, const std::vector<MeasurementBox>& boxes);

/// Local-average functional of one box, assembled by exact clipping of the
/// P1 elements against the box.
DualVector assemble_box_average(const StructuredMesh& mesh,
                                const MeasurementBox& box);

/// Cross-Gramian C_ij = <q_i, phi_j> of an H1-orthonormal system phi against
/// the measurement basis.
Eigen::MatrixXd cross_gramian(const MeasurementSpace& ms,
                              const std::vector<FemVector>& basis);

}  // namespace multires
