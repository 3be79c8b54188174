// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "multires/fem.hpp"

namespace multires {

using ParameterPoint = Eigen::VectorXd;

struct ParameterBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const ParameterPoint& y) const {
    return y.size() == lower.size() && (y.array() >= lower.array()).all() &&
           (y.array() <= upper.array()).all();
  }

  static ParameterBox unit_cube(int d) {
    return ParameterBox{Eigen::VectorXd::Constant(d, -1.0),
                        Eigen::VectorXd::Constant(d, 1.0)};
  }
};

// Parameter-affine operator family A(y) = A_0 + sum_j y_j A_j with loads
// f(y) = f_0 + sum_j y_j f_j over a parameter box.
struct AffineParametricProblem {
  int dim = 0;    // d
  int level = 0;  // discretization level of the operators
  std::vector<SparseOperator> operators;  // A_0 .. A_d
  std::vector<DualVector> loads;          // f_0 .. f_d
  ParameterBox box;
  Eigen::VectorXd coefficients;  // c_j of the diffusion instance, else empty

  const StructuredMesh& mesh() const { return mesh_; }

 private:
  StructuredMesh mesh_;
  // A_j nonzeros mapped into A_0's compressed value layout; empty when some
  // A_j has entries outside A_0's pattern.
  std::vector<std::vector<std::pair<int, double>>> aligned_;
  bool aligned_ok_ = false;

  friend AffineParametricProblem make_affine_problem(
      std::vector<SparseOperator> operators, std::vector<DualVector> loads,
      ParameterBox box, Eigen::VectorXd coefficients);
  friend SparseOperator instantiate(const AffineParametricProblem& problem,
                                    const ParameterPoint& y);
};

/// Validates the pieces and precomputes the fast instantiation layout.
AffineParametricProblem make_affine_problem(
    std::vector<SparseOperator> operators, std::vector<DualVector> loads,
    ParameterBox box, Eigen::VectorXd coefficients = Eigen::VectorXd());

/// The 16-subdomain diffusion problem: a(x, y) = 1 + sum_j c_j y_j on the
/// j-th quarter-width square, c_j = c_rule / j, constant unit load.
AffineParametricProblem build_diffusion_problem(int level, double c_rule);

/// A(y), exactly symmetric. Throws OutOfBox for y outside the parameter box.
SparseOperator instantiate(const AffineParametricProblem& problem,
                           const ParameterPoint& y);

/// f(y).
DualVector load_at(const AffineParametricProblem& problem,
                   const ParameterPoint& y);

/// Solves A(y) u = f(y). Cholesky failure surfaces as LostEllipticity.
FemVector solve_forward(const AffineParametricProblem& problem,
                        const ParameterPoint& y, double tol);

/// n i.i.d. uniform draws from the box; deterministic in (n, seed, box).
std::vector<ParameterPoint> sample_parameters(int n, std::uint64_t seed,
                                              const ParameterBox& box);

}  // namespace multires
