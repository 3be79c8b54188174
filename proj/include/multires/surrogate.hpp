// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "multires/fem.hpp"
#include "multires/problem.hpp"

namespace multires {

// Quadratic form of the squared dual residual norm at one level:
// R^2(y) = c + 2 b'y + y'Qy packed as the (d+1)x(d+1) Gramian of the lifted
// residual components, index 0 holding the parameter-independent part.
struct SurrogateQuadratic {
  int level = 0;
  Eigen::MatrixXd gramian;
  Eigen::MatrixXd lifts;  // columns e_0 .. e_d at `level`
  ParameterBox box;

  int dim() const { return static_cast<int>(gramian.rows()) - 1; }
  double constant() const { return gramian(0, 0); }
  Eigen::VectorXd linear() const { return gramian.col(0).tail(dim()); }
  Eigen::MatrixXd quadratic() const {
    return gramian.bottomRightCorner(dim(), dim());
  }
  double value_at(const ParameterPoint& y) const;
};

struct BoxMinimum {
  ParameterPoint minimizer;
  double value = 0.0;  // quadratic value at the minimizer, clamped >= 0
  bool converged = false;
  long iterations = 0;
};

struct SurrogateResult {
  double value = 0.0;     // S, evaluated as the exact residual norm at y*
  double value_sq = 0.0;  // S^2
  double form_value = 0.0;  // the QP objective at y* (cancellation-prone)
  ParameterPoint minimizer;
  bool converged = false;
};

/// Residual functionals r_j = A_j v - f_j assembled at the problem level and
/// restricted to target_level. With the operator family's sign convention the
/// combined residual at y is exactly r_0 + sum_j y_j r_j.
std::vector<DualVector> residual_duals(const AffineParametricProblem& problem,
                                       const FemVector& v, int target_level);

/// Lifts the residual components at `level` and assembles their Gramian.
SurrogateQuadratic build_quadratic(const AffineParametricProblem& problem,
                                   const GramHierarchy& grams,
                                   const FemVector& v, int level);

/// Box-constrained minimization of the residual quadratic: projected
/// gradient descent with Nesterov acceleration and eight deterministic
/// starting points. Flags (instead of throwing) when the iteration cap is
/// reached before the projected-gradient tolerance.
BoxMinimum minimize_box(const SurrogateQuadratic& q);

/// Shared-state surrogate evaluation: restriction, lift, Gramian, box QP.
class SurrogateEvaluator {
 public:
  SurrogateEvaluator(const AffineParametricProblem& problem,
                     const GramHierarchy& grams)
      : problem_(problem), grams_(grams) {}

  std::vector<DualVector> fine_duals(const FemVector& v) const;
  SurrogateResult evaluate_from_duals(const std::vector<DualVector>& duals,
                                      int level) const;
  SurrogateResult evaluate(const FemVector& v, int level) const;

  const AffineParametricProblem& problem() const { return problem_; }

 private:
  const AffineParametricProblem& problem_;
  const GramHierarchy& grams_;
};

/// One-shot surrogate distance S(v) at the given level.
SurrogateResult surrogate(const AffineParametricProblem& problem,
                          const GramHierarchy& grams, const FemVector& v,
                          int level);

}  // namespace multires
