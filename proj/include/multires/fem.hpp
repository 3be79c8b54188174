// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <array>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "multires/errors.hpp"
#include "multires/mesh.hpp"

namespace multires {

// Nodal coefficients of a P1 function on the interior nodes of a level mesh.
struct FemVector {
  int level = 0;
  Eigen::VectorXd coeffs;
};

// A functional on the same dof set. Kept as a distinct type so primal and
// dual quantities cannot be mixed up silently.
struct DualVector {
  int level = 0;
  Eigen::VectorXd coeffs;
};

struct SparseOperator {
  int level = 0;
  Eigen::SparseMatrix<double> matrix;
};

void check_level(int have, int want, const char* what);

/// H1_0 Gram matrix (unit-coefficient stiffness). Entries are h-independent:
/// diagonal 4, axis neighbors -1, split-diagonal neighbors explicit 0.
SparseOperator assemble_h1_gram(const StructuredMesh& mesh);

/// Stiffness for a diffusion coefficient that is constant on each of the 16
/// quarter-width subdomains (4x4 grid, x fastest, bottom row first).
/// Requires level >= 2 so every element lies inside a single subdomain.
SparseOperator assemble_diffusion_stiffness(const StructuredMesh& mesh,
                                            const std::array<double, 16>& kappa);

/// Load functional of the constant right-hand side: every entry value * h^2.
DualVector assemble_constant_load(const StructuredMesh& mesh, double value);

enum class SolveMethod { Auto, Direct, ConjugateGradient };

/// Solves op * u = rhs for a symmetric positive definite operator. Direct
/// sparse Cholesky by default; conjugate gradients with Jacobi
/// preconditioning and relative tolerance tol above the direct size cutoff.
FemVector solve_spd(const SparseOperator& op, const DualVector& rhs,
                    double tol, SolveMethod method = SolveMethod::Auto);

double h1_inner(const FemVector& u, const FemVector& v,
                const SparseOperator& gram);

/// Gram operator of one level bundled with its Cholesky factorization so
/// Riesz lifts and inner products can be evaluated repeatedly at low cost.
class H1Gram {
 public:
  explicit H1Gram(const StructuredMesh& mesh);

  int level() const { return mesh_.level; }
  const StructuredMesh& mesh() const { return mesh_; }
  const SparseOperator& op() const { return gram_; }

  DualVector apply(const FemVector& u) const;
  double inner(const FemVector& u, const FemVector& v) const;
  double norm(const FemVector& u) const;

  /// Riesz representer: solves G e = dual.
  FemVector lift(const DualVector& dual) const;

 private:
  StructuredMesh mesh_;
  SparseOperator gram_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt_;
};

/// Riesz lift against a freshly assembled Gram matrix. Convenience entry
/// point; hot paths should share an H1Gram or GramHierarchy instead.
FemVector riesz_lift(const StructuredMesh& mesh, const DualVector& dual,
                     double tol);

/// Lazily constructed per-level H1Gram cache, safe for concurrent readers.
class GramHierarchy {
 public:
  const H1Gram& at(int level) const;

 private:
  mutable std::mutex mutex_;
  mutable std::map<int, std::unique_ptr<H1Gram>> cache_;
};

/// P1 interpolation onto the nested mesh at target_level >= v.level.
/// Preserves the function exactly, hence all H1 inner products.
FemVector prolong(const FemVector& v, int target_level);

/// Adjoint of prolong: restricts a functional to target_level <= r.level.
DualVector restrict_dual(const DualVector& r, int target_level);

/// Point evaluation of the P1 interpolant (boundary values are zero).
double point_value(const StructuredMesh& mesh, const FemVector& u, double x,
                   double y);

/// Incrementally built H1-orthonormal set (modified Gram-Schmidt with one
/// reorthogonalization pass). Keeps G*q alongside q so projections onto the
/// set cost one dot product per member.
class OrthonormalSet {
 public:
  int size() const { return static_cast<int>(vectors_.size()); }
  const std::vector<FemVector>& vectors() const { return vectors_; }
  const std::vector<DualVector>& gvectors() const { return gvectors_; }

  /// Orthonormalizes candidate against the set and appends it. Returns false
  /// without appending when the residual norm drops below
  /// rel_drop_tol * ||candidate||.
  bool try_append(const H1Gram& gram, FemVector candidate, double rel_drop_tol);

  /// Coefficients <q_i, u> of the projection onto the set.
  Eigen::VectorXd project(const FemVector& u) const;

 private:
  std::vector<FemVector> vectors_;
  std::vector<DualVector> gvectors_;
};

}  // namespace multires
