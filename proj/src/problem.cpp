// SPDX-License-Identifier: Apache-2.0
#include "multires/problem.hpp"

#include <algorithm>
#include <string>

#include "multires/rng.hpp"

namespace multires {

namespace {

// Positions of each nonzero of sub inside base's compressed storage, or
// nullopt-like failure (empty + false) when sub leaves base's pattern.
bool align_pattern(const Eigen::SparseMatrix<double>& base,
                   const Eigen::SparseMatrix<double>& sub,
                   std::vector<std::pair<int, double>>& out) {
  out.clear();
  const int* outer = base.outerIndexPtr();
  const int* inner = base.innerIndexPtr();
  for (int col = 0; col < sub.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sub, col); it; ++it) {
      const int* begin = inner + outer[col];
      const int* end = inner + outer[col + 1];
      const int* pos = std::lower_bound(begin, end, it.row());
      if (pos == end || *pos != it.row()) return false;
      out.emplace_back(static_cast<int>(pos - inner), it.value());
    }
  }
  return true;
}

}  // namespace

AffineParametricProblem make_affine_problem(
    std::vector<SparseOperator> operators, std::vector<DualVector> loads,
    ParameterBox box, Eigen::VectorXd coefficients) {
  if (operators.empty()) {
    throw InvalidInput("affine problem needs at least the base operator A_0");
  }
  if (loads.size() != operators.size()) {
    throw DimensionMismatch("affine problem: " +
                            std::to_string(operators.size()) +
                            " operators but " + std::to_string(loads.size()) +
                            " loads");
  }
  const int d = static_cast<int>(operators.size()) - 1;
  if (box.dim() != d) {
    throw DimensionMismatch("affine problem: parameter box dimension " +
                            std::to_string(box.dim()) + " but d = " +
                            std::to_string(d));
  }
  const int level = operators[0].level;
  const auto rows = operators[0].matrix.rows();
  for (const auto& op : operators) {
    check_level(op.level, level, "affine problem operator");
    if (op.matrix.rows() != rows || op.matrix.cols() != rows) {
      throw DimensionMismatch("affine problem: operator size mismatch");
    }
  }
  for (const auto& f : loads) {
    check_level(f.level, level, "affine problem load");
    if (f.coeffs.size() != rows) {
      throw DimensionMismatch("affine problem: load size mismatch");
    }
  }

  AffineParametricProblem p;
  p.dim = d;
  p.level = level;
  p.operators = std::move(operators);
  p.loads = std::move(loads);
  p.box = std::move(box);
  p.coefficients = std::move(coefficients);
  p.mesh_ = build_mesh(level);
  p.aligned_.resize(static_cast<std::size_t>(d));
  p.aligned_ok_ = true;
  for (int j = 1; j <= d && p.aligned_ok_; ++j) {
    p.aligned_ok_ = align_pattern(p.operators[0].matrix,
                                  p.operators[static_cast<std::size_t>(j)].matrix,
                                  p.aligned_[static_cast<std::size_t>(j - 1)]);
  }
  if (!p.aligned_ok_) p.aligned_.clear();
  return p;
}

AffineParametricProblem build_diffusion_problem(int level, double c_rule) {
  if (!(c_rule > 0.0 && c_rule < 1.0)) {
    throw InvalidInput("diffusion contrast rule must lie in (0, 1), got " +
                       std::to_string(c_rule));
  }
  const StructuredMesh mesh = build_mesh(level);
  constexpr int d = 16;

  std::vector<SparseOperator> operators;
  operators.reserve(d + 1);
  operators.push_back(assemble_h1_gram(mesh));

  Eigen::VectorXd c(d);
  for (int j = 1; j <= d; ++j) {
    c[j - 1] = c_rule / static_cast<double>(j);
    std::array<double, 16> kappa{};
    kappa[static_cast<std::size_t>(j - 1)] = c[j - 1];
    operators.push_back(assemble_diffusion_stiffness(mesh, kappa));
  }

  std::vector<DualVector> loads;
  loads.reserve(d + 1);
  loads.push_back(assemble_constant_load(mesh, 1.0));
  for (int j = 1; j <= d; ++j) {
    loads.push_back(DualVector{level, Eigen::VectorXd::Zero(mesh.interior_count())});
  }

  return make_affine_problem(std::move(operators), std::move(loads),
                             ParameterBox::unit_cube(d), std::move(c));
}

SparseOperator instantiate(const AffineParametricProblem& problem,
                           const ParameterPoint& y) {
  if (y.size() != problem.dim) {
    throw DimensionMismatch("instantiate: parameter has dimension " +
                            std::to_string(y.size()) + ", expected " +
                            std::to_string(problem.dim));
  }
  if (!problem.box.contains(y)) {
    throw OutOfBox("instantiate: parameter outside the admissible box");
  }

  SparseOperator out;
  out.level = problem.level;
  out.matrix = problem.operators[0].matrix;
  if (problem.aligned_ok_) {
    double* values = out.matrix.valuePtr();
    for (int j = 0; j < problem.dim; ++j) {
      const double yj = y[j];
      if (yj == 0.0) continue;
      for (const auto& [pos, val] : problem.aligned_[static_cast<std::size_t>(j)]) {
        values[pos] += yj * val;
      }
    }
  } else {
    for (int j = 0; j < problem.dim; ++j) {
      if (y[j] == 0.0) continue;
      out.matrix =
          (out.matrix +
           y[j] * problem.operators[static_cast<std::size_t>(j + 1)].matrix)
              .eval();
    }
    out.matrix.makeCompressed();
  }
  return out;
}

DualVector load_at(const AffineParametricProblem& problem,
                   const ParameterPoint& y) {
  if (y.size() != problem.dim) {
    throw DimensionMismatch("load_at: parameter dimension mismatch");
  }
  if (!problem.box.contains(y)) {
    throw OutOfBox("load_at: parameter outside the problem box");
  }
  DualVector out = problem.loads[0];
  for (int j = 0; j < problem.dim; ++j) {
    if (y[j] == 0.0) continue;
    out.coeffs += y[j] * problem.loads[static_cast<std::size_t>(j + 1)].coeffs;
  }
  return out;
}

FemVector solve_forward(const AffineParametricProblem& problem,
                        const ParameterPoint& y, double tol) {
  const SparseOperator op = instantiate(problem, y);
  const DualVector rhs = load_at(problem, y);
  try {
    return solve_spd(op, rhs, tol);
  } catch (const SingularOperator& e) {
    throw LostEllipticity(std::string("solve_forward: ") + e.what());
  }
}

std::vector<ParameterPoint> sample_parameters(int n, std::uint64_t seed,
                                              const ParameterBox& box) {
  if (n < 0) throw InvalidInput("sample_parameters: negative count");
  UniformSampler sampler(seed);
  std::vector<ParameterPoint> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    ParameterPoint y(box.dim());
    for (int j = 0; j < box.dim(); ++j) {
      y[j] = sampler.in(box.lower[j], box.upper[j]);
    }
    out.push_back(std::move(y));
  }
  return out;
}

}  // namespace multires
