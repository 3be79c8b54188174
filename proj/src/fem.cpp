// SPDX-License-Identifier: Apache-2.0
#include "multires/fem.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <string>

namespace multires {

namespace {

// Element stiffness of the two right triangles of a grid square, divided by
// the coefficient. Vertex order: lower {(0,0),(1,0),(1,1)}, upper
// {(0,0),(1,1),(0,1)} in cell-local grid steps. Scale-free in 2D.
constexpr double kLower[3][3] = {{0.5, -0.5, 0.0},
                                 {-0.5, 1.0, -0.5},
                                 {0.0, -0.5, 0.5}};
constexpr double kUpper[3][3] = {{0.5, 0.0, -0.5},
                                 {0.0, 0.5, -0.5},
                                 {-0.5, -0.5, 1.0}};

using Triplet = Eigen::Triplet<double>;

void scatter_element(const StructuredMesh& mesh, const int (*verts)[2],
                     const double elem[3][3], double coeff,
                     std::vector<Triplet>& out) {
  int idx[3];
  for (int a = 0; a < 3; ++a) idx[a] = mesh.interior_index(verts[a][0], verts[a][1]);
  for (int a = 0; a < 3; ++a) {
    if (idx[a] < 0) continue;
    for (int b = 0; b < 3; ++b) {
      if (idx[b] < 0) continue;
      out.emplace_back(idx[a], idx[b], coeff * elem[a][b]);
    }
  }
}

// kappa(cell) -> coefficient; shared by the gram and diffusion assemblies.
template <typename CoeffFn>
SparseOperator assemble_stiffness(const StructuredMesh& mesh, CoeffFn kappa) {
  const int n = mesh.interior_count();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.triangle_count()) * 9);
  for (int cy = 0; cy < mesh.cells_per_side(); ++cy) {
    for (int cx = 0; cx < mesh.cells_per_side(); ++cx) {
      const double k = kappa(cx, cy);
      const int lower[3][2] = {{cx, cy}, {cx + 1, cy}, {cx + 1, cy + 1}};
      const int upper[3][2] = {{cx, cy}, {cx + 1, cy + 1}, {cx, cy + 1}};
      scatter_element(mesh, lower, kLower, k, triplets);
      scatter_element(mesh, upper, kUpper, k, triplets);
    }
  }
  SparseOperator op;
  op.level = mesh.level;
  op.matrix.resize(n, n);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix.makeCompressed();
  return op;
}

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw NumericError(std::string(what) + ": non-finite entries");
  }
}

constexpr int kDirectSizeCutoff = 400000;

}  // namespace

void check_level(int have, int want, const char* what) {
  if (have != want) {
    throw LevelMismatch(std::string(what) + ": level " + std::to_string(have) +
                        " does not match level " + std::to_string(want));
  }
}

SparseOperator assemble_h1_gram(const StructuredMesh& mesh) {
  return assemble_stiffness(mesh, [](int, int) { return 1.0; });
}

SparseOperator assemble_diffusion_stiffness(
    const StructuredMesh& mesh, const std::array<double, 16>& kappa) {
  if (mesh.level < 2) {
    throw SubdomainMisaligned(
        "diffusion subdomains need level >= 2, got level " +
        std::to_string(mesh.level));
  }
  // 2^(s-2) grid cells per quarter-width subdomain side.
  const int cells_per_sub = mesh.cells_per_side() / 4;
  return assemble_stiffness(mesh, [&](int cx, int cy) {
    const int sx = cx / cells_per_sub;
    const int sy = cy / cells_per_sub;
    return kappa[static_cast<std::size_t>(sy * 4 + sx)];
  });
}

DualVector assemble_constant_load(const StructuredMesh& mesh, double value) {
  DualVector load;
  load.level = mesh.level;
  load.coeffs = Eigen::VectorXd::Zero(mesh.interior_count());
  const double per_vertex = value * mesh.width * mesh.width / 6.0;
  for (int cy = 0; cy < mesh.cells_per_side(); ++cy) {
    for (int cx = 0; cx < mesh.cells_per_side(); ++cx) {
      const int verts[6][2] = {{cx, cy},     {cx + 1, cy}, {cx + 1, cy + 1},
                               {cx, cy},     {cx + 1, cy + 1}, {cx, cy + 1}};
      for (const auto& v : verts) {
        const int idx = mesh.interior_index(v[0], v[1]);
        if (idx >= 0) load.coeffs[idx] += per_vertex;
      }
    }
  }
  return load;
}

FemVector solve_spd(const SparseOperator& op, const DualVector& rhs,
                    double tol, SolveMethod method) {
  check_level(rhs.level, op.level, "solve_spd rhs");
  if (op.matrix.rows() != rhs.coeffs.size()) {
    throw DimensionMismatch("solve_spd: operator and rhs sizes disagree");
  }
  check_finite(rhs.coeffs, "solve_spd rhs");

  const bool direct =
      method == SolveMethod::Direct ||
      (method == SolveMethod::Auto && op.matrix.rows() <= kDirectSizeCutoff);

  FemVector out;
  out.level = op.level;
  if (direct) {
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(op.matrix);
    if (llt.info() != Eigen::Success) {
      throw SingularOperator("solve_spd: Cholesky factorization failed");
    }
    out.coeffs = llt.solve(rhs.coeffs);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                             Eigen::Lower | Eigen::Upper>
        cg(op.matrix);
    cg.setTolerance(tol);
    cg.setMaxIterations(20000);
    out.coeffs = cg.solve(rhs.coeffs);
    if (cg.info() != Eigen::Success) {
      throw NonConvergence("solve_spd: conjugate gradients hit the iteration "
                           "cap before reaching tolerance");
    }
  }
  check_finite(out.coeffs, "solve_spd solution");
  return out;
}

double h1_inner(const FemVector& u, const FemVector& v,
                const SparseOperator& gram) {
  check_level(u.level, gram.level, "h1_inner u");
  check_level(v.level, gram.level, "h1_inner v");
  return u.coeffs.dot(gram.matrix * v.coeffs);
}

H1Gram::H1Gram(const StructuredMesh& mesh)
    : mesh_(mesh), gram_(assemble_h1_gram(mesh)) {
  llt_.compute(gram_.matrix);
  if (llt_.info() != Eigen::Success) {
    throw SingularOperator("H1Gram: Cholesky factorization failed");
  }
}

DualVector H1Gram::apply(const FemVector& u) const {
  check_level(u.level, level(), "H1Gram::apply");
  return DualVector{level(), gram_.matrix * u.coeffs};
}

double H1Gram::inner(const FemVector& u, const FemVector& v) const {
  check_level(u.level, level(), "H1Gram::inner u");
  check_level(v.level, level(), "H1Gram::inner v");
  return u.coeffs.dot(gram_.matrix * v.coeffs);
}

double H1Gram::norm(const FemVector& u) const {
  return std::sqrt(std::max(0.0, inner(u, u)));
}

FemVector H1Gram::lift(const DualVector& dual) const {
  check_level(dual.level, level(), "H1Gram::lift");
  FemVector out;
  out.level = level();
  out.coeffs = llt_.solve(dual.coeffs);
  check_finite(out.coeffs, "H1Gram::lift solution");
  return out;
}

FemVector riesz_lift(const StructuredMesh& mesh, const DualVector& dual,
                     double tol) {
  SparseOperator gram = assemble_h1_gram(mesh);
  return solve_spd(gram, dual, tol);
}

const H1Gram& GramHierarchy::at(int level) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(level);
  if (it == cache_.end()) {
    it = cache_.emplace(level, std::make_unique<H1Gram>(build_mesh(level)))
             .first;
  }
  return *it->second;
}

namespace {

// Interior coefficients padded into a full (side x side) grid, boundary zero.
Eigen::MatrixXd to_full_grid(const StructuredMesh& mesh,
                             const Eigen::VectorXd& v) {
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(mesh.side, mesh.side);
  for (int gy = 1; gy < mesh.side - 1; ++gy)
    for (int gx = 1; gx < mesh.side - 1; ++gx)
      full(gx, gy) = v[mesh.interior_index(gx, gy)];
  return full;
}

// One refinement step of P1 interpolation. New nodes on the square diagonal
// average the diagonal endpoints because the split runs lower-left to
// upper-right.
Eigen::VectorXd prolong_once(const StructuredMesh& coarse,
                             const StructuredMesh& fine,
                             const Eigen::VectorXd& v) {
  const Eigen::MatrixXd full = to_full_grid(coarse, v);
  Eigen::VectorXd out(fine.interior_count());
  for (int gy = 1; gy < fine.side - 1; ++gy) {
    for (int gx = 1; gx < fine.side - 1; ++gx) {
      const bool ex = (gx % 2 == 0);
      const bool ey = (gy % 2 == 0);
      double val;
      if (ex && ey) {
        val = full(gx / 2, gy / 2);
      } else if (!ex && ey) {
        val = 0.5 * (full((gx - 1) / 2, gy / 2) + full((gx + 1) / 2, gy / 2));
      } else if (ex && !ey) {
        val = 0.5 * (full(gx / 2, (gy - 1) / 2) + full(gx / 2, (gy + 1) / 2));
      } else {
        val = 0.5 * (full((gx - 1) / 2, (gy - 1) / 2) +
                     full((gx + 1) / 2, (gy + 1) / 2));
      }
      out[fine.interior_index(gx, gy)] = val;
    }
  }
  return out;
}

// Exact adjoint of prolong_once.
Eigen::VectorXd restrict_once(const StructuredMesh& fine,
                              const StructuredMesh& coarse,
                              const Eigen::VectorXd& r) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(coarse.side, coarse.side);
  for (int gy = 1; gy < fine.side - 1; ++gy) {
    for (int gx = 1; gx < fine.side - 1; ++gx) {
      const double w = r[fine.interior_index(gx, gy)];
      const bool ex = (gx % 2 == 0);
      const bool ey = (gy % 2 == 0);
      if (ex && ey) {
        acc(gx / 2, gy / 2) += w;
      } else if (!ex && ey) {
        acc((gx - 1) / 2, gy / 2) += 0.5 * w;
        acc((gx + 1) / 2, gy / 2) += 0.5 * w;
      } else if (ex && !ey) {
        acc(gx / 2, (gy - 1) / 2) += 0.5 * w;
        acc(gx / 2, (gy + 1) / 2) += 0.5 * w;
      } else {
        acc((gx - 1) / 2, (gy - 1) / 2) += 0.5 * w;
        acc((gx + 1) / 2, (gy + 1) / 2) += 0.5 * w;
      }
    }
  }
  Eigen::VectorXd out(coarse.interior_count());
  for (int gy = 1; gy < coarse.side - 1; ++gy)
    for (int gx = 1; gx < coarse.side - 1; ++gx)
      out[coarse.interior_index(gx, gy)] = acc(gx, gy);
  return out;
}

}  // namespace

FemVector prolong(const FemVector& v, int target_level) {
  if (target_level < v.level) {
    throw LevelMismatch("prolong: target level " +
                        std::to_string(target_level) + " below source level " +
                        std::to_string(v.level));
  }
  FemVector out = v;
  while (out.level < target_level) {
    const StructuredMesh coarse = build_mesh(out.level);
    const StructuredMesh fine = build_mesh(out.level + 1);
    out.coeffs = prolong_once(coarse, fine, out.coeffs);
    out.level += 1;
  }
  return out;
}

DualVector restrict_dual(const DualVector& r, int target_level) {
  if (target_level > r.level) {
    throw LevelMismatch("restrict_dual: target level " +
                        std::to_string(target_level) + " above source level " +
                        std::to_string(r.level));
  }
  if (target_level < 1) {
    throw LevelMismatch("restrict_dual: target level must be >= 1");
  }
  DualVector out = r;
  while (out.level > target_level) {
    const StructuredMesh fine = build_mesh(out.level);
    const StructuredMesh coarse = build_mesh(out.level - 1);
    out.coeffs = restrict_once(fine, coarse, out.coeffs);
    out.level -= 1;
  }
  return out;
}

double point_value(const StructuredMesh& mesh, const FemVector& u, double x,
                   double y) {
  check_level(u.level, mesh.level, "point_value");
  x = std::clamp(x, 0.0, 1.0);
  y = std::clamp(y, 0.0, 1.0);
  const double h = mesh.width;
  const int cx = std::min(static_cast<int>(x / h), mesh.cells_per_side() - 1);
  const int cy = std::min(static_cast<int>(y / h), mesh.cells_per_side() - 1);
  const double xi = x / h - cx;
  const double eta = y / h - cy;

  auto value_at = [&](int gx, int gy) {
    const int idx = mesh.interior_index(gx, gy);
    return idx >= 0 ? u.coeffs[idx] : 0.0;
  };
  // Barycentric coordinates on the lower or upper triangle of the cell.
  if (xi >= eta) {
    return value_at(cx, cy) * (1.0 - xi) + value_at(cx + 1, cy) * (xi - eta) +
           value_at(cx + 1, cy + 1) * eta;
  }
  return value_at(cx, cy) * (1.0 - eta) + value_at(cx + 1, cy + 1) * xi +
         value_at(cx, cy + 1) * (eta - xi);
}

bool OrthonormalSet::try_append(const H1Gram& gram, FemVector candidate,
                                double rel_drop_tol) {
  check_level(candidate.level, gram.level(), "OrthonormalSet::try_append");
  const double original = gram.norm(candidate);
  if (!(original > 0.0)) return false;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < vectors_.size(); ++j) {
      const double c = gvectors_[j].coeffs.dot(candidate.coeffs);
      candidate.coeffs -= c * vectors_[j].coeffs;
    }
  }
  const double nrm = gram.norm(candidate);
  if (nrm < rel_drop_tol * original) return false;
  candidate.coeffs /= nrm;
  gvectors_.push_back(gram.apply(candidate));
  vectors_.push_back(std::move(candidate));
  return true;
}

Eigen::VectorXd OrthonormalSet::project(const FemVector& u) const {
  Eigen::VectorXd out(size());
  for (int i = 0; i < size(); ++i) {
    check_level(u.level, gvectors_[i].level, "OrthonormalSet::project");
    out[i] = gvectors_[i].coeffs.dot(u.coeffs);
  }
  return out;
}

}  // namespace multires
