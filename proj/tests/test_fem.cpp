// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <multires/fem.hpp>
#include <multires/rng.hpp>

using namespace multires;

namespace {

FemVector random_vector(const StructuredMesh& mesh, std::uint64_t seed) {
  UniformSampler rng(seed);
  FemVector v{mesh.level, Eigen::VectorXd(mesh.interior_count())};
  for (int i = 0; i < v.coeffs.size(); ++i) v.coeffs[i] = rng.in(-1.0, 1.0);
  return v;
}

DualVector random_dual(const StructuredMesh& mesh, std::uint64_t seed) {
  UniformSampler rng(seed);
  DualVector r{mesh.level, Eigen::VectorXd(mesh.interior_count())};
  for (int i = 0; i < r.coeffs.size(); ++i) r.coeffs[i] = rng.in(-1.0, 1.0);
  return r;
}

double entry(const Eigen::SparseMatrix<double>& m, int row, int col) {
  return m.coeff(row, col);
}

bool in_pattern(const Eigen::SparseMatrix<double>& m, int row, int col) {
  for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it)
    if (it.row() == row) return true;
  return false;
}

}  // namespace

TEST_CASE("unit stiffness stencil: diagonal 4, axis -1, split diagonal explicit 0") {
  StructuredMesh mesh = build_mesh(3);
  SparseOperator g = assemble_h1_gram(mesh);
  // Node in the middle of the grid, all eight grid neighbors interior.
  int c = mesh.interior_index(4, 4);
  CHECK(entry(g.matrix, c, c) == 4.0);
  CHECK(entry(g.matrix, c, mesh.interior_index(3, 4)) == -1.0);
  CHECK(entry(g.matrix, c, mesh.interior_index(5, 4)) == -1.0);
  CHECK(entry(g.matrix, c, mesh.interior_index(4, 3)) == -1.0);
  CHECK(entry(g.matrix, c, mesh.interior_index(4, 5)) == -1.0);
  // The split-diagonal couplings cancel for the unit coefficient but stay in
  // the sparsity pattern; the off-diagonal corners are not mesh edges at all.
  CHECK(entry(g.matrix, c, mesh.interior_index(5, 5)) == 0.0);
  CHECK(entry(g.matrix, c, mesh.interior_index(3, 3)) == 0.0);
  CHECK(in_pattern(g.matrix, c, mesh.interior_index(5, 5)));
  CHECK(in_pattern(g.matrix, c, mesh.interior_index(3, 3)));
  CHECK_FALSE(in_pattern(g.matrix, c, mesh.interior_index(5, 3)));
  CHECK_FALSE(in_pattern(g.matrix, c, mesh.interior_index(3, 5)));
}

TEST_CASE("stencil values do not depend on the mesh level") {
  for (int level : {2, 4, 5}) {
    StructuredMesh mesh = build_mesh(level);
    SparseOperator g = assemble_h1_gram(mesh);
    int mid = mesh.interior_side() / 2 + 1;
    int c = mesh.interior_index(mid, mid);
    CHECK(entry(g.matrix, c, c) == 4.0);
    CHECK(entry(g.matrix, c, mesh.interior_index(mid + 1, mid)) == -1.0);
  }
  // Level 1 has a single dof.
  SparseOperator g1 = assemble_h1_gram(build_mesh(1));
  REQUIRE(g1.matrix.rows() == 1);
  CHECK(entry(g1.matrix, 0, 0) == 4.0);
}

TEST_CASE("constant load is value times h squared at every node") {
  StructuredMesh mesh = build_mesh(2);
  DualVector f = assemble_constant_load(mesh, 1.0);
  REQUIRE(f.coeffs.size() == 9);
  // Assembled triangle by triangle, so exact up to a few ulps of h^2.
  for (int i = 0; i < f.coeffs.size(); ++i)
    CHECK(std::abs(f.coeffs[i] - 0.0625) <= 1e-15);

  DualVector f3 = assemble_constant_load(mesh, 3.0);
  CHECK((f3.coeffs - 3.0 * f.coeffs).lpNorm<Eigen::Infinity>() <= 1e-15);

  DualVector f0 = assemble_constant_load(mesh, 0.0);
  CHECK(f0.coeffs.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("solve_spd round trip, direct and iterative") {
  StructuredMesh mesh = build_mesh(4);
  SparseOperator g = assemble_h1_gram(mesh);
  FemVector v = random_vector(mesh, 11);
  DualVector rhs{mesh.level, g.matrix * v.coeffs};

  for (SolveMethod method : {SolveMethod::Direct, SolveMethod::ConjugateGradient,
                             SolveMethod::Auto}) {
    FemVector u = solve_spd(g, rhs, 1e-12, method);
    CHECK((u.coeffs - v.coeffs).norm() <= 1e-8 * v.coeffs.norm());
  }

  DualVector zero{mesh.level, Eigen::VectorXd::Zero(mesh.interior_count())};
  CHECK(solve_spd(g, zero, 1e-12).coeffs.norm() == 0.0);
}

TEST_CASE("Riesz lift satisfies the variational identity") {
  StructuredMesh mesh = build_mesh(4);
  H1Gram gram(mesh);
  DualVector d = random_dual(mesh, 5);
  FemVector e = gram.lift(d);
  for (std::uint64_t s : {21, 22, 23}) {
    FemVector z = random_vector(mesh, s);
    double lhs = gram.inner(e, z);
    double rhs = d.coeffs.dot(z.coeffs);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(rhs)));
  }
  // Convenience entry point agrees with the cached path.
  FemVector e2 = riesz_lift(mesh, d, 1e-12);
  CHECK((e2.coeffs - e.coeffs).norm() <= 1e-8 * e.coeffs.norm());
}

TEST_CASE("gram wrapper is consistent with the raw operator") {
  StructuredMesh mesh = build_mesh(3);
  H1Gram gram(mesh);
  FemVector u = random_vector(mesh, 31);
  FemVector v = random_vector(mesh, 32);
  CHECK(gram.inner(u, v) == doctest::Approx(h1_inner(u, v, gram.op())).epsilon(1e-14));
  CHECK(gram.inner(u, v) == doctest::Approx(gram.inner(v, u)).epsilon(1e-14));
  CHECK(gram.norm(u) == doctest::Approx(std::sqrt(gram.inner(u, u))).epsilon(1e-14));
  DualVector gu = gram.apply(u);
  CHECK((gu.coeffs - gram.op().matrix * u.coeffs).lpNorm<Eigen::Infinity>() == 0.0);
  // A single interior hat function has squared energy 4.
  FemVector hat{mesh.level, Eigen::VectorXd::Zero(mesh.interior_count())};
  hat.coeffs[10] = 1.0;
  CHECK(gram.inner(hat, hat) == 4.0);
}

TEST_CASE("gram matrices are symmetric positive definite") {
  for (int level : {1, 2, 3}) {
    SparseOperator g = assemble_h1_gram(build_mesh(level));
    Eigen::MatrixXd dense = Eigen::MatrixXd(g.matrix);
    CHECK((dense - dense.transpose()).lpNorm<Eigen::Infinity>() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("prolongation reproduces the function on the finer mesh") {
  StructuredMesh coarse = build_mesh(3);
  StructuredMesh fine = build_mesh(5);
  FemVector u = random_vector(coarse, 41);
  FemVector pu = prolong(u, 5);
  REQUIRE(pu.level == 5);
  REQUIRE(pu.coeffs.size() == fine.interior_count());

  UniformSampler rng(99);
  for (int t = 0; t < 40; ++t) {
    double x = rng.unit();
    double y = rng.unit();
    CHECK(point_value(fine, pu, x, y) ==
          doctest::Approx(point_value(coarse, u, x, y)).epsilon(1e-12));
  }

  // Exact interpolation implies exact inner products.
  H1Gram gc(coarse);
  H1Gram gf(fine);
  FemVector v = random_vector(coarse, 42);
  FemVector pv = prolong(v, 5);
  CHECK(std::abs(gf.inner(pu, pv) - gc.inner(u, v)) <=
        1e-12 * (1.0 + std::abs(gc.inner(u, v))));
  CHECK(std::abs(gf.norm(pu) - gc.norm(u)) <= 1e-12 * gc.norm(u));

  // Two single-level steps equal one two-level step.
  FemVector two_step = prolong(prolong(u, 4), 5);
  CHECK((two_step.coeffs - pu.coeffs).lpNorm<Eigen::Infinity>() == 0.0);

  // Same level is the identity.
  FemVector same = prolong(u, 3);
  CHECK((same.coeffs - u.coeffs).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("restriction is the exact adjoint of prolongation") {
  StructuredMesh coarse = build_mesh(2);
  StructuredMesh fine = build_mesh(4);
  for (std::uint64_t s : {51, 52, 53, 54}) {
    DualVector r = random_dual(fine, s);
    FemVector z = random_vector(coarse, s + 100);
    DualVector rc = restrict_dual(r, 2);
    REQUIRE(rc.level == 2);
    double lhs = rc.coeffs.dot(z.coeffs);
    double rhs = r.coeffs.dot(prolong(z, 4).coeffs);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * r.coeffs.norm() * z.coeffs.norm());
  }

  DualVector zero{4, Eigen::VectorXd::Zero(fine.interior_count())};
  CHECK(restrict_dual(zero, 2).coeffs.norm() == 0.0);
}

TEST_CASE("restricting the fine constant load gives the coarse constant load") {
  for (int cl : {2, 3}) {
    StructuredMesh coarse = build_mesh(cl);
    StructuredMesh fine = build_mesh(cl + 2);
    DualVector lf = assemble_constant_load(fine, 1.0);
    DualVector lc = assemble_constant_load(coarse, 1.0);
    DualVector r = restrict_dual(lf, cl);
    CHECK((r.coeffs - lc.coeffs).lpNorm<Eigen::Infinity>() <= 1e-15);
  }
}

TEST_CASE("level mismatches are rejected") {
  StructuredMesh mesh = build_mesh(3);
  H1Gram gram(mesh);
  FemVector u = random_vector(mesh, 61);
  CHECK_THROWS_AS(prolong(u, 2), LevelMismatch);
  DualVector r = random_dual(mesh, 62);
  CHECK_THROWS_AS(restrict_dual(r, 4), LevelMismatch);
  FemVector w = random_vector(build_mesh(2), 63);
  CHECK_THROWS_AS(gram.inner(u, w), LevelMismatch);
  CHECK_THROWS_AS(gram.apply(w), LevelMismatch);
}

TEST_CASE("point evaluation interpolates nodal values") {
  StructuredMesh mesh = build_mesh(3);
  FemVector u = random_vector(mesh, 71);
  // Exact at the nodes.
  CHECK(point_value(mesh, u, 3 * mesh.width, 5 * mesh.width) ==
        doctest::Approx(u.coeffs[mesh.interior_index(3, 5)]).epsilon(1e-15));
  // Zero on the boundary.
  CHECK(point_value(mesh, u, 0.0, 0.37) == 0.0);
  CHECK(point_value(mesh, u, 0.42, 1.0) == 0.0);
  // Linear along a horizontal edge: midpoint is the average of the endpoints.
  double a = u.coeffs[mesh.interior_index(2, 4)];
  double b = u.coeffs[mesh.interior_index(3, 4)];
  CHECK(point_value(mesh, u, 2.5 * mesh.width, 4 * mesh.width) ==
        doctest::Approx(0.5 * (a + b)).epsilon(1e-13));
}

TEST_CASE("gram hierarchy caches one gram per level") {
  GramHierarchy grams;
  const H1Gram& a = grams.at(3);
  const H1Gram& b = grams.at(3);
  CHECK(&a == &b);
  CHECK(a.level() == 3);
  CHECK(grams.at(2).level() == 2);
}

TEST_CASE("orthonormal set builds an orthonormal basis and drops dependents") {
  StructuredMesh mesh = build_mesh(3);
  H1Gram gram(mesh);
  OrthonormalSet set;
  for (std::uint64_t s : {81, 82, 83, 84}) {
    CHECK(set.try_append(gram, random_vector(mesh, s), 1e-10));
  }
  REQUIRE(set.size() == 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double target = i == j ? 1.0 : 0.0;
      CHECK(std::abs(gram.inner(set.vectors()[i], set.vectors()[j]) - target) <=
            1e-10);
    }
  }
  // G q is stored alongside q.
  for (int i = 0; i < 4; ++i) {
    CHECK((set.gvectors()[i].coeffs -
           gram.op().matrix * set.vectors()[i].coeffs)
              .lpNorm<Eigen::Infinity>() <= 1e-12);
  }
  // A linear combination of members cannot enrich the set.
  FemVector combo{3, 0.3 * set.vectors()[0].coeffs - 1.7 * set.vectors()[2].coeffs};
  CHECK_FALSE(set.try_append(gram, combo, 1e-10));
  CHECK(set.size() == 4);
  // Projection of a member recovers its coordinate vector.
  Eigen::VectorXd p = set.project(set.vectors()[1]);
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(4, 1);
  CHECK((p - e1).lpNorm<Eigen::Infinity>() <= 1e-10);
}
