// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <multires/problem.hpp>
#include <multires/rng.hpp>

using namespace multires;

namespace {

// Dirichlet Laplacian on the unit square with unit load: value at the center,
// from the double sine series summed over odd frequencies up to 20001.
constexpr double kCenterValue = 0.073671353281547;

ParameterPoint random_point(int d, std::uint64_t seed) {
  UniformSampler rng(seed);
  ParameterPoint y(d);
  for (int j = 0; j < d; ++j) y[j] = rng.in(-1.0, 1.0);
  return y;
}

}  // namespace

TEST_CASE("diffusion family structure and coefficient rule") {
  AffineParametricProblem p = build_diffusion_problem(3, 0.9);
  CHECK(p.dim == 16);
  CHECK(p.level == 3);
  REQUIRE(p.operators.size() == 17);
  REQUIRE(p.loads.size() == 17);
  REQUIRE(p.coefficients.size() == 16);
  CHECK(p.coefficients[0] == 0.9);
  CHECK(p.coefficients[1] == doctest::Approx(0.45).epsilon(1e-15));
  CHECK(p.coefficients[15] == doctest::Approx(0.05625).epsilon(1e-15));
  CHECK(p.box.dim() == 16);
  CHECK(p.box.lower.minCoeff() == -1.0);
  CHECK(p.box.upper.maxCoeff() == 1.0);

  AffineParametricProblem q = build_diffusion_problem(3, 0.99);
  CHECK(q.coefficients[0] == 0.99);

  // The load family is a parameter-independent constant right-hand side.
  DualVector f0 = assemble_constant_load(p.mesh(), 1.0);
  CHECK((p.loads[0].coeffs - f0.coeffs).lpNorm<Eigen::Infinity>() == 0.0);
  for (int j = 1; j <= 16; ++j)
    CHECK(p.loads[j].coeffs.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("subdomain stiffness pieces tile the unit stiffness") {
  AffineParametricProblem p = build_diffusion_problem(3, 0.9);
  // a(x) restricted to subdomain j contributes c_j * (local unit stiffness),
  // and the 16 subdomains cover the square, so sum_j A_j / c_j = A_0.
  Eigen::SparseMatrix<double> acc = p.operators[1].matrix / p.coefficients[0];
  for (int j = 2; j <= 16; ++j)
    acc += p.operators[j].matrix / p.coefficients[j - 1];
  Eigen::MatrixXd diff = Eigen::MatrixXd(acc - p.operators[0].matrix);
  CHECK(diff.lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("subdomain operators are local") {
  AffineParametricProblem p = build_diffusion_problem(4, 0.9);
  const StructuredMesh& mesh = p.mesh();
  // Subdomain 1 is [0, 0.25]^2; a node near the opposite corner sees nothing.
  int far = mesh.interior_index(14, 14);
  int inside = mesh.interior_index(2, 2);
  Eigen::MatrixXd a1 = Eigen::MatrixXd(p.operators[1].matrix);
  CHECK(a1.row(far).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(a1.row(inside).lpNorm<Eigen::Infinity>() > 0.0);
}

TEST_CASE("quarter-width subdomains need level 2 or finer") {
  CHECK_THROWS_AS(build_diffusion_problem(1, 0.9), SubdomainMisaligned);
}

TEST_CASE("instantiate is affine in the parameter") {
  AffineParametricProblem p = build_diffusion_problem(3, 0.9);
  ParameterPoint zero = Eigen::VectorXd::Zero(16);
  SparseOperator a0 = instantiate(p, zero);
  CHECK(Eigen::MatrixXd(a0.matrix - p.operators[0].matrix)
            .lpNorm<Eigen::Infinity>() == 0.0);

  ParameterPoint y = random_point(16, 7);
  SparseOperator ay = instantiate(p, y);
  Eigen::SparseMatrix<double> expect = p.operators[0].matrix;
  for (int j = 1; j <= 16; ++j) expect += y[j - 1] * p.operators[j].matrix;
  double scale = Eigen::MatrixXd(expect).lpNorm<Eigen::Infinity>();
  CHECK(Eigen::MatrixXd(ay.matrix - expect).lpNorm<Eigen::Infinity>() <=
        1e-13 * scale);

  // Exactly symmetric, not just up to roundoff.
  Eigen::SparseMatrix<double> t = ay.matrix.transpose();
  CHECK(Eigen::MatrixXd(ay.matrix - t).lpNorm<Eigen::Infinity>() == 0.0);

  // The load is parameter independent for this family.
  DualVector fy = load_at(p, y);
  CHECK((fy.coeffs - p.loads[0].coeffs).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("points outside the parameter box are rejected") {
  AffineParametricProblem p = build_diffusion_problem(3, 0.9);
  ParameterPoint y = Eigen::VectorXd::Zero(16);
  y[4] = 1.5;
  CHECK_THROWS_AS(instantiate(p, y), OutOfBox);
  CHECK_THROWS_AS(load_at(p, y), OutOfBox);
  CHECK_THROWS_AS(solve_forward(p, y, 1e-10), OutOfBox);
  ParameterPoint short_y = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(instantiate(p, short_y), DimensionMismatch);
}

TEST_CASE("forward solve converges to the Laplace center value") {
  // At y = 0 the coefficient is identically one, so the solution is the
  // Dirichlet Laplacian's; the center value converges at second order.
  Eigen::VectorXd y = Eigen::VectorXd::Zero(16);
  double prev_err = 0.0;
  for (int level : {3, 4, 5}) {
    AffineParametricProblem p = build_diffusion_problem(level, 0.9);
    FemVector u = solve_forward(p, y, 1e-12);
    double err = std::abs(point_value(p.mesh(), u, 0.5, 0.5) - kCenterValue);
    if (level > 3) {
      double ratio = err / prev_err;
      CHECK(ratio > 0.2);
      CHECK(ratio < 0.3);
    }
    prev_err = err;
  }
  CHECK(prev_err <= 1e-4);
}

TEST_CASE("forward solutions satisfy the discrete equations") {
  AffineParametricProblem p = build_diffusion_problem(4, 0.9);
  for (std::uint64_t s : {1, 2, 3}) {
    ParameterPoint y = random_point(16, s);
    FemVector u = solve_forward(p, y, 1e-10);
    SparseOperator a = instantiate(p, y);
    DualVector f = load_at(p, y);
    double rel = (a.matrix * u.coeffs - f.coeffs).norm() / f.coeffs.norm();
    CHECK(rel <= 1e-8);
  }
}

TEST_CASE("solutions converge monotonically under mesh refinement") {
  ParameterPoint y = random_point(16, 17);
  std::vector<double> gaps;
  for (int s = 2; s <= 4; ++s) {
    AffineParametricProblem pc = build_diffusion_problem(s, 0.9);
    AffineParametricProblem pf = build_diffusion_problem(s + 1, 0.9);
    FemVector uc = solve_forward(pc, y, 1e-12);
    FemVector uf = solve_forward(pf, y, 1e-12);
    H1Gram gram(pf.mesh());
    FemVector diff{s + 1, uf.coeffs - prolong(uc, s + 1).coeffs};
    gaps.push_back(gram.norm(diff));
  }
  CHECK(gaps[1] < gaps[0]);
  CHECK(gaps[2] < gaps[1]);
  CHECK(gaps[2] < 0.7 * gaps[1]);
}

TEST_CASE("ellipticity bounds hold in the dual norm") {
  // a(x, y) lies in [1 - c_1, 1 + c_1] = [0.1, 1.9] for the 0.9 rule, and
  // the operator inherits those bounds against the H1 Gram.
  AffineParametricProblem p = build_diffusion_problem(4, 0.9);
  H1Gram gram(p.mesh());
  for (std::uint64_t s : {5, 6, 7}) {
    ParameterPoint y = random_point(16, s);
    UniformSampler rng(s + 50);
    FemVector w{4, Eigen::VectorXd(p.mesh().interior_count())};
    for (int i = 0; i < w.coeffs.size(); ++i) w.coeffs[i] = rng.in(-1.0, 1.0);
    SparseOperator a = instantiate(p, y);
    DualVector aw{4, a.matrix * w.coeffs};
    double dual_norm = std::sqrt(aw.coeffs.dot(gram.lift(aw).coeffs));
    double wn = gram.norm(w);
    CHECK(dual_norm >= 0.1 * wn * (1.0 - 1e-10));
    CHECK(dual_norm <= 1.9 * wn * (1.0 + 1e-10));
  }
}

TEST_CASE("parameter sampling is deterministic and in range") {
  ParameterBox box = ParameterBox::unit_cube(16);
  auto a = sample_parameters(20, 123, box);
  auto b = sample_parameters(20, 123, box);
  REQUIRE(a.size() == 20);
  for (int i = 0; i < 20; ++i) {
    CHECK((a[i] - b[i]).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(box.contains(a[i]));
  }
  auto c = sample_parameters(20, 124, box);
  CHECK((a[0] - c[0]).lpNorm<Eigen::Infinity>() > 0.0);
  CHECK(sample_parameters(0, 123, box).empty());

  // Asymmetric boxes are respected.
  ParameterBox skew{Eigen::VectorXd::Constant(2, 0.5),
                    Eigen::VectorXd::Constant(2, 2.0)};
  for (const auto& y : sample_parameters(50, 9, skew)) {
    CHECK(y.minCoeff() >= 0.5);
    CHECK(y.maxCoeff() <= 2.0);
  }
}

TEST_CASE("sampled coordinates have near-zero empirical mean") {
  ParameterBox box = ParameterBox::unit_cube(16);
  auto draws = sample_parameters(100000, 2024, box);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(16);
  for (const auto& y : draws) mean += y;
  mean /= double(draws.size());
  // Uniform on [-1, 1]: the mean of 1e5 draws has std 0.0018 per coordinate,
  // so 0.02 is a generous eleven-sigma band.
  CHECK(mean.lpNorm<Eigen::Infinity>() < 0.02);
}

TEST_CASE("affine family validation catches mismatched pieces") {
  StructuredMesh m3 = build_mesh(3);
  StructuredMesh m2 = build_mesh(2);
  SparseOperator g3 = assemble_h1_gram(m3);
  DualVector f3 = assemble_constant_load(m3, 1.0);
  DualVector f2 = assemble_constant_load(m2, 1.0);

  // d = 1 family needs 2 operators and 2 loads.
  CHECK_THROWS_AS(make_affine_problem({g3, g3}, {f3}, ParameterBox::unit_cube(1)),
                  DimensionMismatch);
  CHECK_THROWS_AS(make_affine_problem({g3, g3}, {f3, f2},
                                      ParameterBox::unit_cube(1)),
                  LevelMismatch);
  CHECK_THROWS_AS(make_affine_problem({}, {}, ParameterBox::unit_cube(0)),
                  InvalidInput);
}
