// SPDX-License-Identifier: Apache-2.0
#include "multires/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace multires {

double SurrogateQuadratic::value_at(const ParameterPoint& y) const {
  if (y.size() != dim()) {
    throw DimensionMismatch("SurrogateQuadratic::value_at: bad dimension");
  }
  return constant() + 2.0 * linear().dot(y) + y.dot(quadratic() * y);
}

std::vector<DualVector> residual_duals(const AffineParametricProblem& problem,
                                       const FemVector& v, int target_level) {
  check_level(v.level, problem.level, "residual_duals state");
  std::vector<DualVector> out;
  out.reserve(static_cast<std::size_t>(problem.dim) + 1);
  for (int j = 0; j <= problem.dim; ++j) {
    DualVector r;
    r.level = problem.level;
    r.coeffs = problem.operators[static_cast<std::size_t>(j)].matrix * v.coeffs -
               problem.loads[static_cast<std::size_t>(j)].coeffs;
    out.push_back(restrict_dual(r, target_level));
  }
  return out;
}

namespace {

SurrogateQuadratic quadratic_from_duals(const AffineParametricProblem& problem,
                                        const GramHierarchy& grams,
                                        const std::vector<DualVector>& duals,
                                        int level) {
  const H1Gram& gram = grams.at(level);
  const int k = static_cast<int>(duals.size());

  SurrogateQuadratic q;
  q.level = level;
  q.box = problem.box;
  q.lifts.resize(gram.mesh().interior_count(), k);
  std::vector<DualVector> local;
  local.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    const DualVector& r = duals[static_cast<std::size_t>(j)];
    local.push_back(r.level == level ? r : restrict_dual(r, level));
    q.lifts.col(j) = gram.lift(local.back()).coeffs;
  }
  // <e_i, e_j> = r_i' e_j because G e_i = r_i; symmetrized to kill the
  // asymmetry left by the solver.
  Eigen::MatrixXd g(k, k);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      g(i, j) = local[static_cast<std::size_t>(i)].coeffs.dot(q.lifts.col(j));
    }
  }
  q.gramian = 0.5 * (g + g.transpose());
  return q;
}

}  // namespace

SurrogateQuadratic build_quadratic(const AffineParametricProblem& problem,
                                   const GramHierarchy& grams,
                                   const FemVector& v, int level) {
  return quadratic_from_duals(problem, grams,
                              residual_duals(problem, v, level), level);
}

BoxMinimum minimize_box(const SurrogateQuadratic& q) {
  const int d = q.dim();
  BoxMinimum best;
  if (d == 0) {
    best.minimizer = ParameterPoint(0);
    best.value = std::max(0.0, q.constant());
    best.converged = true;
    return best;
  }
  if (q.box.dim() != d) {
    throw DimensionMismatch("minimize_box: box and quadratic disagree");
  }

  const double c = q.constant();
  const Eigen::VectorXd b = q.linear();
  const Eigen::MatrixXd Q = q.quadratic();
  const Eigen::VectorXd lo = q.box.lower;
  const Eigen::VectorXd hi = q.box.upper;

  auto clamp = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return y.cwiseMax(lo).cwiseMin(hi);
  };
  auto value = [&](const Eigen::VectorXd& y) {
    return c + 2.0 * b.dot(y) + y.dot(Q * y);
  };
  auto grad = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    return 2.0 * (b + Q * y);
  };
  // Unit-step projected gradient map; its norm is the stationarity measure.
  auto pg_norm = [&](const Eigen::VectorXd& y) {
    return (y - clamp(y - grad(y))).norm();
  };

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  const double lmax = es.eigenvalues().maxCoeff();
  const double pg_tol = 1e-9 * std::max(1.0, b.norm());

  const Eigen::VectorXd center = 0.5 * (lo + hi);

  // Degenerate quadratic part: the objective is affine, so a corner steered
  // by the sign of b minimizes it.
  if (!(lmax > 1e-300)) {
    Eigen::VectorXd y(d);
    for (int i = 0; i < d; ++i) {
      y[i] = b[i] > 0.0 ? lo[i] : (b[i] < 0.0 ? hi[i] : center[i]);
    }
    best.minimizer = y;
    best.value = std::max(0.0, value(y));
    best.converged = true;
    return best;
  }

  // Eight deterministic starts: box center, clipped unconstrained minimizer
  // (pseudo-inverse for singular Q), corners steered by the linear term, and
  // alternating corner patterns.
  std::vector<Eigen::VectorXd> seeds;
  seeds.push_back(center);
  {
    Eigen::VectorXd y_unc = Eigen::VectorXd::Zero(d);
    const double eig_tol = 1e-12 * lmax;
    for (int i = 0; i < d; ++i) {
      const double li = es.eigenvalues()[i];
      if (li > eig_tol) {
        y_unc -= (es.eigenvectors().col(i).dot(b) / li) * es.eigenvectors().col(i);
      }
    }
    seeds.push_back(clamp(y_unc));
  }
  auto corner = [&](auto pick) {
    Eigen::VectorXd y(d);
    for (int i = 0; i < d; ++i) y[i] = pick(i) ? hi[i] : lo[i];
    return y;
  };
  seeds.push_back(corner([&](int i) { return b[i] < 0.0; }));
  seeds.push_back(corner([&](int i) { return b[i] >= 0.0; }));
  seeds.push_back(corner([](int i) { return i % 2 == 0; }));
  seeds.push_back(corner([](int i) { return i % 2 == 1; }));
  seeds.push_back(corner([](int i) { return (i / 2) % 2 == 0; }));
  seeds.push_back(corner([](int i) { return (i / 2) % 2 == 1; }));

  const double step = 1.0 / (2.0 * lmax);
  constexpr long kIterationCap = 100000;
  long iterations = 0;
  best.value = std::numeric_limits<double>::infinity();
  bool best_converged = false;

  for (const Eigen::VectorXd& seed : seeds) {
    Eigen::VectorXd x = clamp(seed);
    Eigen::VectorXd x_prev = x;
    Eigen::VectorXd x_best = x;
    double fx = value(x);
    double f_best = fx;
    double t = 1.0, t_prev = 1.0;
    bool converged = pg_norm(x) <= pg_tol;

    while (!converged && iterations < kIterationCap) {
      ++iterations;
      const Eigen::VectorXd z = x + ((t_prev - 1.0) / t) * (x - x_prev);
      Eigen::VectorXd x_new = clamp(z - step * grad(z));
      double f_new = value(x_new);
      if (f_new > fx) {
        // Momentum overshoot: restart from the plain projected step.
        x_new = clamp(x - step * grad(x));
        f_new = value(x_new);
        t_prev = 1.0;
        t = 1.0;
        if (f_new >= fx && (x_new - x).norm() == 0.0) {
          break;  // numerical floor, no further progress possible
        }
      } else {
        t_prev = t;
        t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      }
      x_prev = x;
      x = x_new;
      fx = f_new;
      if (fx < f_best) {
        f_best = fx;
        x_best = x;
      }
      converged = pg_norm(x_best) <= pg_tol;
    }

    if (f_best < best.value) {
      best.value = f_best;
      best.minimizer = x_best;
      best_converged = converged;
    }
    if (iterations >= kIterationCap) break;
  }

  // The objective is convex, so one converged start certifies the optimum.
  best.converged = best_converged;
  best.iterations = iterations;
  best.value = std::max(0.0, best.value);
  return best;
}

std::vector<DualVector> SurrogateEvaluator::fine_duals(
    const FemVector& v) const {
  return residual_duals(problem_, v, problem_.level);
}

SurrogateResult SurrogateEvaluator::evaluate_from_duals(
    const std::vector<DualVector>& duals, int level) const {
  const SurrogateQuadratic q =
      quadratic_from_duals(problem_, grams_, duals, level);
  const BoxMinimum m = minimize_box(q);

  // Reassemble the lifted residual at the minimizer and take its norm.
  // Unlike the quadratic form, this stays accurate when S^2 is many orders
  // below the Gramian scale.
  const H1Gram& gram = grams_.at(level);
  Eigen::VectorXd combo(q.dim() + 1);
  combo[0] = 1.0;
  combo.tail(q.dim()) = m.minimizer;
  FemVector e{level, q.lifts * combo};
  const double s2 = std::max(0.0, gram.inner(e, e));

  SurrogateResult out;
  out.value = std::sqrt(s2);
  out.value_sq = s2;
  out.form_value = m.value;
  out.minimizer = m.minimizer;
  out.converged = m.converged;
  return out;
}

SurrogateResult SurrogateEvaluator::evaluate(const FemVector& v,
                                             int level) const {
  return evaluate_from_duals(residual_duals(problem_, v, level), level);
}

SurrogateResult surrogate(const AffineParametricProblem& problem,
                          const GramHierarchy& grams, const FemVector& v,
                          int level) {
  return SurrogateEvaluator(problem, grams).evaluate(v, level);
}

}  // namespace multires
