#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "oracles.hpp"
#include "uslab/erm.hpp"
#include "uslab/harness.hpp"

using namespace uslab;
using oracle::vec;

namespace {

const SurrogateSpec logistic = SurrogateSpec::logistic();
const SurrogateSpec hinge = SurrogateSpec::mollified_hinge(0.25);
const FeatureMap id1(FeatureKind::identity, 1);
const FeatureMap id2b(FeatureKind::identity_with_bias, 2);

// Full objective gradient written out by hand.
Vector hand_gradient(const std::vector<Example>& data, const SurrogateSpec& psi, const FeatureMap& m, double lambda,
                     const Vector& theta) {
  Vector g = 2.0 * lambda * theta;
  for (const auto& z : data) {
    const Vector phi = m.apply(z.x);
    g += psi_eval(psi, z.y * theta.dot(phi)).d1 * z.y * phi;
  }
  return g;
}

}  // namespace

TEST_CASE("empty dataset is pure ridge") {
  const FitResult f = fit_regularized_erm({}, logistic, id2b, TrainConfig{0.3});
  CHECK(f.params.theta.isZero(0.0));
}

TEST_CASE("single example: bisection oracle") {
  // d/dtheta [log(1 + e^-theta) + 0.5 theta^2] = theta - 1/(1 + e^theta)
  const double root = oracle::bisect([](double t) { return t - 1.0 / (1.0 + std::exp(t)); }, 0.0, 1.0);
  const std::vector<Example> data{Example(vec({1.0}), 1)};
  const FitResult f = fit_regularized_erm(data, logistic, id1, TrainConfig{0.5, 1e-12});
  CHECK(f.params.theta[0] == doctest::Approx(root).epsilon(1e-10));
  CHECK(std::abs(f.params.theta[0] - 0.4010) <= 1e-3);
}

TEST_CASE("huge lambda pins theta near zero") {
  Rng rng(6);
  const auto data = oracle::ball_examples(rng, 2, 50);
  const double lambda = 1e6;
  const FitResult f = fit_regularized_erm(data, logistic, id2b, TrainConfig{lambda});
  const double m_ell = loss_derivative_bound(logistic, Population::uniform(data), id2b, 1.0).m_ell;
  CHECK(f.params.theta.norm() <= m_ell * 50 / (2 * lambda));
}

TEST_CASE("fits satisfy first-order optimality and warm starts agree") {
  Rng rng(12);
  for (const auto& psi : {logistic, hinge}) {
    for (int k = 0; k < 10; ++k) {
      const auto data = oracle::ball_examples(rng, 2, 40);
      TrainConfig cfg{0.1 + rng.uniform()};
      const FitResult cold = fit_regularized_erm(data, psi, id2b, cfg);
      CHECK(cold.final_gradient_norm <= cfg.gradient_tolerance);
      CHECK(hand_gradient(data, psi, id2b, cfg.lambda, cold.params.theta).norm() <= 10 * cfg.gradient_tolerance);
      cfg.warm_start = oracle::random_vector(rng, 3, 3.0);
      const FitResult warm = fit_regularized_erm(data, psi, id2b, cfg);
      // strong convexity 2 lambda turns the gradient tolerance into a distance bound
      CHECK((warm.params.theta - cold.params.theta).norm() <= 10 * cfg.gradient_tolerance / (2 * cfg.lambda) + 1e-15);
    }
  }
}

TEST_CASE("objective derivatives match finite differences") {
  Rng rng(13);
  const auto data = oracle::ball_examples(rng, 2, 30);
  for (const auto& psi : {logistic, hinge}) {
    const Vector t = oracle::random_vector(rng, 3, 1.5);
    const ObjectiveEval e = regularized_objective(data, psi, id2b, 0.7, t);
    const auto f = [&](const Vector& th) { return regularized_objective(data, psi, id2b, 0.7, th).value; };
    CHECK((e.gradient - oracle::fd_gradient(f, t, 1e-5)).norm() <= 1e-6 * (1 + e.gradient.norm()));
    CHECK((e.gradient - hand_gradient(data, psi, id2b, 0.7, t)).norm() <= 1e-12);
  }
}

TEST_CASE("non-convergence carries the best iterate") {
  Rng rng(14);
  const auto data = oracle::ball_examples(rng, 2, 30);
  TrainConfig cfg{1e-3, 1e-14, 1};
  try {
    (void)fit_regularized_erm(data, logistic, id2b, cfg);
    FAIL("expected non-convergence");
  } catch (const NonConvergenceError& e) {
    CHECK(e.best().params.theta.size() == 3);
    CHECK(e.best().final_gradient_norm > 0.0);
  }
  CHECK_THROWS_AS(fit_regularized_erm(data, logistic, id2b, TrainConfig{0.0}), std::invalid_argument);
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly") {
  for (int n : {1, 2, 5, 32, 64}) {
    const Quadrature q = gauss_legendre_unit(n);
    double wsum = 0;
    for (double w : q.weights) wsum += w;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (int k = 0; k <= 2 * n - 1 && k < 40; ++k) {
      double s = 0;
      for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * std::pow(q.nodes[i], k);
      CHECK(s == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
    }
  }
  CHECK_THROWS(gauss_legendre_unit(0));
}

TEST_CASE("path preconditioner") {
  const auto p4 = p4_population().as_exact().examples;
  const double lambda = 1.0;
  // degenerate path: the Hessian itself
  const Vector t = vec({0.8});
  CHECK((path_preconditioner(p4, logistic, id1, lambda, t, t, 7) -
         regularized_objective(p4, logistic, id1, lambda, t).hessian)
            .norm() <= 1e-14);
  // hinge in its linear region has constant Hessian 2 lambda
  const Matrix flat = path_preconditioner(p4, hinge, id1, lambda, vec({0.1}), vec({0.3}), 3);
  CHECK(flat(0, 0) == doctest::Approx(2 * lambda).epsilon(1e-15));
  // 32 vs 64 nodes
  Rng rng(15);
  for (int k = 0; k < 10; ++k) {
    const Vector a = oracle::random_vector(rng, 1, 2.0), b = oracle::random_vector(rng, 1, 2.0);
    const Matrix p32 = path_preconditioner(p4, logistic, id1, lambda, a, b, 32);
    const Matrix p64 = path_preconditioner(p4, logistic, id1, lambda, a, b, 64);
    CHECK((p32 - p64).norm() <= 1e-12);
  }
  // symmetric with smallest eigenvalue >= 2 lambda
  const auto data = oracle::ball_examples(rng, 2, 25);
  const Matrix P = path_preconditioner(data, logistic, id2b, 0.4, oracle::random_vector(rng, 3, 2.0),
                                       oracle::random_vector(rng, 3, 2.0), 32);
  CHECK((P - P.transpose()).norm() == 0.0);
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(P).eigenvalues().minCoeff() >= 0.8 - 1e-12);
}

TEST_CASE("incremental update identity") {
  const auto p4 = p4_population().as_exact().examples;
  const TrainConfig cfg{1.0, 1e-12};
  const IncrementalUpdate u = incremental_update(p4, Example(vec({0.3}), -1), logistic, id1, cfg, 64);
  CHECK(u.residual <= 1e-6);
  const double m_ell = loss_derivative_bound(logistic, 2.0).m_ell;
  CHECK(u.step_norm <= bounded_step_bound(m_ell, 1.0));
  CHECK(u.approx_step_residual <= approx_step_bound(m_ell, 1.0, 5.0));
  CHECK(incremental_update_residual(p4, Example(vec({0.3}), -1), logistic, id1, cfg, 64) == u.residual);
  // zero feature: the new loss is constant, nothing moves
  const IncrementalUpdate z = incremental_update(p4, Example(vec({0.0}), 1), logistic, id1, cfg, 64);
  CHECK(z.step_norm <= 1e-12);
  CHECK(z.residual <= 1e-12);
}

TEST_CASE("incremental identity on random instances") {
  Rng rng(16);
  for (int k = 0; k < 20; ++k) {
    const auto data = oracle::ball_examples(rng, 2, 10 + static_cast<std::size_t>(k));
    const Example z = oracle::ball_example(rng, 2);
    const double lambda = 0.2 + rng.uniform();
    const IncrementalUpdate u = incremental_update(data, z, logistic, id2b, TrainConfig{lambda, 1e-12}, 64);
    const double m_ell = loss_derivative_bound(logistic, std::sqrt(2.0)).m_ell;
    CHECK(u.residual <= 1e-6);
    CHECK(u.step_norm <= bounded_step_bound(m_ell, lambda));
    CHECK(u.approx_step_residual <= approx_step_bound(m_ell, lambda, static_cast<double>(data.size() + 1)));
  }
}

TEST_CASE("step bounds are the stated formulas") {
  CHECK(bounded_step_bound(3.0, 2.0) == 1.5);
  CHECK(approx_step_bound(2.0, 4.0, 10.0) == doctest::Approx(4.0 / 16 + 8.0 * 10 / (2 * 64)));
}
