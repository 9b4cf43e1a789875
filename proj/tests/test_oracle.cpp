#include "doctest.h"
#include "oracles.hpp"
#include "uslab/harness.hpp"
#include "uslab/oracle.hpp"

using namespace uslab;
using oracle::vec;

namespace {

const AcceptanceSpec tri(AcceptanceKind::triangle);
const SurrogateSpec hinge = SurrogateSpec::mollified_hinge(0.25);
const FeatureMap id1(FeatureKind::identity, 1);

ParameterVector theta1(double t) { return ParameterVector(vec({t}), id1); }

// Finite sums written out by hand for an exact population.
struct Sums {
  double zr = 0, ar = 0;
  Vector grad, cond;
};

Sums hand_sums(const Population& pop, const SurrogateSpec& psi, const ParameterVector& p, double r) {
  const auto& e = pop.as_exact();
  const std::size_t d = p.features.output_dim();
  Sums s;
  s.grad = Vector::Zero(static_cast<Eigen::Index>(d));
  Vector num = Vector::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < e.examples.size(); ++i) {
    const Vector phi = p.features.apply(e.examples[i].x);
    const double S = p.theta.dot(phi);
    const int y = e.examples[i].y;
    const double w = e.weights[i];
    const double q = oracle::triangle_q(S / r);
    s.zr += w * oracle::triangle_Q(-y * S / r);
    s.ar += w * q;
    s.grad += w * q * y * phi;
    num += w * q * psi_eval(psi, y * S).d1 * y * phi;
  }
  s.grad *= -1.0 / r;  // triangle: Q_inf = 1
  s.cond = num / s.ar;
  return s;
}

}  // namespace

TEST_CASE("P4 worked values") {
  const Population p4 = p4_population();
  const ParameterVector p = theta1(1.0);
  CHECK(smoothed_zero_one(p4, tri, p, 0.75).scalar() == doctest::Approx(1.0 / 36).epsilon(1e-12));
  CHECK(grad_smoothed_zero_one(p4, tri, p, 0.75).value[0] == doctest::Approx(-1.0 / 9).epsilon(1e-12));
  CHECK(acceptance_mass(p4, tri, p, 0.75).scalar() == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(expected_accepted_gradient(p4, hinge, tri, p, 0.75).value[0] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(eta_scale(hinge, tri, 0.75, 1.0 / 6) == doctest::Approx(4.5).epsilon(1e-14));
  CHECK(grad_smoothed_zero_one(p4.with_flipped_labels(), tri, p, 0.75).value[0] ==
        doctest::Approx(1.0 / 9).epsilon(1e-12));
  CHECK(smoothed_zero_one(p4, tri, p, 0.75).mode == OracleMode::exact);
}

TEST_CASE("Z_r decreases toward Z on P4") {
  const Population p4 = p4_population();
  double prev = 1.0;
  for (double r : {0.75, 0.075, 0.0075}) {
    const double v = smoothed_zero_one(p4, tri, theta1(1.0), r).scalar();
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("degenerate bands") {
  const Population p4 = p4_population();
  // every |S| >= r M_q and no mistakes
  CHECK(smoothed_zero_one(p4, tri, theta1(10.0), 0.5).scalar() == 0.0);
  CHECK(grad_smoothed_zero_one(p4, tri, theta1(10.0), 0.5).value.isZero(0.0));
  CHECK(acceptance_mass(p4, tri, theta1(10.0), 0.5).scalar() == 0.0);
  // all scores zero
  CHECK(acceptance_mass(p4, tri, theta1(0.0), 0.5).scalar() == 1.0);
  CHECK_THROWS_AS(expected_accepted_gradient(p4, hinge, tri, theta1(10.0), 0.5), ZeroAcceptanceError);
  CHECK_THROWS_AS(smoothed_zero_one(p4, tri, theta1(1.0), 0.0), std::invalid_argument);
}

TEST_CASE("eta") {
  CHECK(eta_scale(SurrogateSpec::logistic(), tri, 1.0, 0.5) == 1.0);
  CHECK(eta_scale(hinge, AcceptanceSpec(AcceptanceKind::box), 0.5, 0.25) == 4.0);
  CHECK_THROWS_AS(eta_scale(hinge, tri, 0.75, 0.0), ZeroAcceptanceError);
}

TEST_CASE("box q is refused for gradients") {
  CHECK_THROWS_AS(grad_smoothed_zero_one(p4_population(), AcceptanceSpec(AcceptanceKind::box), theta1(1.0), 0.75),
                  NotDifferentiableError);
}

TEST_CASE("conditional gradient edge cases") {
  // exactly one accepted point: its own gradient
  const Population one = Population::uniform({Example(vec({0.2}), 1), Example(vec({5.0}), 1)});
  const Vector g = expected_accepted_gradient(one, hinge, tri, theta1(1.0), 0.5).value;
  CHECK(g[0] == loss_eval(hinge, theta1(1.0), Example(vec({0.2}), 1)).gradient[0]);
  // mirrored pair (x1 = +-0.2) with a symmetric band: contributions cancel
  const FeatureMap id2(FeatureKind::identity, 2);
  const Population mirror2 =
      Population::uniform({Example(vec({0.3, 0.2}), 1), Example(vec({0.3, -0.2}), 1)});
  CHECK(expected_accepted_gradient(mirror2, hinge, tri, ParameterVector(vec({0.0, 1.0}), id2), 0.5).value[1] == 0.0);
  CHECK(grad_smoothed_zero_one(mirror2, tri, ParameterVector(vec({0.0, 1.0}), id2), 0.5).value[1] == 0.0);
}

TEST_CASE("exact sums match hand-written loops on random populations") {
  Rng rng(21);
  const FeatureMap m(FeatureKind::identity_with_bias, 3);
  for (int k = 0; k < 10; ++k) {
    const auto ex = oracle::ball_examples(rng, 3, 300);
    std::vector<double> w(ex.size());
    double total = 0;
    for (auto& x : w) total += (x = 0.1 + rng.uniform());
    for (auto& x : w) x /= total;
    const Population pop = Population::exact(ex, w);
    const ParameterVector p(oracle::random_vector(rng, 4, 2.0), m);
    const Sums h = hand_sums(pop, hinge, p, 0.5);
    CHECK(smoothed_zero_one(pop, tri, p, 0.5).scalar() == doctest::Approx(h.zr).epsilon(1e-13));
    CHECK(acceptance_mass(pop, tri, p, 0.5).scalar() == doctest::Approx(h.ar).epsilon(1e-13));
    CHECK((grad_smoothed_zero_one(pop, tri, p, 0.5).value - h.grad).norm() <= 1e-13 * (1 + h.grad.norm()));
    if (h.ar > 0) {
      CHECK((expected_accepted_gradient(pop, hinge, tri, p, 0.5).value - h.cond).norm() <= 1e-12);
    }
  }
}

TEST_CASE("grad Z_r matches finite differences of Z_r") {
  Rng rng(31);
  const FeatureMap m(FeatureKind::identity_with_bias, 2);
  const Population pop = Population::uniform(oracle::ball_examples(rng, 2, 400));
  for (int k = 0; k < 20; ++k) {
    const Vector t = oracle::random_vector(rng, 3, 2.0);
    const double h = 1e-6 * (1.0 + t.norm());
    const auto f = [&](const Vector& th) { return smoothed_zero_one(pop, tri, ParameterVector(th, m), 0.5).scalar(); };
    const Vector fd = oracle::fd_gradient(f, t, h);
    const Vector g = grad_smoothed_zero_one(pop, tri, ParameterVector(t, m), 0.5).value;
    CHECK((g - fd).norm() <= 1e-5 * std::max(g.norm(), 1e-3));
  }
}

TEST_CASE("band bound on |Z_r - Z| on random populations") {
  Rng rng(17);
  const FeatureMap m(FeatureKind::identity_with_bias, 2);
  for (int k = 0; k < 20; ++k) {
    const Population pop = Population::uniform(oracle::ball_examples(rng, 2, 200));
    const ParameterVector p(oracle::random_vector(rng, 3, 3.0), m);
    for (double r : {2.0, 0.5, 0.1, 0.01, 1e-4}) {
      double band = 0, min_abs = INFINITY;
      for (const auto& z : pop.as_exact().examples) {
        const double s = score(p, z.x);
        if (std::abs(s) <= r) band += 1.0 / 200;
        min_abs = std::min(min_abs, std::abs(s));
      }
      const double gap = std::abs(smoothed_zero_one(pop, tri, p, r).scalar() - zero_one_loss(p, pop));
      CHECK(gap <= band + 1e-12);
      if (r < min_abs) CHECK(gap <= 1e-15);
    }
  }
}

TEST_CASE("Monte Carlo estimates agree with exact sums") {
  const Population p4 = p4_population();
  const auto ex = p4.as_exact().examples;
  const Population gen = Population::generative([ex](Rng& rng) { return ex[rng.index(4)]; }, 60000, false);
  const ParameterVector p = theta1(1.0);
  const OracleResult zr = smoothed_zero_one(gen, tri, p, 0.75, 5);
  CHECK(zr.mode == OracleMode::monte_carlo);
  CHECK(zr.sample_count == 60000);
  CHECK(std::abs(zr.scalar() - 1.0 / 36) <= 4 * zr.standard_error[0]);
  const OracleResult ar = acceptance_mass(gen, tri, p, 0.75, 5);
  CHECK(std::abs(ar.scalar() - 1.0 / 6) <= 4 * ar.standard_error[0]);
  const OracleResult g = grad_smoothed_zero_one(gen, tri, p, 0.75, 5);
  CHECK(std::abs(g.value[0] + 1.0 / 9) <= 4 * g.standard_error[0]);
  // every accepted point has gradient -0.5, so the ratio estimator is exact
  const OracleResult c = expected_accepted_gradient(gen, hinge, tri, p, 0.75, 5);
  CHECK(std::abs(c.value[0] + 0.5) <= 1e-12);
  // reproducible given the seed
  CHECK(smoothed_zero_one(gen, tri, p, 0.75, 5).scalar() == zr.scalar());
}

TEST_CASE("Monte Carlo standard error is sd / sqrt(n)") {
  const Population gen = Population::generative(
      [](Rng& rng) { return Example(vec({2.0 * rng.uniform() - 1.0}), rng.uniform() < 0.5 ? 1 : -1); }, 10000);
  const OracleResult a = acceptance_mass(gen, tri, theta1(1.0), 1.0, 3);
  // q(S) for S uniform on [-1, 1]: mean 1/2, variance 1/12
  CHECK(std::abs(a.scalar() - 0.5) <= 4 * a.standard_error[0]);
  CHECK(a.standard_error[0] == doctest::Approx(std::sqrt(1.0 / 12 / 10000)).epsilon(0.05));
}
