#include <cstring>

#include "doctest.h"
#include "oracles.hpp"
#include "uslab/surrogate.hpp"

using namespace uslab;
using oracle::vec;

namespace {

const SurrogateSpec hinge = SurrogateSpec::mollified_hinge(0.25);
const SurrogateSpec logistic = SurrogateSpec::logistic();

}  // namespace

TEST_CASE("psi at reference points") {
  const PsiValue l0 = psi_eval(logistic, 0.0);
  CHECK(l0.value == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(l0.d1 == -0.5);
  CHECK(l0.d2 == 0.25);

  const PsiValue h0 = psi_eval(hinge, 0.0);
  CHECK(h0.value == 1.0);
  CHECK(h0.d1 == -1.0);
  CHECK(h0.d2 == 0.0);

  const PsiValue h2 = psi_eval(hinge, 2.0);
  CHECK(h2.value == 0.0);
  CHECK(h2.d1 == 0.0);
  CHECK(h2.d2 == 0.0);
}

TEST_CASE("spec metadata") {
  CHECK(logistic.psi_prime_at_zero() == -0.5);
  CHECK(hinge.psi_prime_at_zero() == -1.0);
  CHECK(logistic.local_linear_radius() == 0.0);
  CHECK(hinge.local_linear_radius() == 0.75);
  CHECK_THROWS(SurrogateSpec::mollified_hinge(0.0));
  CHECK_THROWS(SurrogateSpec::mollified_hinge(1.0));
  CHECK(SurrogateSpec::from_name("mollified-hinge", 0.5).rho() == 0.5);
  CHECK_THROWS(SurrogateSpec::from_name("squared"));
}

TEST_CASE("logistic is stable for large margins") {
  for (double s : {-1000.0, -40.0, 40.0, 1000.0}) {
    const PsiValue v = psi_eval(logistic, s);
    CHECK(std::isfinite(v.value));
    CHECK(std::isfinite(v.d1));
    CHECK(v.value >= 0.0);
  }
  CHECK(psi_eval(logistic, -1000.0).value == 1000.0);
  CHECK(psi_eval(logistic, -40.0).value == doctest::Approx(40.0).epsilon(1e-15));
  CHECK(psi_eval(logistic, 20.0).value == doctest::Approx(oracle::logistic_psi(20.0)).epsilon(1e-13));
}

TEST_CASE("psi derivatives match finite differences of the value") {
  for (const auto& spec : {logistic, hinge}) {
    for (double s = -3.0; s <= 3.0; s += 0.0371) {
      const double h = 1e-5;
      const double fd1 = (psi_eval(spec, s + h).value - psi_eval(spec, s - h).value) / (2 * h);
      const double fd2 = (psi_eval(spec, s + h).d1 - psi_eval(spec, s - h).d1) / (2 * h);
      const double fd3 = (psi_eval(spec, s + h).d2 - psi_eval(spec, s - h).d2) / (2 * h);
      const PsiValue v = psi_eval(spec, s);
      CHECK(v.d1 == doctest::Approx(fd1).epsilon(1e-6).scale(1.0));
      CHECK(v.d2 == doctest::Approx(fd2).epsilon(1e-6).scale(1.0));
      CHECK(v.d3 == doctest::Approx(fd3).epsilon(1e-5).scale(10.0));
    }
  }
}

TEST_CASE("loss gradient matches central differences at 50 random pairs") {
  Rng rng(11);
  const FeatureMap m(FeatureKind::identity_with_bias, 3);
  for (const auto& spec : {logistic, hinge}) {
    for (int k = 0; k < 50; ++k) {
      const Example z(oracle::random_vector(rng, 3, 1.0), rng.uniform() < 0.5 ? -1 : 1);
      const Vector t = oracle::random_vector(rng, 4, 1.0);
      const auto f = [&](const Vector& th) { return loss_eval(spec, ParameterVector(th, m), z).value; };
      const Vector fd = oracle::fd_gradient(f, t, 1e-5);
      const LossEval e = loss_eval(spec, ParameterVector(t, m), z);
      CHECK((e.gradient - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));
      // Hessian against differences of the analytic gradient
      for (int i = 0; i < 4; ++i) {
        const auto gi = [&](const Vector& th) { return loss_eval(spec, ParameterVector(th, m), z).gradient[i]; };
        CHECK((e.hessian.row(i).transpose() - oracle::fd_gradient(gi, t, 1e-5)).norm() <= 1e-5);
      }
    }
  }
}

TEST_CASE("loss_eval reference values") {
  const FeatureMap id(FeatureKind::identity, 1);
  CHECK(loss_eval(hinge, ParameterVector(vec({1.0}), id), Example(vec({0.5}), 1)).gradient[0] == -0.5);
  Rng rng(3);
  for (int k = 0; k < 10; ++k) {
    const Example z(oracle::random_vector(rng, 1, 2.0), k % 2 ? 1 : -1);
    const LossEval e = loss_eval(logistic, ParameterVector(vec({0.0}), id), z);
    CHECK(e.gradient[0] == -0.5 * z.y * z.x[0]);
  }
  for (const auto& spec : {logistic, hinge}) {
    const LossEval e = loss_eval(spec, ParameterVector(vec({0.7}), id), Example(vec({0.0}), 1));
    CHECK(e.gradient.isZero(0.0));
    CHECK(e.hessian.isZero(0.0));
  }
  CHECK_THROWS(loss_eval(hinge, ParameterVector(vec({1.0, 2.0}), FeatureMap(FeatureKind::identity, 2)),
                         Example(vec({0.5}), 1)));
}

TEST_CASE("psi is convex on a dense grid") {
  for (const auto& spec : {logistic, hinge, SurrogateSpec::mollified_hinge(0.05), SurrogateSpec::mollified_hinge(0.9)}) {
    for (int i = 0; i < 10000; ++i) {
      const double s = -10.0 + 20.0 * i / 9999.0;
      CHECK_MESSAGE(psi_eval(spec, s).d2 >= -1e-12, "s = " << s);
    }
  }
}

TEST_CASE("mollified hinge is exactly linear left of 1 - rho") {
  Rng rng(5);
  const double minus_one = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const double s = 0.75 - 50.0 * rng.uniform();
    const double d1 = psi_eval(hinge, s).d1;
    CHECK(std::memcmp(&d1, &minus_one, sizeof d1) == 0);
  }
  CHECK(psi_eval(hinge, 0.75).d1 == -1.0);
}

TEST_CASE("mollified hinge joins are C3") {
  // One-sided third differences of psi on each side of a join agree.
  for (double rho : {0.25, 0.1, 0.6}) {
    const SurrogateSpec spec = SurrogateSpec::mollified_hinge(rho);
    for (double join : {1.0 - rho, 1.0 + rho}) {
      const double h = 1e-3;
      auto psi = [&](double s) { return psi_eval(spec, s).value; };
      const double right = (psi(join + 3 * h) - 3 * psi(join + 2 * h) + 3 * psi(join + h) - psi(join)) / (h * h * h);
      const double left = (psi(join) - 3 * psi(join - h) + 3 * psi(join - 2 * h) - psi(join - 3 * h)) / (h * h * h);
      // both sides are O(h) away from psi'''(join) = 0
      CHECK(std::abs(right - left) <= 1e-6 + 60.0 * h / (rho * rho * rho));
      CHECK(std::abs(psi_eval(spec, join).d3) <= 1e-12);
    }
    // value continuity at both ends
    CHECK(psi_eval(spec, 1.0 - rho).value == doctest::Approx(rho));
    CHECK(std::abs(psi_eval(spec, 1.0 + rho - 1e-15).value) <= 1e-12);
  }
}

TEST_CASE("derivative bound B_psi against a grid scan") {
  for (double rho : {0.25, 0.1, 0.5}) {
    const SurrogateSpec spec = SurrogateSpec::mollified_hinge(rho);
    double d2 = 0.0, d3 = 0.0;
    // third derivative from differences of the second (independent of d3)
    const double h = 1e-6;
    for (int i = 0; i <= 200000; ++i) {
      const double s = 1.0 - rho + 2.0 * rho * i / 200000.0;
      d2 = std::max(d2, psi_eval(spec, s).d2);
      d3 = std::max(d3, std::abs(psi_eval(spec, s + h).d2 - psi_eval(spec, s - h).d2) / (2 * h));
    }
    const double scanned = std::max({1.0, d2, d3});
    CHECK(spec.derivative_bound() == doctest::Approx(scanned).epsilon(1e-5));
    CHECK(spec.derivative_bound() >= scanned * (1 - 1e-9));
  }
  CHECK(logistic.derivative_bound() == 1.0);
}

TEST_CASE("loss_derivative_bound scales as max(R, R^2, R^3)") {
  const FeatureMap id(FeatureKind::identity, 2);
  const Population unit = Population::uniform({Example(vec({1.0, 0.0}), 1), Example(vec({0.0, -0.5}), -1)});
  CHECK(loss_derivative_bound(logistic, unit, id, 1.0).m_ell == 1.0);
  const Population twice = Population::uniform({Example(vec({2.0, 0.0}), 1), Example(vec({0.0, -1.0}), -1)});
  const LossBound b = loss_derivative_bound(logistic, twice, id, 1.0);
  CHECK(b.feature_radius == 2.0);
  CHECK(b.m_ell == 8.0);
  CHECK(loss_derivative_bound(hinge, twice, id, 1.0).m_ell == 8.0 * hinge.derivative_bound());
  CHECK(loss_derivative_bound(hinge, 1.0).m_ell == hinge.derivative_bound());
  CHECK(loss_derivative_bound(logistic, 0.5).m_ell == 0.5);
  CHECK_THROWS(loss_derivative_bound(logistic, unit, id, 0.0));
}

TEST_CASE("M_l dominates sampled gradient norms") {
  Rng rng(8);
  const FeatureMap m(FeatureKind::identity_with_bias, 2);
  std::vector<Example> ex;
  for (int i = 0; i < 200; ++i) ex.emplace_back(oracle::random_vector(rng, 2, 1.5), i % 2 ? 1 : -1);
  const Population pop = Population::uniform(ex);
  for (const auto& spec : {logistic, hinge}) {
    const double bound = loss_derivative_bound(spec, pop, m, 5.0).m_ell;
    for (int k = 0; k < 200; ++k) {
      const ParameterVector p(oracle::random_vector(rng, 3, 3.0), m);
      const Example& z = ex[static_cast<std::size_t>(k)];
      const LossEval e = loss_eval(spec, p, z);
      CHECK(e.gradient.norm() <= bound);
      CHECK(e.hessian.norm() <= bound);
    }
  }
}
