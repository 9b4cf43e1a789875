#include "doctest.h"
#include "oracles.hpp"
#include "uslab/acceptance.hpp"

using namespace uslab;
using oracle::vec;

namespace {

const AcceptanceSpec box(AcceptanceKind::box);
const AcceptanceSpec tri(AcceptanceKind::triangle);
const AcceptanceSpec cosb(AcceptanceKind::cosine_bump);

}  // namespace

TEST_CASE("q reference values") {
  CHECK(acceptance_probability(tri, 0.0) == 1.0);
  CHECK(acceptance_probability(tri, -2.0 / 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(acceptance_probability(box, 1.5) == 0.0);
  CHECK(acceptance_probability(box, 1.0) == 1.0);
  CHECK(acceptance_probability(cosb, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  for (double s = -3.0; s <= 3.0; s += 0.013) {
    CHECK(acceptance_probability(tri, s) == doctest::Approx(oracle::triangle_q(s)).epsilon(1e-15));
    CHECK(acceptance_probability(cosb, s) == doctest::Approx(oracle::cosine_q(s)).epsilon(1e-15));
    CHECK(acceptance_probability(box, s) == oracle::box_q(s));
  }
}

TEST_CASE("Q reference values") {
  for (const auto& q : {box, tri, cosb}) {
    CHECK(normalized_antiderivative(q, 0.0) == 0.5);
    CHECK(normalized_antiderivative(q, 5.0) == 1.0);
    CHECK(normalized_antiderivative(q, -5.0) == 0.0);
    CHECK(normalized_antiderivative(q, -q.support_bound()) == 0.0);
    CHECK(normalized_antiderivative(q, q.support_bound()) == 1.0);
  }
  CHECK(normalized_antiderivative(tri, -2.0 / 3.0) == doctest::Approx(1.0 / 18.0).epsilon(1e-14));
}

TEST_CASE("metadata: support, mass, compliance") {
  for (const auto& q : {box, tri, cosb}) {
    const double mass = oracle::simpson([&](double s) { return acceptance_probability(q, s); }, -1.0, 1.0, 200000);
    CHECK(std::abs(mass - q.total_mass()) <= 1e-10);
    CHECK(acceptance_probability(q, 1.0 + 1e-12) == 0.0);
  }
  CHECK_FALSE(box.theory_compliant());
  CHECK(tri.theory_compliant());
  CHECK(cosb.theory_compliant());
  CHECK(cosb.smooth());
  CHECK_FALSE(tri.smooth());
  CHECK(AcceptanceSpec::from_name("cosine-bump") == cosb);
  CHECK_THROWS(AcceptanceSpec::from_name("gaussian"));
}

TEST_CASE("Q matches the integrated q") {
  for (const auto& q : {box, tri, cosb}) {
    for (double s = -1.2; s <= 1.2; s += 0.05) {
      // split at the kink of the triangle so Simpson stays high order on each piece
      const auto f = [&](double u) { return acceptance_probability(q, u); };
      const double hi = std::clamp(s, -1.0, 1.0);
      const double integral =
          oracle::simpson(f, -1.0, std::min(hi, 0.0), 20000) + (hi > 0.0 ? oracle::simpson(f, 0.0, hi, 20000) : 0.0);
      // box has a jump inside the range; Simpson is only first order there
      const double tol = q.kind() == AcceptanceKind::box ? 1e-4 : 1e-10;
      CHECK(std::abs(normalized_antiderivative(q, s) - integral / q.total_mass()) <= tol);
    }
  }
  for (double s = -1.0; s <= 1.0; s += 0.01) {
    CHECK(normalized_antiderivative(tri, s) == doctest::Approx(oracle::triangle_Q(s)).epsilon(1e-14));
  }
}

TEST_CASE("Q' = q / Q_inf at 1000 interior points") {
  Rng rng(2);
  for (const auto& q : {tri, cosb}) {
    for (int i = 0; i < 1000; ++i) {
      const double s = -0.999 + 1.998 * rng.uniform();
      const double h = 1e-6;
      const double fd = (normalized_antiderivative(q, s + h) - normalized_antiderivative(q, s - h)) / (2 * h);
      CHECK(std::abs(fd - acceptance_probability(q, s) / q.total_mass()) <= 1e-6);
    }
  }
}

TEST_CASE("q is even and Q is monotone") {
  for (const auto& q : {box, tri, cosb}) {
    double prev = -1.0;
    for (int i = 0; i <= 4000; ++i) {
      const double s = -2.0 + 4.0 * i / 4000.0;
      CHECK(acceptance_probability(q, s) == acceptance_probability(q, -s));
      const double v = normalized_antiderivative(q, s);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("accept_draw consumes exactly one variate") {
  const FeatureMap id(FeatureKind::identity, 1);
  const ParameterVector p(vec({1.0}), id);
  for (double x : {0.0, 0.5, 5.0}) {
    Rng a(42), b(42);
    (void)accept_draw(tri, p, vec({x}), 0.75, a);
    (void)b.uniform();
    CHECK(a.next_u64() == b.next_u64());
  }
  Rng rng(1);
  CHECK_THROWS_AS(accept_draw(tri, p, vec({0.5}), 0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(accept_draw(tri, p, vec({0.5}), -1.0, rng), std::invalid_argument);
}

TEST_CASE("accept_draw probabilities") {
  const FeatureMap id(FeatureKind::identity, 1);
  const ParameterVector p(vec({1.0}), id);
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) {
    CHECK(accept_draw(box, p, vec({0.0}), 0.5, rng));
    CHECK_FALSE(accept_draw(tri, p, vec({3.0}), 0.5, rng));
  }
  int hits = 0;
  for (int i = 0; i < 100000; ++i) hits += accept_draw(tri, p, vec({0.5}), 0.75, rng);
  CHECK(std::abs(hits / 1e5 - 1.0 / 3.0) <= 0.01);
}

TEST_CASE("the box band shrinks with r") {
  Rng rng(4);
  const FeatureMap m(FeatureKind::identity_with_bias, 2);
  const ParameterVector p(vec({0.7, -0.4, 0.1}), m);
  std::vector<Vector> xs;
  for (int i = 0; i < 500; ++i) xs.push_back(oracle::random_vector(rng, 2, 2.0));
  auto band = [&](double r) {
    std::vector<bool> in;
    for (const auto& x : xs) in.push_back(acceptance_probability(box, score(p, x) / r) > 0.0);
    return in;
  };
  std::vector<bool> outer = band(2.0);
  for (double r : {1.0, 0.5, 0.25, 0.1}) {
    const auto inner = band(r);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK((!inner[i] || outer[i]));
    outer = inner;
  }
}
