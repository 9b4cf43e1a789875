#include "uslab/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "sharding.hpp"

namespace uslab {
namespace {

void check_scale(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("scale r must be positive");
}

Eigen::Index dim_of(const ParameterVector& params) { return params.theta.size(); }

/// Sums of a per-sample vector statistic and of its square.
struct Moments {
  Vector sum;
  Vector sum_sq;
};

/// Monte Carlo mean and standard error of f(z) over a generative population.
template <typename Fn>
OracleResult mc_mean(const GenerativePopulation& g, Eigen::Index dim, std::uint64_t seed, Fn&& f) {
  const auto shards = detail::run_shards<Moments>(g.monte_carlo_count, seed, [&](Rng& rng, std::size_t n) {
    Moments m{Vector::Zero(dim), Vector::Zero(dim)};
    Vector v(dim);
    for (std::size_t i = 0; i < n; ++i) {
      f(g.sampler(rng), v);
      m.sum += v;
      m.sum_sq += v.cwiseProduct(v);
    }
    return m;
  });
  Vector sum = Vector::Zero(dim);
  Vector sum_sq = Vector::Zero(dim);
  for (const auto& m : shards) {
    sum += m.sum;
    sum_sq += m.sum_sq;
  }
  const auto n = static_cast<double>(g.monte_carlo_count);
  OracleResult out;
  out.mode = OracleMode::monte_carlo;
  out.sample_count = g.monte_carlo_count;
  out.value = sum / n;
  out.standard_error = Vector::Zero(dim);
  if (g.monte_carlo_count > 1) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double var = std::max(0.0, (sum_sq[j] - n * out.value[j] * out.value[j]) / (n - 1.0));
      out.standard_error[j] = std::sqrt(var / n);
    }
  }
  return out;
}

OracleResult exact_scalar(double v) {
  OracleResult out;
  out.value = Vector::Constant(1, v);
  return out;
}

}  // namespace

OracleResult smoothed_zero_one(const Population& pop, const AcceptanceSpec& q,
                               const ParameterVector& params, double r, std::uint64_t mc_seed) {
  check_scale(r);
  if (pop.is_exact()) {
    const auto& p = pop.as_exact();
    double total = 0.0;
    for (std::size_t i = 0; i < p.examples.size(); ++i) {
      const auto& z = p.examples[i];
      total += p.weights[i] * normalized_antiderivative(q, -z.y * score(params, z.x) / r);
    }
    return exact_scalar(total);
  }
  return mc_mean(pop.as_generative(), 1, mc_seed, [&](const Example& z, Vector& v) {
    v[0] = normalized_antiderivative(q, -z.y * score(params, z.x) / r);
  });
}

OracleResult grad_smoothed_zero_one(const Population& pop, const AcceptanceSpec& q,
                                    const ParameterVector& params, double r, std::uint64_t mc_seed) {
  check_scale(r);
  if (!q.theory_compliant()) {
    throw NotDifferentiableError("Z_r is not differentiable for a discontinuous acceptance function (box)");
  }
  const double scale = -1.0 / (q.total_mass() * r);
  const Eigen::Index d = dim_of(params);
  if (pop.is_exact()) {
    const auto& p = pop.as_exact();
    Vector acc = Vector::Zero(d);
    Vector phi(d);
    for (std::size_t i = 0; i < p.examples.size(); ++i) {
      const auto& z = p.examples[i];
      const double qv = acceptance_probability(q, score(params, z.x) / r);
      if (qv == 0.0) continue;
      params.features.apply_into(z.x, phi);
      acc += (p.weights[i] * qv * z.y) * phi;
    }
    OracleResult out;
    out.value = scale * acc;
    return out;
  }
  Vector phi(d);
  return mc_mean(pop.as_generative(), d, mc_seed, [&](const Example& z, Vector& v) {
    const double qv = acceptance_probability(q, score(params, z.x) / r);
    if (qv == 0.0) {
      v.setZero();
      return;
    }
    params.features.apply_into(z.x, phi);
    v = (scale * qv * z.y) * phi;
  });
}

OracleResult acceptance_mass(const Population& pop, const AcceptanceSpec& q,
                             const ParameterVector& params, double r, std::uint64_t mc_seed) {
  check_scale(r);
  if (pop.is_exact()) {
    const auto& p = pop.as_exact();
    double total = 0.0;
    for (std::size_t i = 0; i < p.examples.size(); ++i) {
      total += p.weights[i] * acceptance_probability(q, score(params, p.examples[i].x) / r);
    }
    return exact_scalar(total);
  }
  return mc_mean(pop.as_generative(), 1, mc_seed, [&](const Example& z, Vector& v) {
    v[0] = acceptance_probability(q, score(params, z.x) / r);
  });
}

double eta_scale(const SurrogateSpec& psi, const AcceptanceSpec& q, double r, double acceptance) {
  check_scale(r);
  if (!(acceptance > 0.0)) throw ZeroAcceptanceError("eta is undefined when a_r(theta) = 0");
  return -psi.psi_prime_at_zero() * q.total_mass() * r / acceptance;
}

OracleResult expected_accepted_gradient(const Population& pop, const SurrogateSpec& psi,
                                        const AcceptanceSpec& q, const ParameterVector& params,
                                        double r, std::uint64_t mc_seed) {
  check_scale(r);
  const Eigen::Index d = dim_of(params);
  if (pop.is_exact()) {
    const auto& p = pop.as_exact();
    Vector num = Vector::Zero(d);
    double den = 0.0;
    Vector phi(d);
    for (std::size_t i = 0; i < p.examples.size(); ++i) {
      const auto& z = p.examples[i];
      const double s = score(params, z.x);
      const double wq = p.weights[i] * acceptance_probability(q, s / r);
      if (wq == 0.0) continue;
      params.features.apply_into(z.x, phi);
      num += (wq * psi_eval(psi, z.y * s).d1 * z.y) * phi;
      den += wq;
    }
    if (den == 0.0) throw ZeroAcceptanceError("conditional gradient undefined: a_r(theta) = 0");
    OracleResult out;
    out.value = num / den;
    return out;
  }

  // Shard sums: sum q, sum q^2, sum q g, sum q^2 g, sum q^2 g^2 (per coordinate).
  struct RatioSums {
    double q = 0.0;
    double q2 = 0.0;
    Vector qg;
    Vector q2g;
    Vector q2g2;
  };
  const auto& g = pop.as_generative();
  const auto shards = detail::run_shards<RatioSums>(g.monte_carlo_count, mc_seed, [&](Rng& rng, std::size_t n) {
    RatioSums acc{0.0, 0.0, Vector::Zero(d), Vector::Zero(d), Vector::Zero(d)};
    Vector phi(d);
    for (std::size_t i = 0; i < n; ++i) {
      const Example z = g.sampler(rng);
      const double s = score(params, z.x);
      const double qv = acceptance_probability(q, s / r);
      if (qv == 0.0) continue;
      params.features.apply_into(z.x, phi);
      const Vector grad = (psi_eval(psi, z.y * s).d1 * z.y) * phi;
      acc.q += qv;
      acc.q2 += qv * qv;
      acc.qg += qv * grad;
      acc.q2g += (qv * qv) * grad;
      acc.q2g2 += (qv * qv) * grad.cwiseProduct(grad);
    }
    return acc;
  });
  RatioSums total{0.0, 0.0, Vector::Zero(d), Vector::Zero(d), Vector::Zero(d)};
  for (const auto& s : shards) {
    total.q += s.q;
    total.q2 += s.q2;
    total.qg += s.qg;
    total.q2g += s.q2g;
    total.q2g2 += s.q2g2;
  }
  if (total.q == 0.0) throw ZeroAcceptanceError("conditional gradient undefined: no sample was accepted");
  const auto n = static_cast<double>(g.monte_carlo_count);
  OracleResult out;
  out.mode = OracleMode::monte_carlo;
  out.sample_count = g.monte_carlo_count;
  out.value = total.qg / total.q;
  out.standard_error = Vector::Zero(d);
  // Delta method: Var(ratio) ~ E[q^2 (g - R)^2] / (n E[q]^2).
  const double mean_q = total.q / n;
  for (Eigen::Index j = 0; j < d; ++j) {
    const double ratio = out.value[j];
    const double m2 = (total.q2g2[j] - 2.0 * ratio * total.q2g[j] + ratio * ratio * total.q2) / n;
    out.standard_error[j] = std::sqrt(std::max(0.0, m2) / n) / mean_q;
  }
  return out;
}

}  // namespace uslab
