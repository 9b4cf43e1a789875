#include "uslab/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace uslab {

std::string_view to_string(LossKind kind) {
  return kind == LossKind::logistic ? "logistic" : "mollified-hinge";
}

SurrogateSpec SurrogateSpec::logistic() { return SurrogateSpec(LossKind::logistic, 0.0); }

SurrogateSpec SurrogateSpec::mollified_hinge(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("mollified hinge needs rho in (0, 1)");
  return SurrogateSpec(LossKind::mollified_hinge, rho);
}

SurrogateSpec SurrogateSpec::from_name(std::string_view name, double rho) {
  if (name == "logistic") return logistic();
  if (name == "mollified-hinge") return mollified_hinge(rho);
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

double SurrogateSpec::psi_prime_at_zero() const { return kind_ == LossKind::logistic ? -0.5 : -1.0; }

double SurrogateSpec::local_linear_radius() const {
  return kind_ == LossKind::logistic ? 0.0 : 1.0 - rho_;
}

double SurrogateSpec::derivative_bound() const {
  if (kind_ == LossKind::logistic) return 1.0;
  // On the join, with u in [0, 1]: psi'' = 30 u^2 (1-u)^2 / (2 rho) peaks at
  // u = 1/2, and |psi'''| = 60 |u (1-u) (1-2u)| / (4 rho^2) peaks at
  // u = (3 - sqrt 3) / 6 where u (1-u) (1-2u) = sqrt(3) / 18.
  const double d2 = 15.0 / (8.0 * rho_);
  const double d3 = 60.0 * (std::sqrt(3.0) / 18.0) / (4.0 * rho_ * rho_);
  return std::max({1.0, d2, d3});
}

namespace {

PsiValue logistic_eval(double s) {
  // p = sigma(s); psi' = p - 1, psi'' = p (1 - p), psi''' = p (1 - p)(1 - 2p).
  double p;
  double one_minus_p;
  if (s >= 0.0) {
    const double e = std::exp(-s);
    p = 1.0 / (1.0 + e);
    one_minus_p = e / (1.0 + e);
  } else {
    const double e = std::exp(s);
    p = e / (1.0 + e);
    one_minus_p = 1.0 / (1.0 + e);
  }
  double value;
  if (s < -30.0) {
    value = -s;
  } else if (s > 30.0) {
    value = std::exp(-s);
  } else {
    value = std::log1p(std::exp(-s));
  }
  const double d2 = p * one_minus_p;
  return {value, -one_minus_p, d2, d2 * (one_minus_p - p)};
}

PsiValue hinge_eval(double rho, double s) {
  const double left = 1.0 - rho;
  if (s <= left) return {1.0 - s, -1.0, 0.0, 0.0};
  if (s >= 1.0 + rho) return {0.0, 0.0, 0.0, 0.0};
  // psi' = -1 + smoothstep5(u) with u = (s - left) / (2 rho).
  const double w = 2.0 * rho;
  const double u = (s - left) / w;
  const double u2 = u * u;
  const double u3 = u2 * u;
  const double v = 1.0 - u;
  const double smooth = u3 * (10.0 + u * (-15.0 + 6.0 * u));
  const double value = rho + w * (-u + u3 * u * (2.5 + u * (-3.0 + u)));
  const double d1 = -1.0 + smooth;
  const double d2 = 30.0 * u2 * v * v / w;
  const double d3 = 60.0 * u * v * (1.0 - 2.0 * u) / (w * w);
  return {value, d1, d2, d3};
}

}  // namespace

PsiValue psi_eval(const SurrogateSpec& spec, double s) {
  return spec.kind() == LossKind::logistic ? logistic_eval(s) : hinge_eval(spec.rho(), s);
}

LossEval loss_eval(const SurrogateSpec& spec, const ParameterVector& params, const Example& z) {
  const Vector phi = params.features.apply(z.x);
  const double margin = z.y * params.theta.dot(phi);
  const PsiValue psi = psi_eval(spec, margin);
  LossEval out{psi.value, (psi.d1 * z.y) * phi, psi.d2 * (phi * phi.transpose())};
  return out;
}

LossBound loss_derivative_bound(const SurrogateSpec& spec, double feature_radius) {
  if (!(feature_radius >= 0.0) || !std::isfinite(feature_radius)) {
    throw std::invalid_argument("feature radius must be finite and nonnegative");
  }
  const double r = feature_radius;
  const double b = spec.derivative_bound();
  return {b * std::max({r, r * r, r * r * r}), r, b};
}

LossBound loss_derivative_bound(const SurrogateSpec& spec, const Population& pop,
                                const FeatureMap& features, double param_radius) {
  if (!(param_radius > 0.0)) throw std::invalid_argument("param_radius must be positive");
  const auto& p = pop.as_exact();
  double radius = 0.0;
  for (const auto& z : p.examples) radius = std::max(radius, features.apply(z.x).norm());
  return loss_derivative_bound(spec, radius);
}

}  // namespace uslab
