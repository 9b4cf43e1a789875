#pragma once

#include <string_view>

#include "uslab/model.hpp"

namespace uslab {

enum class LossKind { logistic, mollified_hinge };

std::string_view to_string(LossKind kind);

/// Convex margin loss psi, with l(z, theta) = psi(y S(x, theta)).
///
/// The mollified hinge equals 1 - s for s <= 1 - rho, 0 for s >= 1 + rho, and
/// a C^3 polynomial join on [1 - rho, 1 + rho]. Its derivative is exactly -1
/// on s <= 1 - rho, so the local-linearity radius is 1 - rho.
class SurrogateSpec {
 public:
  static SurrogateSpec logistic();
  static SurrogateSpec mollified_hinge(double rho = 0.25);
  static SurrogateSpec from_name(std::string_view name, double rho = 0.25);

  LossKind kind() const { return kind_; }
  double rho() const { return rho_; }
  double psi_prime_at_zero() const;
  /// m_psi; 0 when psi is nowhere exactly linear.
  double local_linear_radius() const;
  /// Sup over s of |psi'|, |psi''| and |psi'''|.
  double derivative_bound() const;

 private:
  SurrogateSpec(LossKind kind, double rho) : kind_(kind), rho_(rho) {}

  LossKind kind_;
  double rho_;
};

struct PsiValue {
  double value;
  double d1;
  double d2;
  double d3;
};

PsiValue psi_eval(const SurrogateSpec& spec, double s);

struct LossEval {
  double value;
  Vector gradient;
  Matrix hessian;
};

/// Value, theta-gradient and theta-Hessian of psi(y S(x, theta)).
LossEval loss_eval(const SurrogateSpec& spec, const ParameterVector& params, const Example& z);

struct LossBound {
  double m_ell;           ///< bound on the first three theta-derivatives of l
  double feature_radius;  ///< R = max ||phi(x)||
  double psi_bound;       ///< B_psi
};

/// M_l = B_psi * max(R, R^2, R^3) over an exact population.
LossBound loss_derivative_bound(const SurrogateSpec& spec, const Population& pop,
                                const FeatureMap& features, double param_radius);

/// Same bound from a known feature radius.
LossBound loss_derivative_bound(const SurrogateSpec& spec, double feature_radius);

}  // namespace uslab
