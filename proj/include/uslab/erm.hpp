#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uslab/model.hpp"
#include "uslab/surrogate.hpp"

namespace uslab {

struct TrainConfig {
  double lambda = 1.0;
  double gradient_tolerance = 1e-10;
  int max_newton_steps = 200;
  std::optional<Vector> warm_start;
};

struct FitResult {
  ParameterVector params;
  double final_gradient_norm = 0.0;
  int newton_steps = 0;
  double objective_value = 0.0;
  /// Linear solves that needed the ridge-boosted fallback.
  int ridge_retries = 0;
};

/// Newton did not reach the gradient tolerance. Carries the iterate with the
/// smallest gradient norm seen.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, FitResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const FitResult& best() const { return best_; }

 private:
  FitResult best_;
};

/// L(theta) = sum_i l(z_i, theta) + lambda ||theta||^2 with its derivatives.
struct ObjectiveEval {
  double value;
  Vector gradient;
  Matrix hessian;
};

ObjectiveEval regularized_objective(std::span<const Example> dataset, const SurrogateSpec& psi,
                                    const FeatureMap& features, double lambda, const Vector& theta);

/// argmin of the regularized objective by Newton's method with Armijo
/// backtracking (c = 1e-4, step halving). No 1/n scaling.
FitResult fit_regularized_erm(std::span<const Example> dataset, const SurrogateSpec& psi,
                              const FeatureMap& features, const TrainConfig& cfg);

/// Gauss-Legendre nodes and weights mapped to [0, 1].
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature gauss_legendre_unit(int count);

/// P_t = integral over u in [0, 1] of the objective Hessian at
/// (1 - u) theta_prev + u theta_next.
Matrix path_preconditioner(std::span<const Example> dataset, const SurrogateSpec& psi,
                           const FeatureMap& features, double lambda, const Vector& theta_prev,
                           const Vector& theta_next, int quadrature_nodes = 32);

/// The one-point update theta_t = theta_{t-1} - P_t^{-1} grad l(z_t, theta_{t-1})
/// measured against two exact fits.
struct IncrementalUpdate {
  Vector theta_prev;
  Vector theta_next;
  /// ||theta_t - theta_{t-1} + P_t^{-1} grad l(z_t, theta_{t-1})||
  double residual = 0.0;
  /// ||theta_t - theta_{t-1}||
  double step_norm = 0.0;
  /// ||theta_t - theta_{t-1} + [Hess L_{t-1}(theta_{t-1})]^{-1} grad l(z_t, theta_{t-1})||
  double approx_step_residual = 0.0;
  Matrix preconditioner;
};

IncrementalUpdate incremental_update(std::span<const Example> dataset_prev, const Example& new_point,
                                     const SurrogateSpec& psi, const FeatureMap& features,
                                     const TrainConfig& cfg, int quadrature_nodes = 64);

double incremental_update_residual(std::span<const Example> dataset_prev, const Example& new_point,
                                   const SurrogateSpec& psi, const FeatureMap& features,
                                   const TrainConfig& cfg, int quadrature_nodes = 64);

/// M_l / lambda: bound on a single ERM step.
double bounded_step_bound(double m_ell, double lambda);

/// M_l^2 / lambda^2 + M_l^3 n / (2 lambda^3): bound on the error of the
/// frozen-Hessian step.
double approx_step_bound(double m_ell, double lambda, double n);

}  // namespace uslab
