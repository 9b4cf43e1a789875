#include "uslab/erm.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace uslab {
namespace {

/// Features stacked row-wise with their labels.
struct Design {
  Matrix phi;
  Vector y;
};

Design make_design(std::span<const Example> dataset, const FeatureMap& features) {
  const auto d = static_cast<Eigen::Index>(features.output_dim());
  Design out{Matrix(static_cast<Eigen::Index>(dataset.size()), d),
             Vector(static_cast<Eigen::Index>(dataset.size()))};
  Vector row(d);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    features.apply_into(dataset[i].x, row);
    out.phi.row(r) = row.transpose();
    out.y[r] = dataset[i].y;
  }
  return out;
}

ObjectiveEval evaluate(const Design& design, const SurrogateSpec& psi, double lambda, const Vector& theta,
                       bool with_hessian) {
  const Eigen::Index d = theta.size();
  ObjectiveEval out{lambda * theta.squaredNorm(), 2.0 * lambda * theta, Matrix()};
  const Vector scores = design.phi * theta;
  Vector d1(design.phi.rows());
  Vector d2(design.phi.rows());
  for (Eigen::Index i = 0; i < design.phi.rows(); ++i) {
    const PsiValue p = psi_eval(psi, design.y[i] * scores[i]);
    out.value += p.value;
    d1[i] = p.d1 * design.y[i];
    d2[i] = p.d2;
  }
  out.gradient.noalias() += design.phi.transpose() * d1;
  if (with_hessian) {
    out.hessian = Matrix::Identity(d, d) * (2.0 * lambda);
    out.hessian.noalias() += design.phi.transpose() * d2.asDiagonal() * design.phi;
  }
  return out;
}

/// Solves H x = b for symmetric positive definite H; on factorization failure
/// retries once with the diagonal raised by 2 lambda * 1e-10.
Vector spd_solve(const Matrix& h, const Vector& b, double lambda, int& ridge_retries) {
  Eigen::LLT<Matrix> llt(h);
  if (llt.info() == Eigen::Success) return llt.solve(b);
  ++ridge_retries;
  Matrix boosted = h;
  boosted.diagonal().array() += 2.0 * lambda * 1e-10;
  Eigen::LLT<Matrix> retry(boosted);
  if (retry.info() != Eigen::Success) throw std::runtime_error("objective Hessian is not positive definite");
  return retry.solve(b);
}

}  // namespace

ObjectiveEval regularized_objective(std::span<const Example> dataset, const SurrogateSpec& psi,
                                    const FeatureMap& features, double lambda, const Vector& theta) {
  if (static_cast<std::size_t>(theta.size()) != features.output_dim()) {
    throw std::invalid_argument("parameter dimension mismatch");
  }
  return evaluate(make_design(dataset, features), psi, lambda, theta, true);
}

FitResult fit_regularized_erm(std::span<const Example> dataset, const SurrogateSpec& psi,
                              const FeatureMap& features, const TrainConfig& cfg) {
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const auto d = static_cast<Eigen::Index>(features.output_dim());
  Vector theta = Vector::Zero(d);
  if (cfg.warm_start) {
    if (cfg.warm_start->size() != d) throw std::invalid_argument("warm start has wrong dimension");
    theta = *cfg.warm_start;
  }
  const Design design = make_design(dataset, features);

  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 60;
  int ridge_retries = 0;
  ObjectiveEval cur = evaluate(design, psi, cfg.lambda, theta, true);
  double grad_norm = cur.gradient.norm();
  FitResult best{ParameterVector(theta, features), grad_norm, 0, cur.value, 0};

  for (int step = 0;; ++step) {
    if (grad_norm < best.final_gradient_norm || step == 0) {
      best = FitResult{ParameterVector(theta, features), grad_norm, step, cur.value, ridge_retries};
    }
    if (grad_norm <= cfg.gradient_tolerance) return best;
    if (step >= cfg.max_newton_steps) {
      throw NonConvergenceError("Newton did not converge in " + std::to_string(cfg.max_newton_steps) +
                                    " steps (gradient norm " + std::to_string(best.final_gradient_norm) + ")",
                                best);
    }

    const Vector direction = spd_solve(cur.hessian, -cur.gradient, cfg.lambda, ridge_retries);
    const double slope = cur.gradient.dot(direction);
    // Near the optimum the objective change drops below its own rounding
    // error; a step that still shrinks the gradient is taken there.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(cur.value));
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h, t *= 0.5) {
      const Vector trial = theta + t * direction;
      ObjectiveEval next = evaluate(design, psi, cfg.lambda, trial, false);
      const bool armijo = next.value <= cur.value + kArmijo * t * slope;
      const bool flat = std::abs(next.value - cur.value) <= noise && next.gradient.norm() < grad_norm;
      if (armijo || flat) {
        theta = trial;
        cur = evaluate(design, psi, cfg.lambda, theta, true);
        grad_norm = cur.gradient.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw NonConvergenceError("line search failed (gradient norm " + std::to_string(grad_norm) + ")", best);
    }
  }
}

Quadrature gauss_legendre_unit(int count) {
  if (count < 1) throw std::invalid_argument("quadrature needs at least one node");
  Quadrature out{std::vector<double>(count), std::vector<double>(count)};
  const int half = (count + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton on P_count starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int k = 1; k <= count; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
      }
      dp = count * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0;
    double p1 = 0.0;
    for (int k = 1; k <= count; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p2) / k;
    }
    dp = count * (x * p0 - p1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1, 1] -> [0, 1]; ascending order.
    out.nodes[i] = 0.5 * (1.0 - x);
    out.nodes[count - 1 - i] = 0.5 * (1.0 + x);
    out.weights[i] = 0.5 * w;
    out.weights[count - 1 - i] = 0.5 * w;
  }
  return out;
}

Matrix path_preconditioner(std::span<const Example> dataset, const SurrogateSpec& psi,
                           const FeatureMap& features, double lambda, const Vector& theta_prev,
                           const Vector& theta_next, int quadrature_nodes) {
  const auto d = static_cast<Eigen::Index>(features.output_dim());
  if (theta_prev.size() != d || theta_next.size() != d) throw std::invalid_argument("parameter dimension mismatch");
  const Design design = make_design(dataset, features);
  const Quadrature quad = gauss_legendre_unit(quadrature_nodes);
  Matrix out = Matrix::Zero(d, d);
  for (int k = 0; k < quadrature_nodes; ++k) {
    const double u = quad.nodes[k];
    const Vector theta = (1.0 - u) * theta_prev + u * theta_next;
    out += quad.weights[k] * evaluate(design, psi, lambda, theta, true).hessian;
  }
  // Symmetrize against accumulated rounding.
  return 0.5 * (out + out.transpose());
}

IncrementalUpdate incremental_update(std::span<const Example> dataset_prev, const Example& new_point,
                                     const SurrogateSpec& psi, const FeatureMap& features,
                                     const TrainConfig& cfg, int quadrature_nodes) {
  const FitResult prev = fit_regularized_erm(dataset_prev, psi, features, cfg);
  std::vector<Example> extended(dataset_prev.begin(), dataset_prev.end());
  extended.push_back(new_point);
  TrainConfig next_cfg = cfg;
  next_cfg.warm_start = prev.params.theta;
  const FitResult next = fit_regularized_erm(extended, psi, features, next_cfg);

  IncrementalUpdate out;
  out.theta_prev = prev.params.theta;
  out.theta_next = next.params.theta;
  out.preconditioner =
      path_preconditioner(extended, psi, features, cfg.lambda, out.theta_prev, out.theta_next, quadrature_nodes);
  const Vector point_grad = loss_eval(psi, prev.params, new_point).gradient;
  const Vector step = out.theta_next - out.theta_prev;
  out.step_norm = step.norm();
  out.residual = (step + out.preconditioner.ldlt().solve(point_grad)).norm();
  const Matrix frozen = regularized_objective(dataset_prev, psi, features, cfg.lambda, out.theta_prev).hessian;
  out.approx_step_residual = (step + frozen.ldlt().solve(point_grad)).norm();
  return out;
}

double incremental_update_residual(std::span<const Example> dataset_prev, const Example& new_point,
                                   const SurrogateSpec& psi, const FeatureMap& features,
                                   const TrainConfig& cfg, int quadrature_nodes) {
  return incremental_update(dataset_prev, new_point, psi, features, cfg, quadrature_nodes).residual;
}

double bounded_step_bound(double m_ell, double lambda) { return m_ell / lambda; }

double approx_step_bound(double m_ell, double lambda, double n) {
  return m_ell * m_ell / (lambda * lambda) + m_ell * m_ell * m_ell * n / (2.0 * lambda * lambda * lambda);
}

}  // namespace uslab
