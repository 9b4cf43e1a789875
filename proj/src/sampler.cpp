#include "uslab/sampler.hpp"

#include <algorithm>
#include <stdexcept>

#include "uslab/bounds.hpp"
#include "uslab/erm.hpp"
#include "uslab/oracle.hpp"

namespace uslab {

StreamSource StreamSource::finite(std::vector<Example> dataset) {
  if (dataset.empty()) throw std::invalid_argument("finite stream needs a nonempty dataset");
  StreamSource s;
  s.dataset_ = std::move(dataset);
  return s;
}

StreamSource StreamSource::generative(std::function<Example(Rng&)> sampler) {
  if (!sampler) throw std::invalid_argument("generative stream needs a sampler");
  StreamSource s;
  s.sampler_ = std::move(sampler);
  return s;
}

StreamSource::Draw StreamSource::draw(Rng& rng, std::size_t draw_counter) const {
  if (is_finite()) {
    const auto i = static_cast<std::size_t>(rng.index(dataset_.size()));
    return {dataset_[i], i};
  }
  return {sampler_(rng), draw_counter};
}

void SamplerConfig::validate() const {
  if (seed_size < 1) throw std::invalid_argument("seed set size must be at least 1");
  if (seed_size > budget) throw std::invalid_argument("seed set size must not exceed the label budget");
  if (!(r > 0.0)) throw std::invalid_argument("scale r must be positive");
  if (lambda && !(*lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!lambda && !(epsilon > 0.0)) throw std::invalid_argument("automatic lambda needs epsilon > 0");
  if (max_consecutive_rejections < 1) throw std::invalid_argument("max_consecutive_rejections must be positive");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::budget_exhausted:
      return "BudgetExhausted";
    case Termination::no_acceptable_point:
      return "NoAcceptablePoint";
    case Termination::repeat_limit:
      return "RepeatLimit";
    case Termination::train_failure:
      return "TrainFailure";
  }
  return "Unknown";
}

std::vector<Example> RunTrajectory::labeled() const {
  std::vector<Example> out = seed_points;
  for (const auto& a : accepted) out.push_back(a.z);
  return out;
}

double resolve_lambda(const SamplerConfig& cfg, const StreamSource& stream) {
  if (cfg.lambda) return *cfg.lambda;
  double radius = 0.0;
  if (cfg.feature_radius) {
    radius = *cfg.feature_radius;
  } else if (stream.is_finite()) {
    for (const auto& z : stream.dataset()) radius = std::max(radius, cfg.features.apply(z.x).norm());
  } else {
    throw std::invalid_argument("automatic lambda on a generative stream needs feature_radius");
  }
  const LossBound bound = loss_derivative_bound(cfg.loss, radius);
  return lambda_lower_bound(cfg.epsilon, static_cast<double>(cfg.budget), bound.m_ell,
                            cfg.loss.psi_prime_at_zero(), cfg.acceptance.total_mass(), cfg.r);
}

namespace {

RunTrajectory run(const StreamSource& stream, const SamplerConfig& cfg, bool adaptive) {
  cfg.validate();
  RunTrajectory traj;
  traj.lambda = resolve_lambda(cfg, stream);
  if (stream.is_finite()) traj.selection_counts.assign(stream.dataset().size(), 0);

  const Rng root(cfg.rng_seed);
  Rng seed_rng = root.substream("seed-set");
  Rng stream_rng = root.substream("stream");
  Rng accept_rng = root.substream("accept");
  std::size_t draws = 0;

  std::vector<Example> data;
  data.reserve(cfg.budget);
  double radius = 0.0;
  for (std::size_t i = 0; i < cfg.seed_size; ++i) {
    auto d = stream.draw(seed_rng, draws++);
    radius = std::max(radius, cfg.features.apply(d.z.x).norm());
    data.push_back(d.z);
  }
  traj.seed_points = data;

  TrainConfig train{traj.lambda, cfg.gradient_tolerance, cfg.max_newton_steps, std::nullopt};
  try {
    traj.thetas.push_back(fit_regularized_erm(data, cfg.loss, cfg.features, train).params);
  } catch (const NonConvergenceError& e) {
    traj.thetas.push_back(e.best().params);
    traj.termination = Termination::train_failure;
    traj.failure_message = e.what();
    return traj;
  }

  for (std::size_t t = cfg.seed_size + 1; t <= cfg.budget; ++t) {
    const ParameterVector& current = traj.thetas.back();
    std::size_t rejections = 0;
    std::optional<StreamSource::Draw> picked;
    double q_value = 1.0;
    while (true) {
      auto d = stream.draw(stream_rng, draws++);
      if (!adaptive) {
        picked = std::move(d);
        break;
      }
      q_value = acceptance_probability(cfg.acceptance, score(current, d.z.x) / cfg.r);
      if (accept_rng.uniform() < q_value) {
        picked = std::move(d);
        break;
      }
      if (++rejections >= cfg.max_consecutive_rejections) break;
    }
    traj.rejection_counts.push_back(rejections);
    if (!picked) {
      traj.termination = Termination::no_acceptable_point;
      if (stream.is_finite()) {
        const Population pop = Population::uniform(std::vector<Example>(stream.dataset().begin(), stream.dataset().end()));
        traj.exact_acceptance_at_stop = acceptance_mass(pop, cfg.acceptance, current, cfg.r).scalar();
      }
      return traj;
    }
    if (adaptive && stream.is_finite()) {
      if (++traj.selection_counts[picked->index] > cfg.max_point_repeats) {
        traj.termination = Termination::repeat_limit;
        return traj;
      }
    }

    data.push_back(picked->z);
    radius = std::max(radius, cfg.features.apply(picked->z.x).norm());
    traj.accepted.push_back({picked->z, picked->index, q_value});

    train.warm_start = current.theta;
    try {
      ParameterVector next = fit_regularized_erm(data, cfg.loss, cfg.features, train).params;
      const double step = (next.theta - current.theta).norm();
      const double bound = bounded_step_bound(loss_derivative_bound(cfg.loss, radius).m_ell, traj.lambda);
      if (step > bound * (1.0 + 1e-9) + 1e-12) ++traj.bounded_step_violations;
      traj.step_norms.push_back(step);
      traj.thetas.push_back(std::move(next));
    } catch (const NonConvergenceError& e) {
      traj.termination = Termination::train_failure;
      traj.failure_message = e.what();
      return traj;
    }
  }
  traj.termination = Termination::budget_exhausted;
  return traj;
}

}  // namespace

RunTrajectory run_uncertainty_sampling(const StreamSource& stream, const SamplerConfig& cfg) {
  return run(stream, cfg, true);
}

RunTrajectory run_random_sampling(const StreamSource& stream, const SamplerConfig& cfg) {
  return run(stream, cfg, false);
}

AsymptoticSummary asymptotic_summary(const RunTrajectory& traj, const Population& eval_pop) {
  if (traj.thetas.empty()) throw std::invalid_argument("asymptotic_summary: empty trajectory");
  AsymptoticSummary out;
  out.length = traj.thetas.size();
  out.termination = traj.termination;
  out.curve.reserve(traj.thetas.size());
  for (const auto& theta : traj.thetas) out.curve.push_back(zero_one_loss(theta, eval_pop));
  out.final_zero_one = out.curve.back();
  return out;
}

}  // namespace uslab
