#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uslab/acceptance.hpp"
#include "uslab/model.hpp"
#include "uslab/surrogate.hpp"

namespace uslab {

/// Unlabeled stream: uniform draws with replacement from a finite dataset, or
/// i.i.d. draws from a generator.
class StreamSource {
 public:
  static StreamSource finite(std::vector<Example> dataset);
  static StreamSource generative(std::function<Example(Rng&)> sampler);

  bool is_finite() const { return !sampler_; }
  std::span<const Example> dataset() const { return dataset_; }

  struct Draw {
    Example z;
    std::size_t index;  ///< dataset index (finite) or running draw count (generative)
  };
  Draw draw(Rng& rng, std::size_t draw_counter) const;

 private:
  std::vector<Example> dataset_;
  std::function<Example(Rng&)> sampler_;
};

struct SamplerConfig {
  std::size_t budget = 100;  ///< n, total labels
  std::size_t seed_size = 2;
  /// Regularization; nullopt resolves the descent-direction lower bound.
  std::optional<double> lambda = 1.0;
  double epsilon = 0.05;                 ///< for automatic lambda
  std::optional<double> feature_radius;  ///< for automatic lambda on generative streams
  double r = 0.5;
  AcceptanceSpec acceptance{AcceptanceKind::triangle};
  SurrogateSpec loss = SurrogateSpec::mollified_hinge();
  FeatureMap features{FeatureKind::identity_with_bias, 2};
  std::size_t max_consecutive_rejections = 1'000'000;
  std::size_t max_point_repeats = 10;
  std::uint64_t rng_seed = 0;
  double gradient_tolerance = 1e-10;
  int max_newton_steps = 200;

  void validate() const;
};

enum class Termination { budget_exhausted, no_acceptable_point, repeat_limit, train_failure };

std::string_view to_string(Termination t);

struct AcceptedPoint {
  Example z;
  std::size_t stream_index;
  double acceptance_probability;  ///< q(S(x, theta) / r) at the moment of acceptance
};

struct RunTrajectory {
  std::vector<Example> seed_points;
  /// theta_{n_seed}, ..., theta_final; one entry per completed iteration plus the seed fit.
  std::vector<ParameterVector> thetas;
  std::vector<AcceptedPoint> accepted;
  /// Rejections preceding each acceptance; the terminating attempt of a
  /// NoAcceptablePoint run is included.
  std::vector<std::size_t> rejection_counts;
  /// Adaptive selections per dataset index (finite streams only).
  std::vector<std::size_t> selection_counts;
  std::vector<double> step_norms;
  std::size_t bounded_step_violations = 0;
  Termination termination = Termination::budget_exhausted;
  std::string failure_message;
  double lambda = 0.0;
  /// Exact a_r at the final theta over the finite stream, set when the run
  /// stops for lack of an acceptable point.
  std::optional<double> exact_acceptance_at_stop;

  const ParameterVector& final_params() const { return thetas.back(); }
  std::size_t labels_used() const { return seed_points.size() + accepted.size(); }
  /// Labeled dataset at the end of the run.
  std::vector<Example> labeled() const;
};

/// Resolves SamplerConfig::lambda (fixed or automatic) for a stream.
double resolve_lambda(const SamplerConfig& cfg, const StreamSource& stream);

/// Streaming uncertainty sampling: label n_seed stream points, fit, then
/// accept each further stream point with probability q(S(x, theta)/r) and
/// refit after every label.
RunTrajectory run_uncertainty_sampling(const StreamSource& stream, const SamplerConfig& cfg);

/// Passive baseline: the same loop with every stream draw accepted. Shares
/// the seed set with run_uncertainty_sampling for equal rng_seed.
RunTrajectory run_random_sampling(const StreamSource& stream, const SamplerConfig& cfg);

struct AsymptoticSummary {
  double final_zero_one = 0.0;
  std::size_t length = 0;
  Termination termination = Termination::budget_exhausted;
  /// Z(theta_t) for every iterate in the trajectory.
  std::vector<double> curve;
};

AsymptoticSummary asymptotic_summary(const RunTrajectory& traj, const Population& eval_pop);

}  // namespace uslab
