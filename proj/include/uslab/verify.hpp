#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "uslab/acceptance.hpp"
#include "uslab/model.hpp"
#include "uslab/sampler.hpp"
#include "uslab/surrogate.hpp"

namespace uslab {

/// Outcome of one executable check. A skipped check has pass == false and a
/// reason; callers treat it as neither pass nor failure.
struct VerificationReport {
  std::string check;
  bool pass = false;
  bool skipped = false;
  std::string skip_reason;
  double statistic = 0.0;
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  std::string fingerprint;  ///< FNV-1a of the canonical JSON of the inputs
  nlohmann::json details = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// 16-hex-digit FNV-1a digest of j.dump().
std::string fingerprint_of(const nlohmann::json& j);

/// Digest of a population's contents (bit patterns of x, y and weights).
std::string population_digest(const Population& pop);

/// E[grad l] = eta grad Z_r for uncertainty sampling at theta, checked by
/// exact finite sums on a canonically sorted copy of the population.
/// Passes if ||E[grad l] - eta grad Z_r|| / (1 + ||eta grad Z_r||) <= tolerance.
VerificationReport check_theorem1(const Population& pop, const SurrogateSpec& psi, const AcceptanceSpec& q,
                                  const ParameterVector& params, double r, double tolerance = 1e-10);

/// rho(r) = ||E[grad l] - eta grad Z_r|| a_r at each r, and the least-squares
/// slope of log rho against log r. For a locally linear loss the identity is
/// exact and the check instead asserts rho(r) <= exact_tolerance everywhere.
VerificationReport check_residual_order(const Population& pop, const SurrogateSpec& psi,
                                        const AcceptanceSpec& q, const ParameterVector& params,
                                        const std::vector<double>& r_list, double slope_min = 1.6,
                                        double slope_max = 2.6, double exact_tolerance = 1e-10);

struct DescentCheckConfig {
  std::vector<Example> prefix;  ///< theta_{t-1} is the exact fit of this dataset
  double lambda = 1.0;
  double r = 0.5;
  AcceptanceSpec acceptance{AcceptanceKind::triangle};
  SurrogateSpec loss = SurrogateSpec::mollified_hinge();
  FeatureMap features{FeatureKind::identity_with_bias, 2};
  double epsilon = 0.05;
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::size_t max_consecutive_rejections = 1'000'000;
  double gradient_tolerance = 1e-10;
};

/// Monte Carlo over independent single accepted points drawn from pop:
/// grad Z_r(theta_{t-1}) . (theta_t - theta_{t-1}). Passes if the one-sided
/// 99% upper confidence bound of the mean is below zero.
VerificationReport check_descent_direction(const Population& pop, const DescentCheckConfig& cfg);

/// t in [n_seed, n) with P(t) proportional to 1/t.
std::size_t randomized_iterate_draw(std::size_t n_seed, std::size_t n, Rng& rng);

struct ConvergenceLevel {
  std::size_t n = 0;
  std::size_t seed_size = 0;
  double lambda = 0.0;
  double median_gradient_norm = 0.0;  ///< over runs that did not fail to train
  std::vector<double> gradient_norms;
  double delta_estimate = 0.0;  ///< fraction with ||theta_t|| > C or a_r(theta_t) = 0
  std::size_t train_failures = 0;
  std::size_t early_stops = 0;  ///< NoAcceptablePoint / RepeatLimit runs
};

struct ConvergenceDiagnostics {
  std::vector<ConvergenceLevel> levels;
  VerificationReport report;
};

struct ConvergenceCheckConfig {
  std::vector<std::size_t> n_list{200, 800, 3200};
  std::size_t runs_per_n = 10;
  double lambda_scale = 1.0;     ///< lambda(n) = lambda_scale * n^(2/3)
  double seed_size_scale = 1.0;  ///< n_seed(n) = ceil(seed_size_scale * ceil(n^(2/3))), kept below n
  /// Norm bound for the failure estimate; nullopt means 100x the seed-fit norm of each run.
  std::optional<double> norm_bound;
  double required_drop = 0.25;
  SamplerConfig sampler;  ///< budget, seed_size, lambda and rng_seed are overwritten
  std::uint64_t seed = 0;
};

/// Runs the sampler at growing budgets and tracks ||grad Z_r|| at the
/// randomized iterate on the evaluation population. Passes if the medians
/// are nonincreasing and the last is at most (1 - required_drop) times the first.
ConvergenceDiagnostics check_convergence_trend(const StreamSource& stream, const Population& eval_pop,
                                               const ConvergenceCheckConfig& cfg);

/// |Z_r - Z| <= sum of weights with |S_i| <= r M_q at every r, and Z_r == Z
/// once r M_q < min |S_i|.
VerificationReport check_prop1_bound(const Population& pop, const AcceptanceSpec& q,
                                     const ParameterVector& params, const std::vector<double>& r_list);

/// Monte Carlo grad Z_r along a decreasing r sequence with sample counts
/// scaled as 1/r^2. Passes if the last two estimates differ by at most
/// `sigmas` combined standard errors.
VerificationReport check_grad_limit_stabilization(const Population& pop, const AcceptanceSpec& q,
                                                  const ParameterVector& params,
                                                  const std::vector<double>& r_list,
                                                  std::size_t base_count, std::uint64_t seed,
                                                  double sigmas = 3.0);

}  // namespace uslab
