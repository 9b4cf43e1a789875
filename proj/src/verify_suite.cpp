#include <cmath>
#include <ostream>

#include "uslab/bounds.hpp"
#include "uslab/erm.hpp"
#include "uslab/harness.hpp"

namespace uslab {
namespace {

using nlohmann::json;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

template <typename T>
T opt(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

/// Everything a check needs, resolved once from the config (or the fixtures).
struct Setup {
  const ExperimentConfig& cfg;
  bool fixtures;  ///< no config given
  World world;
  Population train_pop;
  std::uint64_t seed;
  double r;
  double epsilon;

  Setup(const ExperimentConfig& c, bool fx)
      : cfg(c),
        fixtures(fx),
        world(build_world(c)),
        train_pop(Population::uniform(world.train)),
        seed(opt<std::uint64_t>(c.verify, "seed", c.root_seed)),
        r(opt<double>(c.verify, "r", c.sampler.r)),
        epsilon(opt<double>(c.verify, "epsilon", c.sampler.epsilon)) {}

  SamplerConfig sampler() const {
    SamplerConfig s = cfg.sampler;
    s.features = world.features;
    s.r = r;
    s.epsilon = epsilon;
    return s;
  }

  /// verify.theta if given, else the full-data fit.
  ParameterVector probe_params() const {
    if (auto it = cfg.verify.find("theta"); it != cfg.verify.end()) {
      const auto v = it->get<std::vector<double>>();
      Vector t(static_cast<Eigen::Index>(v.size()));
      for (std::size_t i = 0; i < v.size(); ++i) t[static_cast<Eigen::Index>(i)] = v[i];
      return ParameterVector(t, world.features);
    }
    const SamplerConfig s = sampler();
    const double lambda = resolve_lambda(s, StreamSource::finite(world.train));
    TrainConfig tc{lambda, s.gradient_tolerance, s.max_newton_steps, std::nullopt};
    try {
      return fit_regularized_erm(world.train, s.loss, world.features, tc).params;
    } catch (const NonConvergenceError& e) {
      return e.best().params;
    }
  }
};

VerificationReport run_theorem1(const Setup& s) {
  if (s.fixtures) {
    return check_theorem1(p4_population(), SurrogateSpec::mollified_hinge(0.25), AcceptanceSpec(AcceptanceKind::triangle),
                          ParameterVector(vec({1.0}), FeatureMap(FeatureKind::identity, 1)), 0.75);
  }
  return check_theorem1(s.train_pop, s.cfg.sampler.loss, s.cfg.sampler.acceptance, s.probe_params(), s.r);
}

VerificationReport run_residual(const Setup& s) {
  const auto r_list = opt<std::vector<double>>(s.cfg.verify, "residual_r_list", {0.4, 0.2, 0.1, 0.05});
  if (s.fixtures) {
    return check_residual_order(disk_population(500, s.seed), SurrogateSpec::logistic(),
                                AcceptanceSpec(AcceptanceKind::triangle), disk_probe_params(), r_list);
  }
  return check_residual_order(s.train_pop, s.cfg.sampler.loss, s.cfg.sampler.acceptance, s.probe_params(), r_list);
}

VerificationReport run_prop1(const Setup& s) {
  const auto r_list = opt<std::vector<double>>(s.cfg.verify, "prop1_r_list", {100.0, 0.75, 0.4, 0.075, 0.0075});
  if (s.fixtures) {
    return check_prop1_bound(p4_population(), AcceptanceSpec(AcceptanceKind::triangle),
                             ParameterVector(vec({1.0}), FeatureMap(FeatureKind::identity, 1)), r_list);
  }
  return check_prop1_bound(s.train_pop, s.cfg.sampler.acceptance, s.probe_params(), r_list);
}

VerificationReport run_descent(const Setup& s) {
  const SamplerConfig sc = s.sampler();
  DescentCheckConfig dc;
  const auto prefix = opt<std::size_t>(s.cfg.verify, "descent_prefix", 20);
  if (prefix < 1 || prefix > s.world.train.size()) throw std::invalid_argument("verify.descent_prefix out of range");
  dc.prefix.assign(s.world.train.begin(), s.world.train.begin() + static_cast<std::ptrdiff_t>(prefix));
  dc.r = sc.r;
  dc.acceptance = sc.acceptance;
  dc.loss = sc.loss;
  dc.features = sc.features;
  dc.epsilon = sc.epsilon;
  dc.trials = opt<std::size_t>(s.cfg.verify, "descent_trials", 1000);
  dc.seed = s.seed;
  dc.gradient_tolerance = sc.gradient_tolerance;
  double radius = 0.0;
  for (const auto& z : s.world.train) radius = std::max(radius, sc.features.apply(z.x).norm());
  const double m_ell = loss_derivative_bound(sc.loss, radius).m_ell;
  // The bound needs psi'(0) < 0 and r > 0, both guaranteed by the specs.
  dc.lambda = opt<double>(s.cfg.verify, "descent_lambda_multiplier", 1.0) *
              lambda_lower_bound(sc.epsilon, static_cast<double>(sc.budget), m_ell, sc.loss.psi_prime_at_zero(),
                                 sc.acceptance.total_mass(), sc.r);
  VerificationReport rep = check_descent_direction(s.train_pop, dc);
  rep.details["budget_n"] = sc.budget;
  rep.details["m_ell"] = m_ell;
  return rep;
}

VerificationReport run_convergence(const Setup& s) {
  ConvergenceCheckConfig cc;
  cc.n_list = opt<std::vector<std::size_t>>(s.cfg.verify, "convergence_n_list", cc.n_list);
  cc.runs_per_n = opt<std::size_t>(s.cfg.verify, "convergence_runs", cc.runs_per_n);
  cc.lambda_scale = opt<double>(s.cfg.verify, "convergence_lambda_scale", cc.lambda_scale);
  if (auto it = s.cfg.verify.find("convergence_norm_bound"); it != s.cfg.verify.end()) cc.norm_bound = it->get<double>();
  cc.sampler = s.sampler();
  cc.seed = s.seed;
  if (const auto* spec = std::get_if<GaussianMixtureSpec>(&s.cfg.world)) {
    // The stream samples the mixture itself, so grad Z_r is evaluated on a
    // snapshot large enough that its sampling noise sits well below the
    // gradient norms being compared.
    const GaussianMixtureSpec m = *spec;
    const StreamSource stream = StreamSource::generative([m](Rng& rng) { return sample_mixture(m, 1, rng).front(); });
    Rng eval_rng = Rng(s.cfg.root_seed).substream("convergence-eval");
    const Population eval =
        mixture_snapshot(m, opt<std::size_t>(s.cfg.verify, "convergence_eval_count", 50000), eval_rng);
    return check_convergence_trend(stream, eval, cc).report;
  }
  return check_convergence_trend(StreamSource::finite(s.world.train), s.train_pop, cc).report;
}

VerificationReport run_grad_limit(const Setup& s) {
  const auto r_list = opt<std::vector<double>>(s.cfg.verify, "grad_limit_r_list", {0.8, 0.4, 0.2, 0.1});
  const auto base = opt<std::size_t>(s.cfg.verify, "grad_limit_base_count", 2000);
  const AcceptanceSpec q = s.fixtures ? AcceptanceSpec(AcceptanceKind::cosine_bump) : s.cfg.sampler.acceptance;
  if (s.fixtures) {
    return check_grad_limit_stabilization(mixture_population(two_gaussian_line(), base), q,
                                          ParameterVector(vec({1.0}), FeatureMap(FeatureKind::identity, 1)), r_list,
                                          base, s.seed);
  }
  if (const auto* spec = std::get_if<GaussianMixtureSpec>(&s.cfg.world)) {
    return check_grad_limit_stabilization(mixture_population(*spec, base), q, s.probe_params(), r_list, base, s.seed);
  }
  return check_grad_limit_stabilization(s.train_pop, q, s.probe_params(), r_list, base, s.seed);
}

}  // namespace

Population p4_population() {
  std::vector<Example> ex;
  for (auto [x, y] : {std::pair{-2.0, -1}, {-0.5, -1}, {0.5, 1}, {2.0, 1}}) ex.emplace_back(vec({x}), y);
  return Population::uniform(std::move(ex));
}

Population disk_population(std::size_t count, std::uint64_t seed) {
  Rng rng = Rng(seed).substream("disk-population");
  std::vector<Example> ex;
  ex.reserve(count);
  while (ex.size() < count) {
    const double a = 2.0 * rng.uniform() - 1.0;
    const double b = 2.0 * rng.uniform() - 1.0;
    if (a * a + b * b > 1.0) continue;
    const double p = 1.0 / (1.0 + std::exp(-(3.0 * a - 2.0 * b + 0.5)));
    ex.emplace_back(vec({a, b}), rng.uniform() < p ? 1 : -1);
  }
  return Population::uniform(std::move(ex));
}

ParameterVector disk_probe_params() {
  return ParameterVector(vec({1.5, -1.0, 0.2}), FeatureMap(FeatureKind::identity_with_bias, 2));
}

GaussianMixtureSpec two_gaussian_line() {
  GaussianMixtureSpec spec;
  spec.components.push_back({vec({1.0}), 1.0, 0.5, 1});
  spec.components.push_back({vec({-1.0}), 1.0, 0.5, -1});
  return spec;
}

ExperimentConfig verify_default_config() {
  ExperimentConfig cfg;
  cfg.sampler.loss = SurrogateSpec::mollified_hinge(0.25);
  cfg.sampler.acceptance = AcceptanceSpec(AcceptanceKind::triangle);
  cfg.sampler.r = 0.5;
  return cfg;
}

const std::vector<std::string>& verify_check_names() {
  static const std::vector<std::string> names{"theorem1", "residual-order", "prop1",
                                              "descent",  "convergence",    "grad-limit"};
  return names;
}

std::vector<VerificationReport> run_verify_checks(const std::vector<std::string>& names,
                                                  const std::optional<ExperimentConfig>& cfg, std::ostream& out,
                                                  std::optional<std::uint64_t> seed) {
  std::vector<std::string> selected;
  for (const auto& n : names) {
    if (n == "all") {
      selected.insert(selected.end(), verify_check_names().begin(), verify_check_names().end());
    } else if (std::find(verify_check_names().begin(), verify_check_names().end(), n) != verify_check_names().end()) {
      selected.push_back(n);
    } else {
      throw std::invalid_argument("unknown check '" + n + "'");
    }
  }
  if (selected.empty()) throw std::invalid_argument("no check selected");

  ExperimentConfig effective = cfg ? *cfg : verify_default_config();
  if (seed) effective.verify["seed"] = *seed;
  const Setup setup(effective, !cfg.has_value());
  std::vector<VerificationReport> reports;
  for (const auto& name : selected) {
    VerificationReport rep;
    if (name == "theorem1") rep = run_theorem1(setup);
    else if (name == "residual-order") rep = run_residual(setup);
    else if (name == "prop1") rep = run_prop1(setup);
    else if (name == "descent") rep = run_descent(setup);
    else if (name == "convergence") rep = run_convergence(setup);
    else rep = run_grad_limit(setup);
    out << rep.to_json().dump() << '\n' << std::flush;
    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace uslab
