#include "uslab/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "uslab/bounds.hpp"
#include "uslab/erm.hpp"
#include "uslab/oracle.hpp"
#include "uslab/parallel.hpp"

namespace uslab {
namespace {

using nlohmann::json;

// Standard normal 0.99 quantile.
constexpr double kZ99 = 2.3263478740408408;

json vec_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json loss_json(const SurrogateSpec& psi) {
  json j{{"kind", to_string(psi.kind())}};
  if (psi.kind() == LossKind::mollified_hinge) j["rho"] = psi.rho();
  return j;
}

json params_json(const ParameterVector& p) {
  return {{"theta", vec_json(p.theta)}, {"features", to_string(p.features.kind())}};
}

VerificationReport make_report(std::string name, const json& inputs, std::uint64_t seed = 0) {
  VerificationReport rep;
  rep.check = std::move(name);
  rep.seed = seed;
  rep.fingerprint = fingerprint_of(inputs);
  return rep;
}

VerificationReport skip(VerificationReport rep, std::string reason) {
  rep.pass = false;
  rep.skipped = true;
  rep.skip_reason = std::move(reason);
  return rep;
}

const ExactPopulation& require_exact(const Population& pop, const char* who) {
  if (!pop.is_exact()) throw std::invalid_argument(std::string(who) + " needs an exact population");
  return pop.as_exact();
}

/// Copy sorted by (x lexicographically, y), weights carried along.
Population canonical_sort(const ExactPopulation& p) {
  std::vector<std::size_t> order(p.examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& xa = p.examples[a].x;
    const auto& xb = p.examples[b].x;
    const auto n = std::min(xa.size(), xb.size());
    for (Eigen::Index k = 0; k < n; ++k) {
      if (xa[k] != xb[k]) return xa[k] < xb[k];
    }
    if (xa.size() != xb.size()) return xa.size() < xb.size();
    return p.examples[a].y < p.examples[b].y;
  });
  std::vector<Example> ex;
  std::vector<double> w;
  ex.reserve(order.size());
  w.reserve(order.size());
  for (auto i : order) {
    ex.push_back(p.examples[i]);
    w.push_back(p.weights[i]);
  }
  return Population::exact(std::move(ex), std::move(w));
}

/// ||E[grad l] - eta grad Z_r|| and its pieces at one scale.
struct IdentityResidual {
  double acceptance;
  double eta;
  Vector lhs;
  Vector rhs;
  double residual;
};

IdentityResidual identity_residual(const Population& pop, const SurrogateSpec& psi, const AcceptanceSpec& q,
                                   const ParameterVector& params, double r, double a) {
  IdentityResidual out;
  out.acceptance = a;
  out.eta = eta_scale(psi, q, r, a);
  out.lhs = expected_accepted_gradient(pop, psi, q, params, r).value;
  out.rhs = out.eta * grad_smoothed_zero_one(pop, q, params, r).value;
  out.residual = (out.lhs - out.rhs).norm();
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// a_r(theta) > 0 on an exact population, stopping at the first acceptable point.
bool has_acceptable_point(const ExactPopulation& p, const AcceptanceSpec& q, const ParameterVector& params, double r) {
  for (std::size_t i = 0; i < p.examples.size(); ++i) {
    if (p.weights[i] > 0.0 && acceptance_probability(q, score(params, p.examples[i].x) / r) > 0.0) return true;
  }
  return false;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

json VerificationReport::to_json() const {
  json j{{"check", check},         {"pass", pass}, {"skipped", skipped}, {"statistic", statistic},
         {"tolerance", tolerance}, {"seed", seed}, {"fingerprint", fingerprint}};
  if (skipped) j["skip_reason"] = skip_reason;
  if (!details.empty()) j["details"] = details;
  return j;
}

std::string fingerprint_of(const json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_label(j.dump())));
  return buf;
}

std::string population_digest(const Population& pop) {
  if (!pop.is_exact()) {
    const auto& g = pop.as_generative();
    return "generative:" + std::to_string(g.monte_carlo_count);
  }
  // order-invariant, like the checks themselves
  const Population sorted = canonical_sort(pop.as_exact());
  const auto& p = sorted.as_exact();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (std::size_t i = 0; i < p.examples.size(); ++i) {
    const auto& z = p.examples[i];
    for (Eigen::Index k = 0; k < z.x.size(); ++k) feed(std::bit_cast<std::uint64_t>(z.x[k]));
    feed(static_cast<std::uint64_t>(z.y));
    feed(std::bit_cast<std::uint64_t>(p.weights[i]));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

VerificationReport check_theorem1(const Population& pop, const SurrogateSpec& psi, const AcceptanceSpec& q,
                                  const ParameterVector& params, double r, double tolerance) {
  const auto& raw = require_exact(pop, "check_theorem1");
  const json inputs{{"population", population_digest(pop)}, {"loss", loss_json(psi)},
                    {"acceptance", to_string(q.kind())},     {"params", params_json(params)},
                    {"r", r},                                {"tolerance", tolerance}};
  VerificationReport rep = make_report("theorem1", inputs);
  rep.tolerance = tolerance;

  if (!q.theory_compliant()) return skip(rep, "q not continuous");
  const double m_psi = psi.local_linear_radius();
  if (m_psi <= 0.0) return skip(rep, "loss is not exactly linear near 0");

  const Population sorted = canonical_sort(raw);
  const double a = acceptance_mass(sorted, q, params, r).scalar();
  if (!(a > 0.0)) return skip(rep, "a_r(theta) = 0");

  // Global condition r M_q <= m_psi, else the per-point one: every point with
  // q(S/r) > 0 has its margin inside the linear region.
  std::string hypothesis = "global";
  if (r * q.support_bound() > m_psi) {
    hypothesis = "per-point";
    for (const auto& z : sorted.as_exact().examples) {
      const double s = score(params, z.x);
      if (acceptance_probability(q, s / r) > 0.0 && std::abs(s) > m_psi) {
        return skip(rep, "r exceeds m_psi / M_q and an acceptable point leaves the linear region");
      }
    }
  }

  const IdentityResidual res = identity_residual(sorted, psi, q, params, r, a);
  rep.statistic = res.residual / (1.0 + res.rhs.norm());
  rep.pass = rep.statistic <= tolerance;
  rep.details = {{"hypothesis", hypothesis}, {"acceptance_mass", a},        {"eta", res.eta},
                 {"expected_gradient", vec_json(res.lhs)}, {"eta_grad_zr", vec_json(res.rhs)},
                 {"residual", res.residual}};
  return rep;
}

VerificationReport check_residual_order(const Population& pop, const SurrogateSpec& psi,
                                        const AcceptanceSpec& q, const ParameterVector& params,
                                        const std::vector<double>& r_list, double slope_min, double slope_max,
                                        double exact_tolerance) {
  require_exact(pop, "check_residual_order");
  if (r_list.empty()) throw std::invalid_argument("check_residual_order: empty r list");
  if (!(slope_min < slope_max)) throw std::invalid_argument("check_residual_order: empty slope band");
  const json inputs{{"population", population_digest(pop)}, {"loss", loss_json(psi)},
                    {"acceptance", to_string(q.kind())},     {"params", params_json(params)},
                    {"r_list", r_list},                      {"slope_band", {slope_min, slope_max}}};
  VerificationReport rep = make_report("residual-order", inputs);
  if (!q.theory_compliant()) return skip(rep, "q not continuous");

  std::vector<double> rho;
  json per_r = json::array();
  for (double r : r_list) {
    const double a = acceptance_mass(pop, q, params, r).scalar();
    if (!(a > 0.0)) return skip(rep, "a_r(theta) = 0 at r = " + fmt(r));
    const IdentityResidual res = identity_residual(pop, psi, q, params, r, a);
    rho.push_back(res.residual * a);
    per_r.push_back({{"r", r}, {"acceptance_mass", a}, {"rho", rho.back()}});
  }
  rep.details["per_r"] = per_r;

  const double r_max = *std::max_element(r_list.begin(), r_list.end());
  if (psi.local_linear_radius() > 0.0 && r_max * q.support_bound() <= psi.local_linear_radius()) {
    rep.details["mode"] = "exact";
    rep.statistic = *std::max_element(rho.begin(), rho.end());
    rep.tolerance = exact_tolerance;
    rep.pass = rep.statistic <= exact_tolerance;
    return rep;
  }

  rep.details["mode"] = "slope";
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < r_list.size(); ++i) {
    if (rho[i] > 0.0 && std::isfinite(rho[i])) {
      lx.push_back(std::log(r_list[i]));
      ly.push_back(std::log(rho[i]));
    }
  }
  if (lx.size() < 3) return skip(rep, "fewer than 3 scales with a nonzero residual");
  const double k = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / k;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / k;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (!(sxx > 0.0)) return skip(rep, "r list needs at least two distinct scales");
  const double slope = sxy / sxx;
  // Band test written as a distance from the band centre.
  rep.statistic = std::abs(slope - 0.5 * (slope_min + slope_max));
  rep.tolerance = 0.5 * (slope_max - slope_min);
  rep.pass = rep.statistic <= rep.tolerance;
  rep.details["slope"] = slope;
  rep.details["slope_band"] = {slope_min, slope_max};
  return rep;
}

VerificationReport check_descent_direction(const Population& pop, const DescentCheckConfig& cfg) {
  const auto& p = require_exact(pop, "check_descent_direction");
  if (cfg.prefix.empty()) throw std::invalid_argument("check_descent_direction: empty prefix");
  if (cfg.trials < 2) throw std::invalid_argument("check_descent_direction: need at least 2 trials");
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("check_descent_direction: lambda must be positive");
  const json inputs{{"population", population_digest(pop)},
                    {"prefix", population_digest(Population::uniform(cfg.prefix))},
                    {"lambda", cfg.lambda},
                    {"r", cfg.r},
                    {"acceptance", to_string(cfg.acceptance.kind())},
                    {"loss", loss_json(cfg.loss)},
                    {"features", to_string(cfg.features.kind())},
                    {"epsilon", cfg.epsilon},
                    {"trials", cfg.trials}};
  VerificationReport rep = make_report("descent", inputs, cfg.seed);
  rep.tolerance = 0.0;

  if (!cfg.acceptance.theory_compliant()) return skip(rep, "q not continuous");
  const double m_psi = cfg.loss.local_linear_radius();
  if (m_psi <= 0.0) return skip(rep, "loss is not exactly linear near 0");
  if (cfg.r * cfg.acceptance.support_bound() > m_psi) return skip(rep, "r exceeds m_psi / M_q");

  TrainConfig train{cfg.lambda, cfg.gradient_tolerance, 200, std::nullopt};
  const ParameterVector prev = fit_regularized_erm(cfg.prefix, cfg.loss, cfg.features, train).params;
  const double a = acceptance_mass(pop, cfg.acceptance, prev, cfg.r).scalar();
  if (!(a > 0.0)) return skip(rep, "a_r(theta) = 0");
  const Vector g = grad_smoothed_zero_one(pop, cfg.acceptance, prev, cfg.r).value;
  rep.details = {{"theta_prev", vec_json(prev.theta)}, {"grad_zr", vec_json(g)}, {"acceptance_mass", a},
                 {"lambda", cfg.lambda}};
  if (g.norm() < cfg.epsilon) return skip(rep, "||grad Z_r(theta)|| below epsilon");

  std::vector<double> cumulative(p.weights.size());
  std::partial_sum(p.weights.begin(), p.weights.end(), cumulative.begin());
  const double total = cumulative.back();

  struct Trial {
    double dot = 0.0;
    double step = 0.0;
    bool accepted = false;
  };
  const Rng root(cfg.seed);
  train.warm_start = prev.theta;
  const auto trials = parallel_map<Trial>(cfg.trials, [&](std::size_t i) {
    Rng rng = root.substream(static_cast<std::uint64_t>(i));
    Trial t;
    for (std::size_t k = 0; k < cfg.max_consecutive_rejections; ++k) {
      const double u = rng.uniform() * total;
      auto idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) -
                                          cumulative.begin());
      idx = std::min(idx, p.examples.size() - 1);
      const Example& z = p.examples[idx];
      if (!accept_draw(cfg.acceptance, prev, z.x, cfg.r, rng)) continue;
      std::vector<Example> data = cfg.prefix;
      data.push_back(z);
      const Vector next = fit_regularized_erm(data, cfg.loss, cfg.features, train).params.theta;
      t.dot = g.dot(next - prev.theta);
      t.step = (next - prev.theta).norm();
      t.accepted = true;
      break;
    }
    return t;
  });

  std::vector<double> dots;
  double max_step = 0.0;
  for (const auto& t : trials) {
    if (!t.accepted) return skip(rep, "no point accepted within max_consecutive_rejections draws");
    dots.push_back(t.dot);
    max_step = std::max(max_step, t.step);
  }
  const double n = static_cast<double>(dots.size());
  const double mean = std::accumulate(dots.begin(), dots.end(), 0.0) / n;
  double ss = 0.0;
  for (double d : dots) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double upper = mean + kZ99 * sd / std::sqrt(n);

  double radius = 0.0;
  for (const auto& z : p.examples) radius = std::max(radius, cfg.features.apply(z.x).norm());
  for (const auto& z : cfg.prefix) radius = std::max(radius, cfg.features.apply(z.x).norm());
  const double m_ell = loss_derivative_bound(cfg.loss, radius).m_ell;
  rep.statistic = upper;
  rep.pass = upper < 0.0;
  rep.details["mean_dot"] = mean;
  rep.details["sd_dot"] = sd;
  rep.details["upper_99"] = upper;
  rep.details["max_step_norm"] = max_step;
  rep.details["step_bound"] = bounded_step_bound(m_ell, cfg.lambda);
  return rep;
}

std::size_t randomized_iterate_draw(std::size_t n_seed, std::size_t n, Rng& rng) {
  if (n_seed >= n) throw std::invalid_argument("randomized_iterate_draw: empty range");
  if (n_seed == 0) throw std::invalid_argument("randomized_iterate_draw: n_seed must be positive");
  double total = 0.0;
  for (std::size_t t = n_seed; t < n; ++t) total += 1.0 / static_cast<double>(t);
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t t = n_seed; t < n; ++t) {
    acc += 1.0 / static_cast<double>(t);
    if (u < acc) return t;
  }
  return n - 1;
}

ConvergenceDiagnostics check_convergence_trend(const StreamSource& stream, const Population& eval_pop,
                                               const ConvergenceCheckConfig& cfg) {
  if (cfg.n_list.empty() || cfg.runs_per_n == 0) throw std::invalid_argument("check_convergence_trend: empty plan");
  for (std::size_t k = 0; k < cfg.n_list.size(); ++k) {
    if (cfg.n_list[k] < 2) throw std::invalid_argument("check_convergence_trend: budgets must be at least 2");
    if (k > 0 && cfg.n_list[k] <= cfg.n_list[k - 1]) {
      throw std::invalid_argument("check_convergence_trend: budgets must increase");
    }
  }
  const SamplerConfig& base = cfg.sampler;
  const auto& eval = require_exact(eval_pop, "check_convergence_trend");
  json inputs{{"population", population_digest(eval_pop)},
              {"n_list", cfg.n_list},
              {"runs_per_n", cfg.runs_per_n},
              {"lambda_scale", cfg.lambda_scale},
              {"seed_size_scale", cfg.seed_size_scale},
              {"r", base.r},
              {"acceptance", to_string(base.acceptance.kind())},
              {"loss", loss_json(base.loss)},
              {"required_drop", cfg.required_drop}};
  inputs["norm_bound"] = cfg.norm_bound ? json(*cfg.norm_bound) : json("100x seed fit");

  ConvergenceDiagnostics out;
  out.report = make_report("convergence", inputs, cfg.seed);

  struct RunOutcome {
    bool train_failure = false;
    bool early_stop = false;
    bool failed_bound = false;
    double gradient_norm = 0.0;
  };

  for (std::size_t n : cfg.n_list) {
    ConvergenceLevel level;
    level.n = n;
    const double n23 = std::pow(static_cast<double>(n), 2.0 / 3.0);
    level.lambda = cfg.lambda_scale * n23;
    level.seed_size = static_cast<std::size_t>(
        std::ceil(cfg.seed_size_scale * static_cast<double>(seed_size_for_budget(n))));
    level.seed_size = std::clamp<std::size_t>(level.seed_size, 1, n - 1);

    const auto outcomes = parallel_map<RunOutcome>(cfg.runs_per_n, [&](std::size_t i) {
      SamplerConfig sc = base;
      sc.budget = n;
      sc.seed_size = level.seed_size;
      sc.lambda = level.lambda;
      sc.rng_seed = derive_seed(derive_seed(cfg.seed, n), i);
      const RunTrajectory traj = run_uncertainty_sampling(stream, sc);
      RunOutcome o;
      if (traj.termination == Termination::train_failure) {
        o.train_failure = true;
        return o;
      }
      o.early_stop = traj.termination != Termination::budget_exhausted;
      Rng pick = Rng(sc.rng_seed).substream("randomized-iterate");
      const std::size_t t = randomized_iterate_draw(level.seed_size, n, pick);
      // An early stop leaves theta fixed from then on.
      const std::size_t at = std::min(t - level.seed_size, traj.thetas.size() - 1);
      o.gradient_norm = grad_smoothed_zero_one(eval_pop, sc.acceptance, traj.thetas[at], sc.r).value.norm();

      const double bound = cfg.norm_bound ? *cfg.norm_bound : 100.0 * traj.thetas.front().theta.norm();
      for (const auto& th : traj.thetas) {
        if (th.theta.norm() > bound || !has_acceptable_point(eval, sc.acceptance, th, sc.r)) {
          o.failed_bound = true;
          break;
        }
      }
      return o;
    });

    std::size_t failures = 0;
    for (const auto& o : outcomes) {
      if (o.train_failure) {
        ++level.train_failures;
        continue;
      }
      if (o.early_stop) ++level.early_stops;
      if (o.failed_bound) ++failures;
      level.gradient_norms.push_back(o.gradient_norm);
    }
    if (level.gradient_norms.empty()) {
      out.levels.push_back(level);
      out.report = skip(out.report, "every run failed to train at n = " + std::to_string(n));
      return out;
    }
    level.median_gradient_norm = median_of(level.gradient_norms);
    level.delta_estimate = static_cast<double>(failures) / static_cast<double>(level.gradient_norms.size());
    out.levels.push_back(std::move(level));
  }

  const auto& lv = out.levels;
  double worst_increase = 0.0;
  json per_n = json::array();
  for (std::size_t k = 0; k < lv.size(); ++k) {
    if (k > 0) worst_increase = std::max(worst_increase, lv[k].median_gradient_norm / lv[k - 1].median_gradient_norm);
    per_n.push_back({{"n", lv[k].n},
                     {"seed_size", lv[k].seed_size},
                     {"lambda", lv[k].lambda},
                     {"median_grad_norm", lv[k].median_gradient_norm},
                     {"grad_norms", lv[k].gradient_norms},
                     {"delta_estimate", lv[k].delta_estimate},
                     {"train_failures", lv[k].train_failures},
                     {"early_stops", lv[k].early_stops}});
  }
  const double keep = 1.0 - cfg.required_drop;
  const double ratio = lv.back().median_gradient_norm / lv.front().median_gradient_norm;
  // Any increase between consecutive budgets pushes the statistic above keep.
  out.report.statistic = std::max(ratio, keep * worst_increase);
  out.report.tolerance = keep;
  out.report.pass = out.report.statistic <= keep;
  out.report.details = {{"per_n", per_n}, {"last_over_first", ratio}, {"max_consecutive_ratio", worst_increase}};
  return out;
}

VerificationReport check_prop1_bound(const Population& pop, const AcceptanceSpec& q,
                                     const ParameterVector& params, const std::vector<double>& r_list) {
  const auto& p = require_exact(pop, "check_prop1_bound");
  if (r_list.empty()) throw std::invalid_argument("check_prop1_bound: empty r list");
  const json inputs{{"population", population_digest(pop)}, {"acceptance", to_string(q.kind())},
                    {"params", params_json(params)}, {"r_list", r_list}};
  VerificationReport rep = make_report("prop1", inputs);

  std::vector<double> scores;
  scores.reserve(p.examples.size());
  for (const auto& z : p.examples) {
    scores.push_back(score(params, z.x));
    if (scores.back() == 0.0) return skip(rep, "an example has score exactly 0");
  }
  // Rounding allowance for the two index-ordered sums.
  const double slack = 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(p.examples.size());
  const double z = zero_one_loss(params, pop);
  double worst = -std::numeric_limits<double>::infinity();
  json per_r = json::array();
  for (double r : r_list) {
    const double zr = smoothed_zero_one(pop, q, params, r).scalar();
    double band = 0.0;
    std::size_t band_count = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (std::abs(scores[i]) <= r * q.support_bound()) {
        band += p.weights[i];
        ++band_count;
      }
    }
    const double gap = std::abs(zr - z);
    // An empty band must give Z_r == Z up to rounding.
    const double excess = gap - band - slack;
    worst = std::max(worst, excess);
    per_r.push_back({{"r", r}, {"z_r", zr}, {"gap", gap}, {"band_mass", band}, {"band_count", band_count}});
  }
  rep.statistic = worst;
  rep.tolerance = 0.0;
  rep.pass = worst <= 0.0;
  rep.details = {{"z", z}, {"per_r", per_r}};
  return rep;
}

VerificationReport check_grad_limit_stabilization(const Population& pop, const AcceptanceSpec& q,
                                                  const ParameterVector& params,
                                                  const std::vector<double>& r_list, std::size_t base_count,
                                                  std::uint64_t seed, double sigmas) {
  if (r_list.size() < 2) throw std::invalid_argument("check_grad_limit_stabilization: need at least 2 scales");
  for (std::size_t k = 1; k < r_list.size(); ++k) {
    if (!(r_list[k] < r_list[k - 1]) || !(r_list[k] > 0.0)) {
      throw std::invalid_argument("check_grad_limit_stabilization: r list must decrease and stay positive");
    }
  }
  if (base_count < 2) throw std::invalid_argument("check_grad_limit_stabilization: base_count must be at least 2");

  // Linear scores: the boundary is regular unless the slope part of theta vanishes.
  const auto kind = params.features.kind();
  const Eigen::Index slope_dim = static_cast<Eigen::Index>(params.features.input_dim());
  if ((kind == FeatureKind::identity || kind == FeatureKind::identity_with_bias) &&
      params.theta.head(slope_dim).squaredNorm() == 0.0) {
    throw std::invalid_argument("theta has a zero slope and is not a regular parameter");
  }

  const json inputs{{"population", population_digest(pop)}, {"acceptance", to_string(q.kind())},
                    {"params", params_json(params)},        {"r_list", r_list},
                    {"base_count", base_count},             {"sigmas", sigmas}};
  VerificationReport rep = make_report("grad-limit", inputs, seed);
  rep.tolerance = sigmas;

  if (!q.smooth()) return skip(rep, "q not smooth");
  if (kind == FeatureKind::quadratic_with_bias) return skip(rep, "regularity check covers linear scores only");
  if (pop.is_exact() || !pop.as_generative().has_smooth_density) {
    return skip(rep, "not applicable: population has no smooth density");
  }

  const auto& g = pop.as_generative();
  std::vector<OracleResult> grads;
  json per_r = json::array();
  for (std::size_t k = 0; k < r_list.size(); ++k) {
    const double scale = r_list.front() / r_list[k];
    const auto count = static_cast<std::size_t>(std::ceil(static_cast<double>(base_count) * scale * scale));
    const Population scaled = Population::generative(g.sampler, count, true);
    grads.push_back(grad_smoothed_zero_one(scaled, q, params, r_list[k], derive_seed(seed, k)));
    per_r.push_back({{"r", r_list[k]},
                     {"samples", count},
                     {"grad", vec_json(grads.back().value)},
                     {"standard_error", vec_json(grads.back().standard_error)}});
  }
  json pairs = json::array();
  double last = 0.0;
  for (std::size_t k = 1; k < grads.size(); ++k) {
    const double dist = (grads[k].value - grads[k - 1].value).norm();
    const double se = std::sqrt(grads[k].standard_error.squaredNorm() + grads[k - 1].standard_error.squaredNorm());
    last = se > 0.0 ? dist / se : (dist == 0.0 ? 0.0 : std::numeric_limits<double>::max());
    pairs.push_back({{"distance", dist}, {"combined_se", se}, {"ratio", last}});
  }
  rep.statistic = last;
  rep.pass = last <= sigmas;
  rep.details = {{"per_r", per_r}, {"pairs", pairs}};
  return rep;
}

}  // namespace uslab
