#include "uslab/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sharding.hpp"

namespace uslab {

Example::Example(Vector features, int label) : x(std::move(features)), y(label) {
  if (y != -1 && y != 1) {
    throw std::invalid_argument("label must be -1 or +1, got " + std::to_string(y));
  }
  if (!x.allFinite()) throw std::invalid_argument("example has non-finite features");
}

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::identity:
      return "identity";
    case FeatureKind::identity_with_bias:
      return "identity-with-bias";
    case FeatureKind::quadratic_with_bias:
      return "quadratic-with-bias";
  }
  return "unknown";
}

FeatureKind feature_kind_from_string(std::string_view name) {
  if (name == "identity") return FeatureKind::identity;
  if (name == "identity-with-bias") return FeatureKind::identity_with_bias;
  if (name == "quadratic-with-bias") return FeatureKind::quadratic_with_bias;
  throw std::invalid_argument("unknown feature map '" + std::string(name) + "'");
}

FeatureMap::FeatureMap(FeatureKind kind, std::size_t input_dim) : kind_(kind), input_dim_(input_dim) {
  if (input_dim == 0) throw std::invalid_argument("feature map input dimension must be positive");
}

std::size_t FeatureMap::output_dim() const {
  switch (kind_) {
    case FeatureKind::identity:
      return input_dim_;
    case FeatureKind::identity_with_bias:
      return input_dim_ + 1;
    case FeatureKind::quadratic_with_bias:
      return input_dim_ * (input_dim_ + 1) / 2 + input_dim_ + 1;
  }
  return 0;
}

void FeatureMap::check_input(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim_) {
    throw std::invalid_argument("feature dimension mismatch: expected " + std::to_string(input_dim_) +
                                ", got " + std::to_string(x.size()));
  }
}

void FeatureMap::apply_into(const Vector& x, Eigen::Ref<Vector> out) const {
  check_input(x);
  const auto k = static_cast<Eigen::Index>(input_dim_);
  switch (kind_) {
    case FeatureKind::identity:
      out = x;
      return;
    case FeatureKind::identity_with_bias:
      out.head(k) = x;
      out[k] = 1.0;
      return;
    case FeatureKind::quadratic_with_bias: {
      out[0] = 1.0;
      out.segment(1, k) = x;
      Eigen::Index pos = k + 1;
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i; j < k; ++j) out[pos++] = x[i] * x[j];
      return;
    }
  }
}

Vector FeatureMap::apply(const Vector& x) const {
  Vector out(static_cast<Eigen::Index>(output_dim()));
  apply_into(x, out);
  return out;
}

double FeatureMap::dot(const Vector& theta, const Vector& x) const {
  check_input(x);
  if (static_cast<std::size_t>(theta.size()) != output_dim()) {
    throw std::invalid_argument("parameter dimension mismatch");
  }
  const auto k = static_cast<Eigen::Index>(input_dim_);
  double s = 0.0;
  switch (kind_) {
    case FeatureKind::identity:
      for (Eigen::Index i = 0; i < k; ++i) s += theta[i] * x[i];
      return s;
    case FeatureKind::identity_with_bias:
      for (Eigen::Index i = 0; i < k; ++i) s += theta[i] * x[i];
      return s + theta[k];
    case FeatureKind::quadratic_with_bias: {
      s = theta[0];
      for (Eigen::Index i = 0; i < k; ++i) s += theta[i + 1] * x[i];
      Eigen::Index pos = k + 1;
      for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i; j < k; ++j) s += theta[pos++] * (x[i] * x[j]);
      return s;
    }
  }
  return s;
}

ParameterVector::ParameterVector(Vector coords, FeatureMap map) : theta(std::move(coords)), features(map) {
  if (static_cast<std::size_t>(theta.size()) != features.output_dim()) {
    throw std::invalid_argument("parameter length " + std::to_string(theta.size()) +
                                " does not match feature dimension " +
                                std::to_string(features.output_dim()));
  }
}

ParameterVector ParameterVector::zeros(const FeatureMap& map) {
  return {Vector::Zero(static_cast<Eigen::Index>(map.output_dim())), map};
}

double score(const ParameterVector& params, const Vector& x) {
  return params.features.dot(params.theta, x);
}

double heaviside(double s) {
  if (s < 0.0) return 0.0;
  if (s > 0.0) return 1.0;
  return 0.5;
}

int predict(const ParameterVector& params, const Vector& x) { return score(params, x) > 0.0 ? 1 : -1; }

Population Population::exact(std::vector<Example> examples, std::vector<double> weights) {
  if (examples.empty()) throw std::invalid_argument("exact population must be nonempty");
  if (examples.size() != weights.size()) {
    throw std::invalid_argument("exact population: weights and examples differ in length");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("population weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("population weights must sum to 1 (got " + std::to_string(total) + ")");
  }
  return Population(ExactPopulation{std::move(examples), std::move(weights)});
}

Population Population::uniform(std::vector<Example> examples) {
  if (examples.empty()) throw std::invalid_argument("exact population must be nonempty");
  // Uniform weights sum to 1 by construction; the running float sum of n
  // copies of 1/n is not checked because it drifts by O(n * eps).
  std::vector<double> weights(examples.size(), 1.0 / static_cast<double>(examples.size()));
  return Population(ExactPopulation{std::move(examples), std::move(weights)});
}

Population Population::generative(std::function<Example(Rng&)> sampler, std::size_t monte_carlo_count,
                                  bool has_smooth_density) {
  if (!sampler) throw std::invalid_argument("generative population needs a sampler");
  if (monte_carlo_count < 1) throw std::invalid_argument("monte_carlo_count must be at least 1");
  return Population(GenerativePopulation{std::move(sampler), monte_carlo_count, has_smooth_density});
}

const ExactPopulation& Population::as_exact() const {
  if (const auto* p = std::get_if<ExactPopulation>(&data_)) return *p;
  throw std::invalid_argument("operation requires an exact population");
}

const GenerativePopulation& Population::as_generative() const {
  if (const auto* p = std::get_if<GenerativePopulation>(&data_)) return *p;
  throw std::invalid_argument("operation requires a generative population");
}

Population Population::with_flipped_labels() const {
  if (is_exact()) {
    ExactPopulation flipped = as_exact();
    for (auto& z : flipped.examples) z.y = -z.y;
    return Population(std::move(flipped));
  }
  GenerativePopulation g = as_generative();
  auto inner = g.sampler;
  g.sampler = [inner](Rng& rng) {
    Example z = inner(rng);
    z.y = -z.y;
    return z;
  };
  return Population(std::move(g));
}

double zero_one_loss(const ParameterVector& params, const Population& pop, std::uint64_t mc_seed) {
  if (pop.is_exact()) {
    const auto& p = pop.as_exact();
    // uniform weights: count then divide once, so Z is exactly k / n
    if (std::all_of(p.weights.begin(), p.weights.end(), [&](double w) { return w == p.weights.front(); })) {
      return zero_one_loss(params, std::span<const Example>(p.examples));
    }
    double total = 0.0;
    for (std::size_t i = 0; i < p.examples.size(); ++i) {
      const auto& z = p.examples[i];
      total += p.weights[i] * heaviside(-z.y * score(params, z.x));
    }
    return total;
  }
  const auto& g = pop.as_generative();
  const auto sums = detail::run_shards<double>(g.monte_carlo_count, mc_seed, [&](Rng& rng, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Example z = g.sampler(rng);
      s += heaviside(-z.y * score(params, z.x));
    }
    return s;
  });
  double total = 0.0;
  for (double s : sums) total += s;
  return total / static_cast<double>(g.monte_carlo_count);
}

double zero_one_loss(const ParameterVector& params, std::span<const Example> examples) {
  if (examples.empty()) throw std::invalid_argument("zero_one_loss: empty example list");
  double mistakes = 0.0;  // a sum of halves and ones, exact in double
  for (const auto& z : examples) mistakes += heaviside(-z.y * score(params, z.x));
  return mistakes / static_cast<double>(examples.size());
}

}  // namespace uslab
