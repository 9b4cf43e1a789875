#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "uslab/rng.hpp"

namespace uslab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A labeled point z = (x, y) with y in {-1, +1}.
struct Example {
  Vector x;
  int y;

  Example(Vector features, int label);
};

enum class FeatureKind { identity, identity_with_bias, quadratic_with_bias };

std::string_view to_string(FeatureKind kind);
FeatureKind feature_kind_from_string(std::string_view name);

/// Deterministic feature map phi : R^k -> R^d.
///
/// identity_with_bias appends a trailing 1. quadratic_with_bias is laid out
/// as [1, x_0..x_{k-1}, x_i*x_j for i <= j in row-major order].
class FeatureMap {
 public:
  FeatureMap(FeatureKind kind, std::size_t input_dim);

  FeatureKind kind() const { return kind_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const;

  Vector apply(const Vector& x) const;
  void apply_into(const Vector& x, Eigen::Ref<Vector> out) const;

  /// theta . phi(x) without materializing phi(x).
  double dot(const Vector& theta, const Vector& x) const;

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  void check_input(const Vector& x) const;

  FeatureKind kind_;
  std::size_t input_dim_;
};

struct ParameterVector {
  Vector theta;
  FeatureMap features;

  ParameterVector(Vector coords, FeatureMap map);
  static ParameterVector zeros(const FeatureMap& map);
};

/// S(x, theta) = theta . phi(x).
double score(const ParameterVector& params, const Vector& x);

/// Heaviside step with H(0) = 1/2.
double heaviside(double s);

/// Prediction +1 iff the score is strictly positive.
int predict(const ParameterVector& params, const Vector& x);

/// A weighted list of examples; all expectations are finite sums.
struct ExactPopulation {
  std::vector<Example> examples;
  std::vector<double> weights;
};

/// A samplable distribution with a Monte Carlo budget.
struct GenerativePopulation {
  std::function<Example(Rng&)> sampler;
  std::size_t monte_carlo_count;
  // false for point-mass or otherwise density-free generators.
  bool has_smooth_density = true;
};

class Population {
 public:
  static Population exact(std::vector<Example> examples, std::vector<double> weights);
  static Population uniform(std::vector<Example> examples);
  static Population generative(std::function<Example(Rng&)> sampler, std::size_t monte_carlo_count,
                               bool has_smooth_density = true);

  bool is_exact() const { return std::holds_alternative<ExactPopulation>(data_); }
  const ExactPopulation& as_exact() const;
  const GenerativePopulation& as_generative() const;

  /// Same population with every label negated.
  Population with_flipped_labels() const;

 private:
  explicit Population(std::variant<ExactPopulation, GenerativePopulation> data)
      : data_(std::move(data)) {}

  std::variant<ExactPopulation, GenerativePopulation> data_;
};

/// Misclassification rate Z(theta) = E[H(-y S(x, theta))].
/// Exact populations are summed in ascending index order; generative ones
/// use monte_carlo_count draws from a stream seeded by mc_seed.
double zero_one_loss(const ParameterVector& params, const Population& pop,
                     std::uint64_t mc_seed = 0);

/// Exact-population helper over a plain example list with uniform weights.
double zero_one_loss(const ParameterVector& params, std::span<const Example> examples);

}  // namespace uslab
