#pragma once

#include <cstddef>
#include <vector>

#include "uslab/model.hpp"
#include "uslab/rng.hpp"

namespace uslab {

struct GaussianComponent {
  Vector mean;
  double sigma;   ///< isotropic standard deviation
  double weight;  ///< mixture proportion
  int label;      ///< +1 or -1
};

/// Labeled mixture of isotropic Gaussians.
struct GaussianMixtureSpec {
  std::vector<GaussianComponent> components;

  std::size_t dim() const;
  void validate() const;

  /// Two +1 clusters on the horizontal axis and two -1 clusters on the
  /// vertical axis, all sigma 1:
  ///   +1: (-6, 0) w 0.15, (+6, 0) w 0.35
  ///   -1: (0, -6) w 0.10, (0, +6) w 0.40
  /// Every linear separator misclassifies at least one whole cluster, so the
  /// zero-one loss has several basins of different depth.
  static GaussianMixtureSpec default_four_cluster();
};

std::vector<Example> sample_mixture(const GaussianMixtureSpec& spec, std::size_t count, Rng& rng);

/// Joint density p(x, y).
double mixture_density(const GaussianMixtureSpec& spec, const Vector& x, int y);

/// Marginal density p(x).
double mixture_density(const GaussianMixtureSpec& spec, const Vector& x);

/// Uniformly weighted exact population of `count` draws.
Population mixture_snapshot(const GaussianMixtureSpec& spec, std::size_t count, Rng& rng);

/// Generative population backed by the mixture sampler.
Population mixture_population(const GaussianMixtureSpec& spec, std::size_t monte_carlo_count);

/// (angle, offset) grid over 2-D linear classifiers theta = (cos a, sin a, b)
/// with identity-with-bias features.
struct ScanGrid {
  std::size_t angle_count = 720;
  std::size_t offset_count = 401;
  double offset_min = -10.0;
  double offset_max = 10.0;
};

struct Basin {
  ParameterVector params;  ///< refined parameters
  double angle;
  double offset;
  double grid_z;  ///< Z at the grid representative
  double z;       ///< Z after refinement (never above grid_z)
  std::size_t plateau_cells;
};

/// Brute-force scan of the population zero-one loss over the grid.
///
/// A basin is a plateau of equal grid values (8-connected, angles wrap) whose
/// outside neighbors are all strictly larger; single-cell plateaus are the
/// strict local minima. Plateaus touching the offset boundary are dropped
/// because their outside neighbors are unknown. Each basin is refined by
/// coordinate descent with shrinking steps, accepting strict decreases only.
/// All reported Z values come from zero_one_loss. Basins are sorted by z.
std::vector<Basin> landscape_scan(const Population& pop, const ScanGrid& grid = {});

}  // namespace uslab
