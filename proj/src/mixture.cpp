#include "uslab/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "uslab/parallel.hpp"

namespace uslab {

std::size_t GaussianMixtureSpec::dim() const {
  return components.empty() ? 0 : static_cast<std::size_t>(components.front().mean.size());
}

void GaussianMixtureSpec::validate() const {
  if (components.empty()) throw std::invalid_argument("mixture needs at least one component");
  double total = 0.0;
  bool has_pos = false;
  bool has_neg = false;
  for (const auto& c : components) {
    if (static_cast<std::size_t>(c.mean.size()) != dim() || c.mean.size() == 0) {
      throw std::invalid_argument("mixture components must share a positive dimension");
    }
    if (!(c.sigma > 0.0)) throw std::invalid_argument("mixture sigma must be positive");
    if (!(c.weight > 0.0)) throw std::invalid_argument("mixture weights must be positive");
    if (c.label != 1 && c.label != -1) throw std::invalid_argument("mixture labels must be -1 or +1");
    has_pos |= c.label == 1;
    has_neg |= c.label == -1;
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
  if (!has_pos || !has_neg) throw std::invalid_argument("mixture needs a component for each label");
}

GaussianMixtureSpec GaussianMixtureSpec::default_four_cluster() {
  auto point = [](double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
  };
  return {{{point(-6.0, 0.0), 1.0, 0.15, 1},
           {point(6.0, 0.0), 1.0, 0.35, 1},
           {point(0.0, -6.0), 1.0, 0.10, -1},
           {point(0.0, 6.0), 1.0, 0.40, -1}}};
}

namespace {

Example draw_one(const GaussianMixtureSpec& spec, Rng& rng) {
  const double u = rng.uniform();
  std::size_t pick = spec.components.size() - 1;
  double cumulative = 0.0;
  for (std::size_t c = 0; c < spec.components.size(); ++c) {
    cumulative += spec.components[c].weight;
    if (u < cumulative) {
      pick = c;
      break;
    }
  }
  const auto& comp = spec.components[pick];
  Vector x(comp.mean.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = comp.mean[j] + comp.sigma * rng.normal();
  return {std::move(x), comp.label};
}

double component_density(const GaussianComponent& c, const Vector& x) {
  const double d = static_cast<double>(x.size());
  const double var = c.sigma * c.sigma;
  return std::exp(-0.5 * (x - c.mean).squaredNorm() / var) / std::pow(2.0 * std::numbers::pi * var, 0.5 * d);
}

}  // namespace

std::vector<Example> sample_mixture(const GaussianMixtureSpec& spec, std::size_t count, Rng& rng) {
  spec.validate();
  if (count < 1) throw std::invalid_argument("sample count must be at least 1");
  std::vector<Example> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(draw_one(spec, rng));
  return out;
}

double mixture_density(const GaussianMixtureSpec& spec, const Vector& x, int y) {
  double total = 0.0;
  for (const auto& c : spec.components)
    if (c.label == y) total += c.weight * component_density(c, x);
  return total;
}

double mixture_density(const GaussianMixtureSpec& spec, const Vector& x) {
  return mixture_density(spec, x, 1) + mixture_density(spec, x, -1);
}

Population mixture_snapshot(const GaussianMixtureSpec& spec, std::size_t count, Rng& rng) {
  return Population::uniform(sample_mixture(spec, count, rng));
}

Population mixture_population(const GaussianMixtureSpec& spec, std::size_t monte_carlo_count) {
  spec.validate();
  return Population::generative([spec](Rng& rng) { return draw_one(spec, rng); }, monte_carlo_count, true);
}

namespace {

/// Per-label projections sorted ascending with inclusive prefix sums of
/// integer weight ticks.
struct SortedSide {
  std::vector<double> proj;
  std::vector<std::int64_t> prefix;  // prefix[i] = ticks of proj[0..i)

  std::int64_t ticks_below(double c) const {
    return prefix[std::lower_bound(proj.begin(), proj.end(), c) - proj.begin()];
  }
  std::int64_t ticks_at_or_below(double c) const {
    return prefix[std::upper_bound(proj.begin(), proj.end(), c) - proj.begin()];
  }
};

SortedSide make_side(std::vector<std::pair<double, std::int64_t>> items) {
  std::sort(items.begin(), items.end());
  SortedSide s;
  s.proj.reserve(items.size());
  s.prefix.assign(items.size() + 1, 0);
  for (std::size_t i = 0; i < items.size(); ++i) {
    s.proj.push_back(items[i].first);
    s.prefix[i + 1] = s.prefix[i] + items[i].second;
  }
  return s;
}

ParameterVector line_params(double angle, double offset) {
  Vector theta(3);
  theta << std::cos(angle), std::sin(angle), offset;
  return {std::move(theta), FeatureMap(FeatureKind::identity_with_bias, 2)};
}

}  // namespace

std::vector<Basin> landscape_scan(const Population& pop, const ScanGrid& grid) {
  if (grid.angle_count < 3 || grid.offset_count < 3 || !(grid.offset_max > grid.offset_min)) {
    throw std::invalid_argument("landscape scan grid is degenerate");
  }
  const auto& p = pop.as_exact();
  for (const auto& z : p.examples) {
    if (z.x.size() != 2) throw std::invalid_argument("landscape scan needs 2-D inputs");
  }
  const std::size_t na = grid.angle_count;
  const std::size_t no = grid.offset_count;
  const double angle_step = 2.0 * std::numbers::pi / static_cast<double>(na);
  const double offset_step = (grid.offset_max - grid.offset_min) / static_cast<double>(no - 1);
  auto angle_at = [&](std::size_t i) { return angle_step * static_cast<double>(i); };
  auto offset_at = [&](std::size_t j) { return grid.offset_min + offset_step * static_cast<double>(j); };

  // Integer weights make plateau equality exact; a tie (score 0) costs one
  // tick and a misclassification two, matching H(0) = 1/2.
  std::vector<std::int64_t> ticks(p.weights.size());
  for (std::size_t k = 0; k < ticks.size(); ++k) ticks[k] = std::llround(p.weights[k] * 0x1.0p52);

  // The projection is accumulated in the same order as FeatureMap::dot, and
  // p + b < 0 iff p < -b in IEEE arithmetic, so the grid classifies every
  // point exactly as zero_one_loss would.
  std::vector<std::int64_t> values(na * no);
  parallel_for(na, [&](std::size_t i) {
    const ParameterVector line = line_params(angle_at(i), 0.0);
    std::vector<std::pair<double, std::int64_t>> pos;
    std::vector<std::pair<double, std::int64_t>> neg;
    for (std::size_t k = 0; k < p.examples.size(); ++k) {
      const auto& z = p.examples[k];
      double proj = 0.0;
      proj += line.theta[0] * z.x[0];
      proj += line.theta[1] * z.x[1];
      (z.y > 0 ? pos : neg).emplace_back(proj, ticks[k]);
    }
    const SortedSide sp = make_side(std::move(pos));
    const SortedSide sn = make_side(std::move(neg));
    const std::int64_t neg_total = sn.prefix.back();
    for (std::size_t j = 0; j < no; ++j) {
      const double c = -offset_at(j);
      const std::int64_t pos_lt = sp.ticks_below(c);
      const std::int64_t pos_eq = sp.ticks_at_or_below(c) - pos_lt;
      const std::int64_t neg_le = sn.ticks_at_or_below(c);
      const std::int64_t neg_eq = neg_le - sn.ticks_below(c);
      values[i * no + j] = 2 * pos_lt + pos_eq + 2 * (neg_total - neg_le) + neg_eq;
    }
  });

  auto at = [&](std::size_t i, std::size_t j) { return values[i * no + j]; };
  std::vector<int> label(na * no, -1);
  std::vector<Basin> basins;
  std::vector<std::pair<std::size_t, std::size_t>> plateau;
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  int next_label = 0;
  for (std::size_t i0 = 0; i0 < na; ++i0) {
    for (std::size_t j0 = 0; j0 < no; ++j0) {
      if (label[i0 * no + j0] >= 0) continue;
      const std::int64_t v = at(i0, j0);
      const int id = next_label++;
      plateau.clear();
      stack.assign(1, {i0, j0});
      label[i0 * no + j0] = id;
      bool is_min = true;
      while (!stack.empty()) {
        const auto [i, j] = stack.back();
        stack.pop_back();
        plateau.emplace_back(i, j);
        if (j == 0 || j + 1 == no) is_min = false;
        for (int di = -1; di <= 1; ++di) {
          for (int dj = -1; dj <= 1; ++dj) {
            if (di == 0 && dj == 0) continue;
            const long jj = static_cast<long>(j) + dj;
            if (jj < 0 || jj >= static_cast<long>(no)) continue;
            const std::size_t ii = (i + na + static_cast<std::size_t>(di + 1) - 1) % na;
            const std::size_t nb = ii * no + static_cast<std::size_t>(jj);
            const std::int64_t w = values[nb];
            if (w == v) {
              if (label[nb] < 0) {
                label[nb] = id;
                stack.emplace_back(ii, static_cast<std::size_t>(jj));
              }
            } else if (w < v) {
              is_min = false;
            }
          }
        }
      }
      if (!is_min) continue;

      std::sort(plateau.begin(), plateau.end());
      const auto [ri, rj] = plateau[plateau.size() / 2];
      double angle = angle_at(ri);
      double offset = offset_at(rj);
      const double grid_z = zero_one_loss(line_params(angle, offset), pop);
      double best = grid_z;
      double da = angle_step;
      double db = offset_step;
      const double min_da = angle_step / 64.0;
      while (da >= min_da) {
        bool moved = false;
        const double trials[4][2] = {{da, 0.0}, {-da, 0.0}, {0.0, db}, {0.0, -db}};
        for (const auto& t : trials) {
          const double z = zero_one_loss(line_params(angle + t[0], offset + t[1]), pop);
          if (z < best) {
            best = z;
            angle += t[0];
            offset += t[1];
            moved = true;
            break;
          }
        }
        if (!moved) {
          da *= 0.5;
          db *= 0.5;
        }
      }
      basins.push_back({line_params(angle, offset), angle, offset, grid_z, best, plateau.size()});
    }
  }
  std::stable_sort(basins.begin(), basins.end(), [](const Basin& a, const Basin& b) { return a.z < b.z; });
  return basins;
}

}  // namespace uslab
