#include "uslab/acceptance.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace uslab {

std::string_view to_string(AcceptanceKind kind) {
  switch (kind) {
    case AcceptanceKind::box:
      return "box";
    case AcceptanceKind::triangle:
      return "triangle";
    case AcceptanceKind::cosine_bump:
      return "cosine-bump";
  }
  return "unknown";
}

AcceptanceSpec AcceptanceSpec::from_name(std::string_view name) {
  if (name == "box") return AcceptanceSpec(AcceptanceKind::box);
  if (name == "triangle") return AcceptanceSpec(AcceptanceKind::triangle);
  if (name == "cosine-bump") return AcceptanceSpec(AcceptanceKind::cosine_bump);
  throw std::invalid_argument("unknown acceptance function '" + std::string(name) + "'");
}

double acceptance_probability(const AcceptanceSpec& spec, double s) {
  const double a = std::abs(s);
  switch (spec.kind()) {
    case AcceptanceKind::box:
      return a <= 1.0 ? 1.0 : 0.0;
    case AcceptanceKind::triangle:
      return a < 1.0 ? 1.0 - a : 0.0;
    case AcceptanceKind::cosine_bump:
      return a < 1.0 ? 0.5 * (1.0 + std::cos(std::numbers::pi * a)) : 0.0;
  }
  return 0.0;
}

double normalized_antiderivative(const AcceptanceSpec& spec, double s) {
  if (s <= -1.0) return 0.0;
  if (s >= 1.0) return 1.0;
  switch (spec.kind()) {
    case AcceptanceKind::box:
      return 0.5 * (s + 1.0);
    case AcceptanceKind::triangle:
      if (s <= 0.0) return 0.5 * (1.0 + s) * (1.0 + s);
      return 1.0 - 0.5 * (1.0 - s) * (1.0 - s);
    case AcceptanceKind::cosine_bump:
      return 0.5 * (s + 1.0) + std::sin(std::numbers::pi * s) / (2.0 * std::numbers::pi);
  }
  return 0.0;
}

bool accept_draw(const AcceptanceSpec& spec, const ParameterVector& params, const Vector& x, double r,
                 Rng& rng) {
  if (!(r > 0.0)) throw std::invalid_argument("acceptance scale r must be positive");
  const double q = acceptance_probability(spec, score(params, x) / r);
  return rng.uniform() < q;
}

}  // namespace uslab
