#pragma once

#include <string_view>

#include "uslab/model.hpp"
#include "uslab/rng.hpp"

namespace uslab {

enum class AcceptanceKind { box, triangle, cosine_bump };

std::string_view to_string(AcceptanceKind kind);

/// Even, compactly supported acceptance function q with values in [0, 1].
class AcceptanceSpec {
 public:
  explicit AcceptanceSpec(AcceptanceKind kind) : kind_(kind) {}
  static AcceptanceSpec from_name(std::string_view name);

  AcceptanceKind kind() const { return kind_; }
  /// M_q: q(s) = 0 whenever |s| >= M_q (box: q is 1 at |s| = 1, 0 beyond).
  double support_bound() const { return 1.0; }
  /// Q_inf = integral of q over the real line.
  double total_mass() const { return kind_ == AcceptanceKind::box ? 2.0 : 1.0; }
  /// Continuous q; the box is excluded from the identity checks.
  bool theory_compliant() const { return kind_ != AcceptanceKind::box; }
  /// Infinitely differentiable q (cosine bump only, in the sense used by the
  /// gradient-limit check).
  bool smooth() const { return kind_ == AcceptanceKind::cosine_bump; }

  friend bool operator==(const AcceptanceSpec&, const AcceptanceSpec&) = default;

 private:
  AcceptanceKind kind_;
};

/// q(s).
double acceptance_probability(const AcceptanceSpec& spec, double s);

/// Q(s) = (integral of q up to s) / Q_inf, in closed form.
double normalized_antiderivative(const AcceptanceSpec& spec, double s);

/// Bernoulli(q(S(x, theta) / r)); consumes exactly one uniform variate.
bool accept_draw(const AcceptanceSpec& spec, const ParameterVector& params, const Vector& x, double r,
                 Rng& rng);

}  // namespace uslab
