#pragma once

#include <cstddef>
#include <cstdint>

#include "uslab/acceptance.hpp"
#include "uslab/errors.hpp"
#include "uslab/model.hpp"
#include "uslab/surrogate.hpp"

namespace uslab {

enum class OracleMode { exact, monte_carlo };

/// A population quantity, scalar (length-1 value) or coordinate list.
struct OracleResult {
  Vector value;
  OracleMode mode = OracleMode::exact;
  std::size_t sample_count = 0;  ///< monte_carlo only
  Vector standard_error;         ///< monte_carlo only; same length as value

  double scalar() const { return value[0]; }
};

/// Z_r(theta) = E[Q(-y S(x, theta) / r)].
OracleResult smoothed_zero_one(const Population& pop, const AcceptanceSpec& q,
                               const ParameterVector& params, double r, std::uint64_t mc_seed = 0);

/// grad Z_r(theta) = -(1 / (Q_inf r)) E[q(S / r) y phi(x)]. Refuses the box.
OracleResult grad_smoothed_zero_one(const Population& pop, const AcceptanceSpec& q,
                                    const ParameterVector& params, double r, std::uint64_t mc_seed = 0);

/// a_r(theta) = E[q(S(x, theta) / r)], the probability of accepting a stream point.
OracleResult acceptance_mass(const Population& pop, const AcceptanceSpec& q,
                             const ParameterVector& params, double r, std::uint64_t mc_seed = 0);

/// eta = -psi'(0) Q_inf r / a_r. Throws ZeroAcceptanceError when a_r = 0.
double eta_scale(const SurrogateSpec& psi, const AcceptanceSpec& q, double r, double acceptance);

/// E[grad l(z, theta)] for z drawn by uncertainty sampling at theta:
/// E[q(S/r) grad l] / E[q(S/r)]. Generative mode uses one sample stream for
/// numerator and denominator (self-normalized ratio estimator).
OracleResult expected_accepted_gradient(const Population& pop, const SurrogateSpec& psi,
                                        const AcceptanceSpec& q, const ParameterVector& params,
                                        double r, std::uint64_t mc_seed = 0);

}  // namespace uslab
