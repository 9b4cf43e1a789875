#pragma once

#include <cstddef>

namespace uslab {

/// Smallest lambda for which the expected uncertainty-sampling step is a
/// descent direction of Z_r whenever ||grad Z_r|| >= epsilon:
///   max( sqrt(4 M^3 n / (eps c)), cbrt(M^4 n^2 / (eps c)) ),  c = -psi'(0) Q_inf r.
double lambda_lower_bound(double epsilon, double n, double m_ell, double psi_prime_at_zero,
                          double q_total_mass, double r);

/// ceil(n^(2/3)), the seed-set size matching lambda = Theta(n^(2/3)).
std::size_t seed_size_for_budget(std::size_t n);

}  // namespace uslab
