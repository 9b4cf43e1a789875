#include "uslab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace uslab {

double lambda_lower_bound(double epsilon, double n, double m_ell, double psi_prime_at_zero,
                          double q_total_mass, double r) {
  if (!(epsilon > 0.0) || !(n > 0.0) || !(m_ell > 0.0) || !(q_total_mass > 0.0) || !(r > 0.0)) {
    throw std::invalid_argument("lambda_lower_bound: inputs must be positive");
  }
  if (!(psi_prime_at_zero < 0.0)) throw std::invalid_argument("lambda_lower_bound: psi'(0) must be negative");
  const double c = epsilon * (-psi_prime_at_zero) * q_total_mass * r;
  const double first = std::sqrt(4.0 * m_ell * m_ell * m_ell * n / c);
  const double second = std::cbrt(m_ell * m_ell * m_ell * m_ell * n * n / c);
  return std::max(first, second);
}

std::size_t seed_size_for_budget(std::size_t n) {
  // Smallest s with s^3 >= n^2, corrected in integers after the float guess.
  const auto target = static_cast<unsigned long long>(n) * n;
  auto cube = [](unsigned long long v) { return v * v * v; };
  auto s = static_cast<unsigned long long>(std::ceil(std::cbrt(static_cast<double>(target))));
  while (s > 0 && cube(s - 1) >= target) --s;
  while (cube(s) < target) ++s;
  return static_cast<std::size_t>(s);
}

}  // namespace uslab
