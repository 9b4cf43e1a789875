#pragma once

// Test-side reference computations. These deliberately avoid the library's
// own helpers: plain loops, textbook formulas, finite differences.

#include <cmath>
#include <functional>
#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "uslab/model.hpp"
#include "uslab/rng.hpp"

namespace oracle {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

/// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  double flo = f(lo);
  for (int k = 0; k < iters; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Central-difference gradient of f at x.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                                   double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

/// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Hand-written acceptance functions and their antiderivatives.
inline double triangle_q(double s) { return std::max(0.0, 1.0 - std::abs(s)); }
inline double cosine_q(double s) { return std::abs(s) <= 1.0 ? 0.5 * (1.0 + std::cos(M_PI * s)) : 0.0; }
inline double box_q(double s) { return std::abs(s) <= 1.0 ? 1.0 : 0.0; }
inline double triangle_Q(double s) {
  if (s <= -1.0) return 0.0;
  if (s <= 0.0) return 0.5 * (1.0 + s) * (1.0 + s);
  if (s < 1.0) return 1.0 - 0.5 * (1.0 - s) * (1.0 - s);
  return 1.0;
}

inline double logistic_psi(double s) { return std::log1p(std::exp(-s)); }

/// Random example with features uniform in the unit ball of dimension k.
inline uslab::Example ball_example(uslab::Rng& rng, int k) {
  Eigen::VectorXd x(k);
  for (;;) {
    for (int i = 0; i < k; ++i) x[i] = 2.0 * rng.uniform() - 1.0;
    if (x.squaredNorm() <= 1.0) break;
  }
  return uslab::Example(x, rng.uniform() < 0.5 ? -1 : 1);
}

inline std::vector<uslab::Example> ball_examples(uslab::Rng& rng, int k, std::size_t count) {
  std::vector<uslab::Example> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(ball_example(rng, k));
  return out;
}

inline Eigen::VectorXd random_vector(uslab::Rng& rng, int d, double scale) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

}  // namespace oracle
