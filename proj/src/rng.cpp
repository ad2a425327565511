#include "ustat/rng.hpp"

#include <cmath>

#include "ustat/error.hpp"

namespace ustat::rng {

double Engine::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

long Engine::poisson(double lambda) {
  if (!(lambda > 0.0)) fail(Errc::bad_lambda, "poisson: lambda must be positive");
  if (lambda <= 30.0) {
    // Inversion by sequential search.
    double p = std::exp(-lambda);
    double cdf = p;
    double u = uniform01();
    long k = 0;
    while (u > cdf) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cdf += p;
      if (p < 1e-300 && k > static_cast<long>(lambda)) break;  // exhausted tail mass
    }
    return k;
  }
  // PTRS (Hormann 1993).
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_lambda = std::log(lambda);
  while (true) {
    double u = uniform01() - 0.5;
    double v = uniform01();
    double us = 0.5 - std::abs(u);
    long k = static_cast<long>(std::floor((2.0 * a / us + b) * u + lambda + 0.43));
    if (us >= 0.07 && v <= v_r) return k;
    if (k < 0 || (us < 0.013 && v > us)) continue;
    double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    double rhs = -lambda + static_cast<double>(k) * log_lambda - std::lgamma(static_cast<double>(k) + 1.0);
    if (lhs <= rhs) return k;
  }
}

}  // namespace ustat::rng
