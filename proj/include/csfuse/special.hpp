#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace csfuse::special {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Gaussian tail probability Q(z) = 1 - Phi(z).
inline double q_function(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

inline double normal_log_pdf(double z) {
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// log Phi(z), accurate deep into the lower tail.
inline double normal_log_cdf(double z) {
  if (z > -30.0) return std::log(normal_cdf(z));
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

/// Phi^{-1}(p) for p in (0, 1).
inline double normal_quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

/// Q^{-1}(alpha): the z with Q(z) = alpha.
inline double q_inverse(double alpha) { return -normal_quantile(alpha); }

}  // namespace csfuse::special
