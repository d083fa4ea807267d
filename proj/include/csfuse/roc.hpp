#pragma once

// ROC sweeps over pooled-score quantiles and simulation-based thresholds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "csfuse/error.hpp"

namespace csfuse {

struct RocPoint {
  double threshold = 0.0;
  double pf = 0.0;
  double pd = 0.0;
};

struct RocCurve {
  std::string detector;
  std::string scenario;
  long n = 0;
  long m = 0;
  double c_r = 1.0;
  long t = 1;
  long trials = 0;
  std::uint64_t seed = 0;
  std::vector<RocPoint> points;  // ascending threshold
  double auc = 0.0;
};

namespace detail {

// Fraction of sorted scores strictly above tau.
inline double fraction_above(const std::vector<double>& sorted, double tau) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), tau);
  return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

}  // namespace detail

/// Trapezoid area under (pf, pd) points, closed with (0,0) and (1,1).
inline double roc_auc(const std::vector<RocPoint>& points) {
  std::vector<std::pair<double, double>> xy;
  xy.reserve(points.size() + 2);
  xy.emplace_back(0.0, 0.0);
  for (const auto& p : points) xy.emplace_back(p.pf, p.pd);
  xy.emplace_back(1.0, 1.0);
  std::sort(xy.begin(), xy.end());
  double area = 0.0;
  for (std::size_t k = 1; k < xy.size(); ++k)
    area += 0.5 * (xy[k].first - xy[k - 1].first) * (xy[k].second + xy[k - 1].second);
  return std::clamp(area, 0.0, 1.0);
}

/// Sweeps `levels` thresholds at quantiles of the pooled scores. A score
/// equal to the threshold decides H0.
inline std::vector<RocPoint> roc_points(std::vector<double> h0, std::vector<double> h1, int levels = 512) {
  if (h0.empty() || h1.empty()) throw ConfigurationError("roc_points: need scores under both hypotheses");
  if (levels < 2) throw ConfigurationError("roc_points: need at least 2 threshold levels");
  for (double v : h0)
    if (std::isnan(v)) throw NumericalError("roc_points: NaN score under H0");
  for (double v : h1)
    if (std::isnan(v)) throw NumericalError("roc_points: NaN score under H1");
  std::vector<double> pooled(h0);
  pooled.insert(pooled.end(), h1.begin(), h1.end());
  std::sort(pooled.begin(), pooled.end());
  std::sort(h0.begin(), h0.end());
  std::sort(h1.begin(), h1.end());
  std::vector<RocPoint> pts;
  pts.reserve(static_cast<std::size_t>(levels));
  const std::size_t last = pooled.size() - 1;
  for (int k = 0; k < levels; ++k) {
    const std::size_t pos = static_cast<std::size_t>(
        std::floor(static_cast<double>(k) * static_cast<double>(last) / static_cast<double>(levels - 1) + 0.5));
    const double tau = pooled[std::min(pos, last)];
    pts.push_back({tau, detail::fraction_above(h0, tau), detail::fraction_above(h1, tau)});
  }
  // Sorted pooled input gives non-decreasing thresholds already.
  return pts;
}

inline RocCurve make_roc(const std::vector<double>& h0, const std::vector<double>& h1, int levels = 512) {
  RocCurve c;
  c.points = roc_points(h0, h1, levels);
  c.auc = roc_auc(c.points);
  c.trials = static_cast<long>(h0.size());
  return c;
}

struct CalibratedThreshold {
  double threshold = 0.0;
  double achieved_pf = 0.0;  // on the calibration scores
  double ci_low = 0.0;       // Wilson 95% interval of achieved_pf
  double ci_high = 0.0;
  long trials = 0;
};

/// Empirical (1 - alpha0) quantile of H0 scores: the order statistic s_(k),
/// k = floor((1 - alpha0) T), so that at most alpha0 T scores exceed it.
inline CalibratedThreshold calibrate_from_scores(std::vector<double> h0, double alpha0) {
  if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw CalibrationError("calibrate: alpha0 must be in (0, 1]");
  const double t = static_cast<double>(h0.size());
  if (t * alpha0 < 20.0)
    throw CalibrationError("calibrate: trials * alpha0 = " + std::to_string(t * alpha0) +
                           " < 20; quantile unreliable, increase trials");
  std::sort(h0.begin(), h0.end());
  const std::size_t k = static_cast<std::size_t>(std::floor((1.0 - alpha0) * t + 1e-9));
  CalibratedThreshold c;
  c.threshold = k == 0 ? std::nextafter(h0.front(), -std::numeric_limits<double>::infinity()) : h0[k - 1];
  c.achieved_pf = detail::fraction_above(h0, c.threshold);
  c.trials = static_cast<long>(h0.size());
  const double z = 1.959963984540054;
  const double p = c.achieved_pf, z2 = z * z;
  const double centre = (p + z2 / (2.0 * t)) / (1.0 + z2 / t);
  const double half = z / (1.0 + z2 / t) * std::sqrt(p * (1.0 - p) / t + z2 / (4.0 * t * t));
  c.ci_low = std::max(0.0, centre - half);
  c.ci_high = std::min(1.0, centre + half);
  return c;
}

}  // namespace csfuse
