#pragma once

// Uncompressed product/copula LLRs, energy detectors and sample covariance.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "csfuse/copula.hpp"
#include "csfuse/error.hpp"
#include "csfuse/gaussian_model.hpp"
#include "csfuse/scenarios.hpp"
#include "csfuse/special.hpp"

namespace csfuse {

inline constexpr double kCopulaClamp = 1e-12;

namespace detail {

// Accumulates log f1 - log f0 terms, tracking impossible observations.
struct LogRatioSum {
  double sum = 0.0;
  bool pos_inf = false;
  bool neg_inf = false;
  bool zero_h0 = false;

  void add(double l1, double l0) {
    if (l0 == -std::numeric_limits<double>::infinity()) {
      if (l1 != -std::numeric_limits<double>::infinity()) {
        pos_inf = true;
        zero_h0 = true;
      }
      return;
    }
    if (l1 == -std::numeric_limits<double>::infinity()) {
      neg_inf = true;
      return;
    }
    sum += l1 - l0;
  }

  double value() const {
    if (pos_inf) return std::numeric_limits<double>::infinity();
    if (neg_inf) return -std::numeric_limits<double>::infinity();
    return sum;
  }
};

}  // namespace detail

/// Sum over sensors and time of log f1(x)/f0(x). Provider exposes
/// sensors(), log_pdf(sensor, hypothesis, x) and cdf(sensor, hypothesis, x).
/// An observation with zero H0 density forces +inf (decide H1).
template <class Provider>
DetectorScore llr_product(const Eigen::Ref<const VectorXd>& x, const Provider& marginals) {
  const Index l = marginals.sensors();
  if (l < 1 || x.size() % l != 0) throw InvalidDimensionError("llr_product: length not a multiple of sensor count");
  const Index n = x.size() / l;
  detail::LogRatioSum acc;
  for (Index j = 0; j < l; ++j)
    for (Index t = 0; t < n; ++t) {
      const double v = x(j * n + t);
      acc.add(marginals.log_pdf(j, Hypothesis::h1, v), marginals.log_pdf(j, Hypothesis::h0, v));
    }
  DetectorScore s;
  s.value = acc.value();
  s.zero_h0_density = acc.zero_h0;
  return s;
}

/// Product-term LLR plus sum over time of log c1(u) - log c0(u), with u the
/// marginal cdfs under the copula's own hypothesis. cop0 absent means H0
/// independence (c0 = 1).
template <class Provider>
DetectorScore llr_copula(const Eigen::Ref<const VectorXd>& x, const Provider& marginals, const CopulaSpec& cop1,
                         const CopulaSpec* cop0 = nullptr) {
  DetectorScore s = llr_product(x, marginals);
  const Index l = marginals.sensors();
  const Index n = x.size() / l;
  if (cop1.family() != CopulaFamily::independence && cop1.dim() != l)
    throw InvalidDimensionError("llr_copula: copula dimension != sensor count");
  auto copula_sum = [&](const CopulaSpec& cop, Hypothesis h) {
    if (cop.family() == CopulaFamily::independence) return 0.0;
    VectorXd u(l);
    double acc = 0.0;
    for (Index t = 0; t < n; ++t) {
      for (Index j = 0; j < l; ++j) {
        double v = marginals.cdf(j, h, x(j * n + t));
        if (v < kCopulaClamp || v > 1.0 - kCopulaClamp) {
          v = std::clamp(v, kCopulaClamp, 1.0 - kCopulaClamp);
          ++s.clamped;
        }
        u(j) = v;
      }
      acc += cop.log_density(u);
    }
    return acc;
  };
  double c = copula_sum(cop1, Hypothesis::h1);
  if (cop0 != nullptr) c -= copula_sum(*cop0, Hypothesis::h0);
  if (std::isfinite(s.value)) s.value += c;
  return s;
}

/// Sum of squared entries over all frames (columns).
inline DetectorScore energy_stat(const Eigen::Ref<const MatrixXd>& frames) {
  if (frames.cols() == 0 || frames.rows() == 0) throw InvalidDimensionError("energy_stat: empty frame list");
  DetectorScore s;
  s.value = frames.squaredNorm();
  return s;
}

enum class Domain { compressed, uncompressed };

enum class EnergyVariance {
  corrected,  // Var(x^2) = 20 / lambda0^4 for Exp(lambda0)
  printed     // 20 / lambda0^2 as printed alongside the threshold formula
};

struct EnergyThreshold {
  double value = 0.0;
  double mean = 0.0;
  double variance = 0.0;
};

/// Gaussian approximation of the H0 energy of Exp(lambda0) and Beta(a0, 1)
/// data with n_or_m samples per sensor over t frames.
inline EnergyThreshold energy_threshold(Domain /*domain*/, double alpha0, double lambda0, double a0, Index n_or_m,
                                        Index t, EnergyVariance variant = EnergyVariance::corrected) {
  if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw ConfigurationError("energy_threshold: alpha0 must be in (0, 1)");
  if (!(lambda0 > 0.0) || !(a0 > 0.0)) throw ConfigurationError("energy_threshold: lambda0 and a0 must be > 0");
  const double count = static_cast<double>(n_or_m) * static_cast<double>(t);
  const double l2 = lambda0 * lambda0;
  const double exp_var = variant == EnergyVariance::corrected ? 20.0 / (l2 * l2) : 20.0 / l2;
  const double beta_var = 4.0 * a0 / ((a0 + 4.0) * (a0 + 2.0) * (a0 + 2.0));
  EnergyThreshold th;
  th.mean = count * (2.0 / l2 + a0 / (a0 + 2.0));
  th.variance = count * (exp_var + beta_var);
  th.value = th.mean + special::q_inverse(alpha0) * std::sqrt(th.variance);
  return th;
}

/// (1/T) sum_t (y_t - m)(y_t - m)^T over frame columns, with m the supplied
/// mean or the sample mean.
inline MatrixXd sample_cov(const Eigen::Ref<const MatrixXd>& frames,
                           const std::optional<VectorXd>& known_mean = std::nullopt) {
  const Index t = frames.cols();
  if (known_mean) {
    if (t < 1) throw InsufficientDataError("sample_cov: no frames");
    if (known_mean->size() != frames.rows()) throw InvalidDimensionError("sample_cov: mean length mismatch");
  } else if (t < 2) {
    throw InsufficientDataError("sample_cov: need at least 2 frames to estimate the mean");
  }
  const VectorXd m = known_mean ? *known_mean : VectorXd(frames.rowwise().mean());
  const MatrixXd centered = frames.colwise() - m;
  MatrixXd c = MatrixXd::Zero(frames.rows(), frames.rows());
  c.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0 / static_cast<double>(t));
  c.triangularView<Eigen::StrictlyUpper>() = c.transpose();
  return c;
}

}  // namespace csfuse
