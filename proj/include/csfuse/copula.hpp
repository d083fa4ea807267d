#pragma once

// Gaussian, Clayton and Gumbel copulas fitted by Kendall's tau inversion.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "csfuse/error.hpp"
#include "csfuse/linops.hpp"
#include "csfuse/special.hpp"

namespace csfuse {

enum class CopulaFamily { independence, gaussian, clayton, gumbel };

inline std::string to_string(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::independence: return "independence";
    case CopulaFamily::gaussian: return "gaussian";
    case CopulaFamily::clayton: return "clayton";
    case CopulaFamily::gumbel: return "gumbel";
  }
  return "unknown";
}

inline CopulaFamily parse_copula_family(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "independence") return CopulaFamily::independence;
  if (s == "gaussian") return CopulaFamily::gaussian;
  if (s == "clayton") return CopulaFamily::clayton;
  if (s == "gumbel") return CopulaFamily::gumbel;
  throw ConfigurationError("unknown copula family '" + s + "'");
}

inline constexpr double kCopulaThetaMax = 100.0;
inline constexpr double kCopulaRhoMax = 0.999;

class CopulaSpec {
 public:
  CopulaSpec() = default;

  static CopulaSpec independence(Index dim) {
    CopulaSpec c;
    c.family_ = CopulaFamily::independence;
    c.dim_ = dim;
    return c;
  }

  /// corr must be a valid correlation matrix (unit diagonal, positive definite).
  static CopulaSpec gaussian(const MatrixXd& corr) {
    const Index d = corr.rows();
    if (d < 2 || d > 3 || corr.cols() != d) throw ConfigurationError("gaussian copula: dimension must be 2 or 3");
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        if (i != j && !(std::abs(corr(i, j)) < 1.0))
          throw ConfigurationError("gaussian copula: |rho| must be < 1");
    Eigen::LLT<MatrixXd> llt(corr);
    if (llt.info() != Eigen::Success) throw ConfigurationError("gaussian copula: correlation matrix not positive definite");
    CopulaSpec c;
    c.family_ = CopulaFamily::gaussian;
    c.dim_ = d;
    c.corr_ = corr;
    c.precision_minus_identity_ = llt.solve(MatrixXd::Identity(d, d)) - MatrixXd::Identity(d, d);
    c.log_det_ = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    return c;
  }

  static CopulaSpec gaussian2(double rho) {
    MatrixXd r(2, 2);
    r << 1.0, rho, rho, 1.0;
    return gaussian(r);
  }

  static CopulaSpec clayton(double theta) {
    if (!(theta > 0.0)) throw ConfigurationError("clayton copula: theta must be > 0");
    CopulaSpec c;
    c.family_ = CopulaFamily::clayton;
    c.dim_ = 2;
    c.theta_ = theta;
    return c;
  }

  static CopulaSpec gumbel(double theta) {
    if (!(theta >= 1.0)) throw ConfigurationError("gumbel copula: theta must be >= 1");
    CopulaSpec c;
    c.family_ = CopulaFamily::gumbel;
    c.dim_ = 2;
    c.theta_ = theta;
    return c;
  }

  CopulaFamily family() const noexcept { return family_; }
  Index dim() const noexcept { return dim_; }
  double theta() const noexcept { return theta_; }
  const MatrixXd& corr() const noexcept { return corr_; }

  /// log c(u); u entries must lie strictly inside (0, 1).
  double log_density(const Eigen::Ref<const VectorXd>& u) const {
    if (u.size() != dim_) throw InvalidDimensionError("copula log_density: argument dimension mismatch");
    switch (family_) {
      case CopulaFamily::independence: return 0.0;
      case CopulaFamily::gaussian: {
        VectorXd z(dim_);
        for (Index i = 0; i < dim_; ++i) z(i) = special::normal_quantile(u(i));
        return -0.5 * log_det_ - 0.5 * z.dot(precision_minus_identity_ * z);
      }
      case CopulaFamily::clayton: {
        const double t = theta_;
        const double lu = std::log(u(0)), lv = std::log(u(1));
        const double s = std::exp(-t * lu) + std::exp(-t * lv) - 1.0;
        return std::log1p(t) - (1.0 + t) * (lu + lv) - (1.0 / t + 2.0) * std::log(s);
      }
      case CopulaFamily::gumbel: {
        const double t = theta_;
        const double lu = std::log(u(0)), lv = std::log(u(1));
        const double x = -lu, y = -lv;
        const double a = std::pow(x, t) + std::pow(y, t);
        const double a1t = std::pow(a, 1.0 / t);
        return -a1t + (t - 1.0) * (std::log(x) + std::log(y)) - lu - lv + (1.0 / t - 2.0) * std::log(a) +
               std::log(a1t + t - 1.0);
      }
    }
    return 0.0;
  }

 private:
  CopulaFamily family_ = CopulaFamily::independence;
  Index dim_ = 2;
  double theta_ = 0.0;
  MatrixXd corr_;
  MatrixXd precision_minus_identity_;
  double log_det_ = 0.0;
};

/// Kendall's tau-a by direct pair counting.
inline double kendall_tau(const Eigen::Ref<const VectorXd>& x, const Eigen::Ref<const VectorXd>& y) {
  const Index t = x.size();
  if (y.size() != t || t < 2) throw InvalidDimensionError("kendall_tau: need two equal-length samples of size >= 2");
  long long score = 0;
  for (Index i = 0; i < t; ++i) {
    const double xi = x(i), yi = y(i);
    for (Index j = i + 1; j < t; ++j) {
      const double p = (x(j) - xi) * (y(j) - yi);
      score += (p > 0.0) - (p < 0.0);
    }
  }
  return static_cast<double>(score) / (0.5 * static_cast<double>(t) * static_cast<double>(t - 1));
}

namespace detail {

// Nearest correlation matrix by eigenvalue clipping and rescaling.
inline MatrixXd repair_correlation(const MatrixXd& r) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(r);
  VectorXd ev = es.eigenvalues().cwiseMax(1e-6);
  MatrixXd fixed = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  const VectorXd d = fixed.diagonal().cwiseSqrt().cwiseInverse();
  fixed = d.asDiagonal() * fixed * d.asDiagonal();
  fixed.diagonal().setOnes();
  return fixed;
}

}  // namespace detail

/// Fits a copula to pseudo-observations u (T x d, entries in (0, 1)).
inline CopulaSpec fit_copula(const Eigen::Ref<const MatrixXd>& u, CopulaFamily family) {
  const Index t = u.rows(), d = u.cols();
  if (t < 10) throw FitError("fit_copula: need at least 10 samples");
  if (d < 2 || d > 3) throw FitError("fit_copula: dimension must be 2 or 3");
  if ((u.array() <= 0.0).any() || (u.array() >= 1.0).any())
    throw FitError("fit_copula: pseudo-observations must lie strictly inside (0, 1)");
  if (family == CopulaFamily::independence) return CopulaSpec::independence(d);
  if (family != CopulaFamily::gaussian && d != 2)
    throw FitError("fit_copula: " + to_string(family) + " copula is bivariate only");

  if (family == CopulaFamily::gaussian) {
    MatrixXd r = MatrixXd::Identity(d, d);
    for (Index i = 0; i < d; ++i) {
      for (Index j = i + 1; j < d; ++j) {
        const double tau = kendall_tau(u.col(i), u.col(j));
        const double rho = std::clamp(std::sin(0.5 * std::numbers::pi * tau), -kCopulaRhoMax, kCopulaRhoMax);
        r(i, j) = r(j, i) = rho;
      }
    }
    Eigen::LLT<MatrixXd> llt(r);
    if (llt.info() != Eigen::Success) r = detail::repair_correlation(r);
    return CopulaSpec::gaussian(r);
  }

  const double tau = kendall_tau(u.col(0), u.col(1));
  if (family == CopulaFamily::clayton) {
    if (!(tau > 0.0))
      throw FitError("fit_copula: clayton copula requires positive Kendall tau (got " + std::to_string(tau) + ")");
    const double theta = tau >= 1.0 ? kCopulaThetaMax : 2.0 * tau / (1.0 - tau);
    return CopulaSpec::clayton(std::min(theta, kCopulaThetaMax));
  }
  if (!(tau >= 0.0))
    throw FitError("fit_copula: gumbel copula requires non-negative Kendall tau (got " + std::to_string(tau) + ")");
  const double theta = tau >= 1.0 ? kCopulaThetaMax : 1.0 / (1.0 - tau);
  return CopulaSpec::gumbel(std::clamp(theta, 1.0, kCopulaThetaMax));
}

}  // namespace csfuse
