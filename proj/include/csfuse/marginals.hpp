#pragma once

// One-dimensional marginal families used by the synthetic scenarios.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "csfuse/error.hpp"
#include "csfuse/rng.hpp"
#include "csfuse/special.hpp"

namespace csfuse {

namespace detail {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Integral {
  double value;
  double error;
};

// Integral of f over [0, inf).
template <class F>
Integral integrate_half_line(F f, const char* what) {
  thread_local boost::math::quadrature::exp_sinh<double> integrator;
  double error = 0.0, l1 = 0.0;
  const double v = integrator.integrate(f, 1e-11, &error, &l1);
  if (!std::isfinite(v) || error > 1e-7 * std::max(std::abs(v), 1e-300) + 1e-300) {
    throw NumericalError(std::string(what) + ": quadrature did not converge (value " +
                         std::to_string(v) + ", error estimate " + std::to_string(error) + ")");
  }
  return {v, error};
}

template <class F>
Integral integrate_interval(F f, double a, double b, const char* what) {
  double error = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-11, &error);
  if (!std::isfinite(v) || error > 1e-7 * std::max(std::abs(v), 1e-300) + 1e-300) {
    throw NumericalError(std::string(what) + ": quadrature did not converge on [" +
                         std::to_string(a) + ", " + std::to_string(b) + "] (error estimate " +
                         std::to_string(error) + ")");
  }
  return {v, error};
}

}  // namespace detail

/// Parametric univariate distribution. Gamma and scaled chi-squared share
/// one representation (shape k, scale s).
class Marginal {
 public:
  enum class Family {
    gaussian,        // p1 = mean, p2 = variance
    exponential,     // p1 = rate
    beta_a1,         // p1 = a, b fixed to 1
    gamma,           // p1 = shape, p2 = scale
    exp_plus_noise,  // Exp(p1) + N(0, p2)
    chi3_plus_noise  // p1 * chi2_3 + N(0, p2)
  };

  static Marginal gaussian(double mean, double variance) {
    if (!(variance > 0.0)) throw ConfigurationError("gaussian marginal: variance must be > 0");
    return Marginal(Family::gaussian, mean, variance);
  }
  static Marginal exponential(double rate) {
    if (!(rate > 0.0)) throw ConfigurationError("exponential marginal: rate must be > 0");
    return Marginal(Family::exponential, rate, 0.0);
  }
  static Marginal beta_a1(double a) {
    if (!(a > 0.0)) throw ConfigurationError("beta marginal: a must be > 0");
    return Marginal(Family::beta_a1, a, 0.0);
  }
  static Marginal gamma(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw ConfigurationError("gamma marginal: shape and scale must be > 0");
    return Marginal(Family::gamma, shape, scale);
  }
  /// scale * chi2_nu.
  static Marginal chi2_scaled(double nu, double scale) { return gamma(0.5 * nu, 2.0 * scale); }
  static Marginal exp_plus_noise(double rate, double noise_variance) {
    if (!(rate > 0.0) || !(noise_variance > 0.0))
      throw ConfigurationError("exp+noise marginal: rate and noise variance must be > 0");
    return Marginal(Family::exp_plus_noise, rate, noise_variance);
  }
  /// sigma_s^2 * chi2_3 + N(0, sigma_v^2).
  static Marginal chi3_plus_noise(double sigma_s_sq, double noise_variance) {
    if (!(sigma_s_sq > 0.0) || !(noise_variance > 0.0))
      throw ConfigurationError("chi3+noise marginal: variances must be > 0");
    return Marginal(Family::chi3_plus_noise, sigma_s_sq, noise_variance);
  }

  Family family() const noexcept { return family_; }
  double p1() const noexcept { return p1_; }
  double p2() const noexcept { return p2_; }

  std::string name() const {
    switch (family_) {
      case Family::gaussian: return "gaussian";
      case Family::exponential: return "exponential";
      case Family::beta_a1: return "beta";
      case Family::gamma: return "gamma";
      case Family::exp_plus_noise: return "exp+noise";
      case Family::chi3_plus_noise: return "chi3+noise";
    }
    return "unknown";
  }

  double mean() const {
    switch (family_) {
      case Family::gaussian: return p1_;
      case Family::exponential: return 1.0 / p1_;
      case Family::beta_a1: return p1_ / (p1_ + 1.0);
      case Family::gamma: return p1_ * p2_;
      case Family::exp_plus_noise: return 1.0 / p1_;
      case Family::chi3_plus_noise: return 3.0 * p1_;
    }
    return 0.0;
  }

  double variance() const {
    switch (family_) {
      case Family::gaussian: return p2_;
      case Family::exponential: return 1.0 / (p1_ * p1_);
      case Family::beta_a1: return p1_ / ((p1_ + 1.0) * (p1_ + 1.0) * (p1_ + 2.0));
      case Family::gamma: return p1_ * p2_ * p2_;
      case Family::exp_plus_noise: return p2_ + 1.0 / (p1_ * p1_);
      case Family::chi3_plus_noise: return p2_ + 6.0 * p1_ * p1_;
    }
    return 0.0;
  }

  double log_pdf(double x) const {
    switch (family_) {
      case Family::gaussian: {
        const double sd = std::sqrt(p2_);
        return special::normal_log_pdf((x - p1_) / sd) - std::log(sd);
      }
      case Family::exponential:
        return x < 0.0 ? detail::kNegInf : std::log(p1_) - p1_ * x;
      case Family::beta_a1:
        if (x < 0.0 || x > 1.0) return detail::kNegInf;
        if (x == 0.0) return p1_ < 1.0 ? std::numeric_limits<double>::infinity()
                                       : (p1_ == 1.0 ? 0.0 : detail::kNegInf);
        return std::log(p1_) + (p1_ - 1.0) * std::log(x);
      case Family::gamma:
        if (x < 0.0) return detail::kNegInf;
        if (x == 0.0) return p1_ == 1.0 ? -std::log(p2_) : (p1_ < 1.0 ? -detail::kNegInf : detail::kNegInf);
        return (p1_ - 1.0) * std::log(x) - x / p2_ - std::lgamma(p1_) - p1_ * std::log(p2_);
      case Family::exp_plus_noise: return exp_noise_log_pdf(x);
      case Family::chi3_plus_noise: return chi3_noise_log_pdf(x);
    }
    return detail::kNegInf;
  }

  double pdf(double x) const { return std::exp(log_pdf(x)); }

  double cdf(double x) const {
    switch (family_) {
      case Family::gaussian: return special::normal_cdf((x - p1_) / std::sqrt(p2_));
      case Family::exponential: return x <= 0.0 ? 0.0 : -std::expm1(-p1_ * x);
      case Family::beta_a1: return x <= 0.0 ? 0.0 : (x >= 1.0 ? 1.0 : std::pow(x, p1_));
      case Family::gamma: return x <= 0.0 ? 0.0 : boost::math::gamma_p(p1_, x / p2_);
      case Family::exp_plus_noise: {
        const double sv = std::sqrt(p2_);
        const double tail = -p1_ * x + 0.5 * p2_ * p1_ * p1_ + special::normal_log_cdf((x - p2_ * p1_) / sv);
        return std::clamp(special::normal_cdf(x / sv) - std::exp(tail), 0.0, 1.0);
      }
      case Family::chi3_plus_noise: return chi3_noise_cdf(x);
    }
    return 0.0;
  }

  /// Independent draw; used for H0 data.
  double sample(Rng& rng) const {
    switch (family_) {
      case Family::gaussian: return std::normal_distribution<double>(p1_, std::sqrt(p2_))(rng);
      case Family::exponential: return std::exponential_distribution<double>(p1_)(rng);
      case Family::beta_a1: {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const double x = std::pow(u, 1.0 / p1_);
        return std::clamp(x, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
      }
      case Family::gamma: return std::gamma_distribution<double>(p1_, p2_)(rng);
      case Family::exp_plus_noise:
        return std::exponential_distribution<double>(p1_)(rng) +
               std::normal_distribution<double>(0.0, std::sqrt(p2_))(rng);
      case Family::chi3_plus_noise: {
        std::normal_distribution<double> latent(0.0, std::sqrt(p1_));
        double s = 0.0;
        for (int k = 0; k < 3; ++k) {
          const double g = latent(rng);
          s += g * g;
        }
        return s + std::normal_distribution<double>(0.0, std::sqrt(p2_))(rng);
      }
    }
    return 0.0;
  }

 private:
  Marginal(Family f, double p1, double p2) : family_(f), p1_(p1), p2_(p2) {}

  // lambda e^{-lambda x + sv^2 lambda^2 / 2} Phi((x - sv^2 lambda) / sv)
  double exp_noise_log_pdf(double x) const {
    const double lambda = p1_, sv2 = p2_;
    return std::log(lambda) - lambda * x + 0.5 * sv2 * lambda * lambda +
           special::normal_log_cdf((x - sv2 * lambda) / std::sqrt(sv2));
  }

  // f(x) = sqrt(sv) / (2 pi ss^3) e^{-x^2 / (2 sv^2)} J(z),
  // J(z) = int_0^inf t^{1/2} e^{-t z - t^2 / 2} dt, z = (sv^2 - 2 ss^2 x) / (2 ss^2 sv).
  // Here ss^2 = p1 and sv^2 = p2.
  double chi3_noise_log_pdf(double x) const {
    const double ss2 = p1_, sv2 = p2_;
    const double sv = std::sqrt(sv2), ss = std::sqrt(ss2);
    const double z = (sv2 - 2.0 * ss2 * x) / (2.0 * ss2 * sv);
    const double log_prefactor = 0.5 * std::log(sv) - std::log(2.0 * std::numbers::pi) - 3.0 * std::log(ss) -
                                 x * x / (2.0 * sv2);
    return log_prefactor + log_j(z);
  }

  static double log_j(double z) {
    if (z >= 0.0) {
      // t = s^2 removes the endpoint singularity.
      auto f = [z](double s) {
        const double s2 = s * s;
        return 2.0 * s2 * std::exp(-s2 * z - 0.5 * s2 * s2);
      };
      return std::log(detail::integrate_half_line(f, "chi3+noise pdf").value);
    }
    // Peak at t = c; factor out e^{c^2/2}.
    const double c = -z;
    auto left = [c](double s) {
      const double s2 = s * s;
      const double d = s2 - c;
      return 2.0 * s2 * std::exp(-0.5 * d * d);
    };
    auto right = [c](double r) { return std::sqrt(c + r) * std::exp(-0.5 * r * r); };
    const double k = detail::integrate_interval(left, 0.0, std::sqrt(c), "chi3+noise pdf").value +
                     detail::integrate_half_line(right, "chi3+noise pdf").value;
    return 0.5 * c * c + std::log(k);
  }

  // F(x) = (2 / Gamma(3/2)) int_0^inf s^2 e^{-s^2} Phi((x - 2 ss^2 s^2) / sv) ds
  double chi3_noise_cdf(double x) const {
    const double ss2 = p1_, sv = std::sqrt(p2_);
    auto f = [&](double s) {
      const double s2 = s * s;
      return s2 * std::exp(-s2) * special::normal_cdf((x - 2.0 * ss2 * s2) / sv);
    };
    const double v = detail::integrate_half_line(f, "chi3+noise cdf").value;
    return std::clamp(2.0 / std::tgamma(1.5) * v, 0.0, 1.0);
  }

  Family family_;
  double p1_;
  double p2_;
};

}  // namespace csfuse
