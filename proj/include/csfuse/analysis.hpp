#pragma once

// Bhattacharyya distances, error-probability bounds and the compressed vs
// uncompressed comparison rule.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csfuse/copula.hpp"
#include "csfuse/detectors.hpp"
#include "csfuse/error.hpp"
#include "csfuse/linops.hpp"
#include "csfuse/parallel.hpp"
#include "csfuse/rng.hpp"
#include "csfuse/scenarios.hpp"

namespace csfuse {

struct DistanceReport {
  std::string approach;
  double c_r = 1.0;
  double d_b = 0.0;
  double d_b_stderr = 0.0;
  double p_ub = 0.5;
  std::string method = "closed-form";
  long trials = 0;
  std::uint64_t seed = 0;
};

inline double error_bound(double d_b) { return 0.5 * std::exp(-d_b); }

namespace detail {

inline double logdet_spd(const MatrixXd& c, const char* what) {
  Eigen::LLT<MatrixXd> llt(c);
  if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + ": matrix not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace detail

/// Bhattacharyya distance between N(mu0, c0) and N(mu1, c1).
inline double bhatt_gaussian(const VectorXd& mu0, const MatrixXd& c0, const VectorXd& mu1, const MatrixXd& c1) {
  const MatrixXd gamma = 0.5 * (c0 + c1);
  Eigen::LLT<MatrixXd> llt(gamma);
  if (llt.info() != Eigen::Success) throw NumericalError("bhatt_gaussian: averaged covariance is indefinite");
  const VectorXd delta = mu1 - mu0;
  const double mean_term = 0.125 * delta.dot(llt.solve(delta));
  const double logdet_g = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double logdet0 = detail::logdet_spd(c0, "bhatt_gaussian");
  const double logdet1 = detail::logdet_spd(c1, "bhatt_gaussian");
  return mean_term + 0.5 * (logdet_g - 0.5 * logdet1 - 0.5 * logdet0);
}

/// Closed-form c:GA distance for statistics compressed by bp.
inline DistanceReport bhatt_gaussian_compressed(const HypothesisStats& stats, const BlockProjection& bp) {
  const auto s0 = compress_stats(bp, stats.beta0, stats.d0);
  const auto s1 = compress_stats(bp, stats.beta1, stats.d1);
  DistanceReport r;
  r.approach = "c:GA";
  r.c_r = static_cast<double>(bp.m()) / static_cast<double>(bp.n());
  r.d_b = bhatt_gaussian(s0.mu, s0.c, s1.mu, s1.c);
  r.p_ub = error_bound(r.d_b);
  r.method = "closed-form";
  return r;
}

/// Per-sensor moments for the diagonal setting: D_j^i = var_i I, beta_j^i = mean_i 1.
struct SensorMoments {
  double var0 = 1.0, var1 = 1.0;
  double mean0 = 0.0, mean1 = 0.0;
};

struct RhoB {
  double printed = 0.0;    // as printed next to the dominance condition
  double corrected = 0.0;  // specialization of the Gaussian distance; c_r * corrected = D_B^{c:GA}
};

inline RhoB rho_b(const std::vector<SensorMoments>& sensors, Index n) {
  RhoB r;
  for (const auto& s : sensors) {
    const double sum = s.var1 + s.var0, prod = s.var1 * s.var0;
    const double d2 = (s.mean1 - s.mean0) * (s.mean1 - s.mean0);
    r.printed += std::log(sum) - std::log(prod) + d2 / (2.0 * sum);
    r.corrected += 0.5 * std::log(0.5 * sum) - 0.25 * std::log(prod) + d2 / (4.0 * sum);
  }
  r.printed *= 0.5 * static_cast<double>(n);
  r.corrected *= static_cast<double>(n);
  return r;
}

/// Moments of each sensor for the diagonal variant of a scenario (cross
/// covariances dropped).
inline std::vector<SensorMoments> diagonal_moments(const HypothesisStats& stats) {
  std::vector<SensorMoments> out;
  for (Index j = 0; j < stats.l(); ++j)
    out.push_back({stats.d0.scalars(j, j), stats.d1.scalars(j, j), stats.beta0(j), stats.beta1(j)});
  return out;
}

enum class McApproach { product, copula };

namespace detail {

inline double log_mean_exp(const std::vector<double>& v, const std::vector<std::size_t>* idx = nullptr) {
  const std::size_t count = idx ? idx->size() : v.size();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < count; ++k) mx = std::max(mx, v[idx ? (*idx)[k] : k]);
  if (!std::isfinite(mx)) return mx;
  long double acc = 0.0L;
  for (std::size_t k = 0; k < count; ++k) acc += std::exp(v[idx ? (*idx)[k] : k] - mx);
  return mx + std::log(static_cast<double>(acc / static_cast<long double>(count)));
}

}  // namespace detail

/// Monte Carlo Bhattacharyya distance -log E_{f0}[(f1/f0)^{1/2} c1^{1/2}]
/// over `trials` H0 draws, with a 200-resample bootstrap standard error.
template <class Provider>
DistanceReport bhatt_mc(McApproach approach, const ScenarioSpec& spec, const Provider& marginals,
                        const std::optional<CopulaSpec>& cop1, long trials, std::uint64_t seed, unsigned threads = 1) {
  if (trials < 1000) throw ConfigurationError("bhatt_mc: need at least 1000 trials");
  if (approach == McApproach::copula && !cop1) throw ConfigurationError("bhatt_mc: copula approach needs a copula");
  std::vector<double> log_terms(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t t) {
    const VectorXd x = sample(spec, Hypothesis::h0, derive_seed(seed, {seed_tag::kH0, t}));
    const DetectorScore s =
        approach == McApproach::product ? llr_product(x, marginals) : llr_copula(x, marginals, *cop1);
    log_terms[t] = 0.5 * s.value;
  });
  for (double v : log_terms)
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw NumericalError("bhatt_mc: non-finite integrand; increase trials or check marginals");
  const double lme = detail::log_mean_exp(log_terms);
  if (!std::isfinite(lme)) throw NumericalError("bhatt_mc: all integrand mass is zero; increase trials");

  constexpr int kResamples = 200;
  Rng rng(derive_seed(seed, {seed_tag::kBootstrap}));
  std::uniform_int_distribution<std::size_t> pick(0, log_terms.size() - 1);
  std::vector<std::size_t> idx(log_terms.size());
  double sum = 0.0, sum2 = 0.0;
  for (int b = 0; b < kResamples; ++b) {
    for (auto& i : idx) i = pick(rng);
    const double d = -detail::log_mean_exp(log_terms, &idx);
    sum += d;
    sum2 += d * d;
  }
  const double mean_b = sum / kResamples;
  DistanceReport r;
  r.approach = approach == McApproach::product ? "u:product" : "u:copula-" + to_string(cop1->family());
  r.c_r = 1.0;
  r.d_b = -lme;
  r.d_b_stderr = std::sqrt(std::max(0.0, sum2 / kResamples - mean_b * mean_b) * kResamples / (kResamples - 1));
  r.p_ub = error_bound(r.d_b);
  r.method = "monte-carlo(" + std::to_string(trials) + "," + std::to_string(seed) + ")";
  r.trials = trials;
  r.seed = seed;
  return r;
}

struct ComparisonEntry {
  std::string approach;
  double d_b = 0.0;
  bool dominated = false;      // D_B^{c:GA} >= D_B^{u}
  bool dominated_3se = false;  // D_B^{c:GA} - D_B^{u} > 3 combined standard errors
};

struct Recommendation {
  double d_cga = 0.0;
  double target = 0.0;  // -log(2 epsilon_B)
  bool meets_target = false;
  std::vector<ComparisonEntry> entries;
};

/// reports must contain exactly one "c:GA" entry; every other report is an
/// uncompressed approach compared against it.
inline Recommendation compare_rule(const std::vector<DistanceReport>& reports, double epsilon_b) {
  if (!(epsilon_b > 0.0 && epsilon_b <= 0.5)) throw ConfigurationError("compare_rule: epsilon_b must be in (0, 0.5]");
  const DistanceReport* cga = nullptr;
  for (const auto& r : reports) {
    if (r.approach == "c:GA") {
      if (cga) throw ConfigurationError("compare_rule: more than one c:GA report");
      cga = &r;
    }
  }
  if (!cga) throw ConfigurationError("compare_rule: no c:GA report");
  Recommendation rec;
  rec.d_cga = cga->d_b;
  rec.target = -std::log(2.0 * epsilon_b);
  rec.meets_target = cga->d_b >= rec.target;
  for (const auto& r : reports) {
    if (&r == cga) continue;
    ComparisonEntry e;
    e.approach = r.approach;
    e.d_b = r.d_b;
    e.dominated = cga->d_b >= r.d_b;
    const double se = std::sqrt(cga->d_b_stderr * cga->d_b_stderr + r.d_b_stderr * r.d_b_stderr);
    e.dominated_3se = cga->d_b - r.d_b > 3.0 * se;
    rec.entries.push_back(e);
  }
  return rec;
}

}  // namespace csfuse
