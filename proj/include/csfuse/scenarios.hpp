#pragma once

// Synthetic dependent multimodal scenarios and their closed-form statistics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cctype>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "csfuse/error.hpp"
#include "csfuse/linops.hpp"
#include "csfuse/marginals.hpp"
#include "csfuse/rng.hpp"

namespace csfuse {

enum class Hypothesis : int { h0 = 0, h1 = 1 };

inline std::uint64_t hypothesis_tag(Hypothesis h) {
  return h == Hypothesis::h0 ? seed_tag::kH0 : seed_tag::kH1;
}

enum class ScenarioId { case1, case2, case3, example2 };

inline std::string to_string(ScenarioId id) {
  switch (id) {
    case ScenarioId::case1: return "case1";
    case ScenarioId::case2: return "case2";
    case ScenarioId::case3: return "case3";
    case ScenarioId::example2: return "example2";
  }
  return "unknown";
}

inline ScenarioId parse_scenario_id(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "case1") return ScenarioId::case1;
  if (s == "case2") return ScenarioId::case2;
  if (s == "case3") return ScenarioId::case3;
  if (s == "example2") return ScenarioId::example2;
  throw ConfigurationError("unknown scenario id '" + s + "' (expected case1, case2, case3 or example2)");
}

/// Parameters of both hypotheses. Under H1 the Gaussian latent of sensor 1 in
/// Example 1 has variance 1/(2 lambda1); in Example 2 the signal rate is
/// 1/(2 sigma_s_sq).
struct ScenarioParams {
  double sigma0_sq = 5.0;
  double lambda0 = 0.1;
  double a0 = 9.8;
  double lambda1 = 1.0 / 10.2;
  double a1 = 10.0;
  double sigma_v_sq = 2.0;
  double sigma_s_sq = 0.1;
};

struct ScenarioSpec {
  ScenarioId id = ScenarioId::case2;
  Index n = 1000;
  ScenarioParams params;
  std::uint64_t seed = 1;

  Index l() const noexcept { return id == ScenarioId::case3 ? 3 : 2; }

  void validate() const {
    if (n < 1) throw ConfigurationError("scenario: n must be >= 1");
    const auto& p = params;
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigurationError(std::string("scenario: ") + name + " must be finite and > 0");
    };
    if (id == ScenarioId::example2) {
      positive(p.sigma_v_sq, "sigma_v_sq");
      positive(p.sigma_s_sq, "sigma_s_sq");
      return;
    }
    positive(p.lambda0, "lambda0");
    positive(p.lambda1, "lambda1");
    if (id != ScenarioId::case1) {
      positive(p.a0, "a0");
      positive(p.a1, "a1");
    }
    if (id != ScenarioId::case2) positive(p.sigma0_sq, "sigma0_sq");
  }
};

/// Marginal of sensor j (0-based) under hypothesis h.
inline Marginal scenario_marginal(const ScenarioSpec& spec, Index sensor, Hypothesis h) {
  const auto& p = spec.params;
  const bool h1 = h == Hypothesis::h1;
  if (sensor < 0 || sensor >= spec.l()) throw InvalidDimensionError("scenario_marginal: sensor index out of range");
  if (spec.id == ScenarioId::example2) {
    if (!h1) return Marginal::gaussian(0.0, p.sigma_v_sq);
    if (sensor == 0) return Marginal::exp_plus_noise(1.0 / (2.0 * p.sigma_s_sq), p.sigma_v_sq);
    return Marginal::chi3_plus_noise(p.sigma_s_sq, p.sigma_v_sq);
  }
  // Example 1: map the fused sensors onto {gaussian, exponential, beta}.
  Index kind = sensor;
  if (spec.id == ScenarioId::case2) kind = sensor + 1;
  switch (kind) {
    case 0: return Marginal::gaussian(0.0, h1 ? 1.0 / (2.0 * p.lambda1) : p.sigma0_sq);
    case 1: return Marginal::exponential(h1 ? p.lambda1 : p.lambda0);
    default: return Marginal::beta_a1(h1 ? p.a1 : p.a0);
  }
}

inline double marginal_pdf(const ScenarioSpec& spec, Index sensor, Hypothesis h, double x) {
  return scenario_marginal(spec, sensor, h).pdf(x);
}

inline double marginal_cdf(const ScenarioSpec& spec, Index sensor, Hypothesis h, double x) {
  return scenario_marginal(spec, sensor, h).cdf(x);
}

/// Marginal table for every (sensor, hypothesis), usable as a marginal
/// provider by the product and copula detectors.
class ScenarioMarginals {
 public:
  explicit ScenarioMarginals(const ScenarioSpec& spec) {
    for (Index j = 0; j < spec.l(); ++j) {
      h0_.push_back(scenario_marginal(spec, j, Hypothesis::h0));
      h1_.push_back(scenario_marginal(spec, j, Hypothesis::h1));
    }
  }
  Index sensors() const noexcept { return static_cast<Index>(h0_.size()); }
  const Marginal& get(Index sensor, Hypothesis h) const {
    return h == Hypothesis::h0 ? h0_.at(static_cast<std::size_t>(sensor)) : h1_.at(static_cast<std::size_t>(sensor));
  }
  double log_pdf(Index sensor, Hypothesis h, double x) const { return get(sensor, h).log_pdf(x); }
  double cdf(Index sensor, Hypothesis h, double x) const { return get(sensor, h).cdf(x); }

 private:
  std::vector<Marginal> h0_, h1_;
};

namespace detail {

inline double open_unit(double x) {
  return std::clamp(x, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

}  // namespace detail

/// Writes one frame (length N*L, sensor-major) into out. Latents are drawn
/// per time index in a fixed order so the seed fully determines the frame.
inline void sample_into(const ScenarioSpec& spec, Hypothesis h, Rng& rng, Eigen::Ref<VectorXd> out) {
  const Index n = spec.n, l = spec.l();
  if (out.size() != n * l) throw InvalidDimensionError("sample_into: output length != N*L");
  const auto& p = spec.params;
  std::normal_distribution<double> std_normal(0.0, 1.0);

  if (spec.id == ScenarioId::example2) {
    const double sv = std::sqrt(p.sigma_v_sq), ss = std::sqrt(p.sigma_s_sq);
    for (Index t = 0; t < n; ++t) {
      double s1 = 0.0, s2 = 0.0;
      if (h == Hypothesis::h1) {
        const double s = ss * std_normal(rng);
        const double w = ss * std_normal(rng);
        const double u1 = ss * std_normal(rng);
        const double u2 = ss * std_normal(rng);
        s1 = s * s + w * w;
        s2 = s * s + u1 * u1 + u2 * u2;
      }
      out(t) = s1 + sv * std_normal(rng);
      out(n + t) = s2 + sv * std_normal(rng);
    }
    return;
  }

  if (h == Hypothesis::h0) {
    std::vector<Marginal> m;
    for (Index j = 0; j < l; ++j) m.push_back(scenario_marginal(spec, j, Hypothesis::h0));
    for (Index t = 0; t < n; ++t)
      for (Index j = 0; j < l; ++j) out(j * n + t) = m[static_cast<std::size_t>(j)].sample(rng);
    return;
  }

  // H1: x1 ~ N(0, s1), w ~ N(0, s1), x2 = x1^2 + w^2, u ~ Gamma(a1, 1/lambda1),
  // x3 = u / (u + x2).
  const double sd1 = std::sqrt(1.0 / (2.0 * p.lambda1));
  std::gamma_distribution<double> latent_u(spec.id == ScenarioId::case1 ? 1.0 : p.a1, 1.0 / p.lambda1);
  for (Index t = 0; t < n; ++t) {
    const double x1 = sd1 * std_normal(rng);
    const double w = sd1 * std_normal(rng);
    const double x2 = x1 * x1 + w * w;
    switch (spec.id) {
      case ScenarioId::case1:
        out(t) = x1;
        out(n + t) = x2;
        break;
      case ScenarioId::case2: {
        const double u = latent_u(rng);
        out(t) = x2;
        out(n + t) = detail::open_unit(u / (u + x2));
        break;
      }
      case ScenarioId::case3: {
        const double u = latent_u(rng);
        out(t) = x1;
        out(n + t) = x2;
        out(2 * n + t) = detail::open_unit(u / (u + x2));
        break;
      }
      default: break;
    }
  }
}

inline VectorXd sample(const ScenarioSpec& spec, Hypothesis h, std::uint64_t seed) {
  VectorXd x(spec.n * spec.l());
  Rng rng(seed);
  sample_into(spec, h, rng, x);
  return x;
}

/// Block-structured first and second order statistics of both hypotheses:
/// one mean per sensor and an L x L grid of scalar-diagonal blocks.
struct HypothesisStats {
  Index n = 0;
  VectorXd beta0, beta1;
  ScalarBlockMatrix d0, d1;

  Index l() const noexcept { return beta0.size(); }
  VectorXd full_beta(Hypothesis h) const {
    return expand_block_constant(h == Hypothesis::h0 ? beta0 : beta1, n);
  }
  MatrixXd full_d(Hypothesis h) const { return (h == Hypothesis::h0 ? d0 : d1).dense(n); }
};

/// E{x u / (u + x)} with x ~ Exp(lambda1), u ~ Gamma(a1, 1/lambda1), by
/// Monte Carlo over 10^6 draws with a pinned seed. Cached per (lambda1, a1).
inline double case2_cross_expectation(double lambda1, double a1) {
  static std::mutex mu;
  static std::map<std::pair<double, double>, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({lambda1, a1});
    if (it != cache.end()) return it->second;
  }
  constexpr std::uint64_t kDraws = 1'000'000;
  constexpr std::uint64_t kPinnedSeed = 0x5eedcafe2023ULL;
  Rng rng(kPinnedSeed);
  std::exponential_distribution<double> ex(lambda1);
  std::gamma_distribution<double> gu(a1, 1.0 / lambda1);
  long double acc = 0.0L;
  for (std::uint64_t k = 0; k < kDraws; ++k) {
    const double x = ex(rng);
    const double u = gu(rng);
    acc += x * u / (u + x);
  }
  const double value = static_cast<double>(acc / kDraws);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(std::make_pair(lambda1, a1), value);
  return value;
}

inline HypothesisStats closed_form_stats(const ScenarioSpec& spec) {
  spec.validate();
  const Index l = spec.l();
  HypothesisStats s;
  s.n = spec.n;
  s.beta0.resize(l);
  s.beta1.resize(l);
  s.d0.scalars = MatrixXd::Zero(l, l);
  s.d1.scalars = MatrixXd::Zero(l, l);
  for (Index j = 0; j < l; ++j) {
    const Marginal m0 = scenario_marginal(spec, j, Hypothesis::h0);
    const Marginal m1 = scenario_marginal(spec, j, Hypothesis::h1);
    s.beta0(j) = m0.mean();
    s.beta1(j) = m1.mean();
    s.d0.scalars(j, j) = m0.variance();
    s.d1.scalars(j, j) = m1.variance();
  }
  const auto& p = spec.params;
  auto cross = [&] {
    return case2_cross_expectation(p.lambda1, p.a1) - p.a1 / (p.lambda1 * (p.a1 + 1.0));
  };
  switch (spec.id) {
    case ScenarioId::case1: break;
    case ScenarioId::case2:
      s.d1.scalars(0, 1) = s.d1.scalars(1, 0) = cross();
      break;
    case ScenarioId::case3:
      s.d1.scalars(1, 2) = s.d1.scalars(2, 1) = cross();
      break;
    case ScenarioId::example2: {
      const double s4 = p.sigma_s_sq * p.sigma_s_sq;
      s.d1.scalars(0, 1) = s.d1.scalars(1, 0) = 2.0 * s4;
      break;
    }
  }
  return s;
}

}  // namespace csfuse
