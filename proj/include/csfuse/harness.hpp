#pragma once

// Monte Carlo experiment driver: ROC generation, threshold calibration and
// timing benchmarks.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "csfuse/analysis.hpp"
#include "csfuse/copula.hpp"
#include "csfuse/covariance_detector.hpp"
#include "csfuse/detectors.hpp"
#include "csfuse/error.hpp"
#include "csfuse/gaussian_model.hpp"
#include "csfuse/linops.hpp"
#include "csfuse/parallel.hpp"
#include "csfuse/rng.hpp"
#include "csfuse/roc.hpp"
#include "csfuse/scenarios.hpp"

namespace csfuse {

enum class DetectorKind { c_ga, u_product, u_copula_gaussian, u_copula_clayton, u_copula_gumbel, u_energy, c_energy, c_cov };

inline std::string to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::c_ga: return "c:GA";
    case DetectorKind::u_product: return "u:product";
    case DetectorKind::u_copula_gaussian: return "u:copula-gaussian";
    case DetectorKind::u_copula_clayton: return "u:copula-clayton";
    case DetectorKind::u_copula_gumbel: return "u:copula-gumbel";
    case DetectorKind::u_energy: return "u:energy";
    case DetectorKind::c_energy: return "c:energy";
    case DetectorKind::c_cov: return "c:cov";
  }
  return "unknown";
}

inline DetectorKind parse_detector(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "c:ga") return DetectorKind::c_ga;
  if (s == "u:product") return DetectorKind::u_product;
  if (s == "u:copula-gaussian") return DetectorKind::u_copula_gaussian;
  if (s == "u:copula-clayton") return DetectorKind::u_copula_clayton;
  if (s == "u:copula-gumbel") return DetectorKind::u_copula_gumbel;
  if (s == "u:energy") return DetectorKind::u_energy;
  if (s == "c:energy") return DetectorKind::c_energy;
  if (s == "c:cov") return DetectorKind::c_cov;
  throw ConfigurationError("unknown detector '" + s +
                           "' (expected c:GA, u:product, u:copula-gaussian, u:copula-clayton, u:copula-gumbel, "
                           "u:energy, c:energy or c:cov)");
}

inline bool is_compressed(DetectorKind k) {
  return k == DetectorKind::c_ga || k == DetectorKind::c_energy || k == DetectorKind::c_cov;
}

inline std::optional<CopulaFamily> copula_of(DetectorKind k) {
  switch (k) {
    case DetectorKind::u_copula_gaussian: return CopulaFamily::gaussian;
    case DetectorKind::u_copula_clayton: return CopulaFamily::clayton;
    case DetectorKind::u_copula_gumbel: return CopulaFamily::gumbel;
    default: return std::nullopt;
  }
}

inline Index compressed_dim(Index n, double c_r) {
  return std::clamp<Index>(static_cast<Index>(std::llround(c_r * static_cast<double>(n))), 1, n);
}

struct DetectorConfig {
  DetectorKind kind = DetectorKind::c_ga;
  std::vector<double> c_r{1.0};
  std::optional<Index> t;  // frames per decision; falls back to the experiment default
  LsMode ls_mode = LsMode::exact;
  TieMode tie = TieMode::shared;
  std::vector<std::pair<Index, Index>> sensor_pairs;  // empty: pairs with nonzero H1 cross covariance
  Index copula_fit_samples = 2000;
};

struct CalibrateConfig {
  DetectorConfig detector = [] {
    DetectorConfig d;
    d.kind = DetectorKind::c_cov;
    d.c_r = {0.04};
    d.t = 10;
    return d;
  }();
  double alpha0 = 0.05;
  long trials = 1000;
  std::vector<double> a0_grid;
  std::vector<double> inv_lambda0_grid;
};

struct BoundsConfig {
  std::vector<double> c_r{0.05, 0.1, 0.2, 0.3, 0.5, 1.0};
  long trials = 10000;
  int projection_seeds = 1;
  double epsilon_b = 1e-3;
  std::vector<std::string> approaches{"u:product"};
};

struct BenchConfig {
  std::vector<std::string> approaches{"c:GA", "u:product"};
  std::vector<double> c_r{0.1, 0.2, 0.5};
  long evals = 1000;
  long warmup = 20;
};

struct ExperimentConfig {
  ScenarioSpec scenario;
  std::vector<DetectorConfig> detectors;
  long trials = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool fixed_projection = false;
  int roc_levels = 512;
  Index t = 1;
  std::vector<double> alpha{0.01, 0.05, 0.1};
  std::string output_dir = "out";
  CalibrateConfig calibrate;
  BoundsConfig bounds;
  BenchConfig bench;
};

inline void validate_detector(const DetectorConfig& d, const ScenarioSpec& s, Index t_default) {
  const Index t = d.t.value_or(t_default);
  if (t < 1) throw ConfigurationError(to_string(d.kind) + ": T must be >= 1");
  if (d.kind == DetectorKind::c_cov && t < 2)
    throw ConfigurationError("c:cov needs T > 1 frames per decision to form a sample covariance");
  if (d.c_r.empty()) throw ConfigurationError(to_string(d.kind) + ": empty c_r list");
  for (double c : d.c_r)
    if (!(c > 0.0 && c <= 1.0)) throw ConfigurationError(to_string(d.kind) + ": c_r must be in (0, 1]");
  const auto fam = copula_of(d.kind);
  if (fam && *fam != CopulaFamily::gaussian && s.l() != 2)
    throw ConfigurationError(to_string(d.kind) + " is bivariate; scenario has " + std::to_string(s.l()) + " sensors");
  for (auto [j, k] : d.sensor_pairs)
    if (j < 0 || k < 0 || j >= s.l() || k >= s.l() || j == k)
      throw ConfigurationError(to_string(d.kind) + ": invalid sensor pair");
}

inline void validate(const ExperimentConfig& c) {
  c.scenario.validate();
  if (c.trials < 100) throw ConfigurationError("trials must be >= 100");
  if (c.roc_levels < 2) throw ConfigurationError("roc_levels must be >= 2");
  for (const auto& d : c.detectors) validate_detector(d, c.scenario, c.t);
}

/// Scores of one trial under both hypotheses.
struct TrialScores {
  double h0 = 0.0;
  double h1 = 0.0;
};

/// One detector at one compression ratio, ready to score trials. Shared
/// state is read-only after construction.
class DetectorEngine {
 public:
  DetectorEngine(const ScenarioSpec& scenario, const DetectorConfig& cfg, double c_r, Index t, std::uint64_t master,
                 bool fixed_projection)
      : scenario_(scenario),
        cfg_(cfg),
        kind_(cfg.kind),
        t_(t),
        master_(master),
        fixed_(fixed_projection),
        marginals_(scenario) {
    const Index n = scenario.n;
    c_r_ = is_compressed(kind_) ? c_r : 1.0;
    m_ = is_compressed(kind_) ? compressed_dim(n, c_r_) : n;
    if (kind_ == DetectorKind::c_ga) stats_ = closed_form_stats(scenario);
    if (kind_ == DetectorKind::c_cov) pairs_ = resolve_pairs();
    if (auto fam = copula_of(kind_)) cop1_ = fit(*fam);
    if (is_compressed(kind_) && fixed_) {
      bp_fixed_ = make_block_projection(scenario.l(), m_, n, derive_seed(master_, {seed_tag::kProjection, static_cast<std::uint64_t>(m_)}));
      if (kind_ == DetectorKind::c_ga) model_fixed_ = build_gaussian_model(*stats_, *bp_fixed_);
    }
  }

  Index m() const noexcept { return m_; }
  double c_r() const noexcept { return c_r_; }
  Index t() const noexcept { return t_; }
  const std::optional<CopulaSpec>& copula() const noexcept { return cop1_; }

  /// Frame f of trial `trial` under h; shared by every detector with the same master seed.
  MatrixXd frames(std::size_t trial, Hypothesis h) const {
    const Index nl = scenario_.n * scenario_.l();
    MatrixXd x(nl, t_);
    for (Index f = 0; f < t_; ++f) {
      Rng rng(derive_seed(master_, {hypothesis_tag(h), trial, static_cast<std::uint64_t>(f)}));
      sample_into(scenario_, h, rng, x.col(f));
    }
    return x;
  }

  BlockProjection projection(std::size_t trial) const {
    if (fixed_) return *bp_fixed_;
    return make_block_projection(scenario_.l(), m_, scenario_.n,
                                 derive_seed(master_, {seed_tag::kProjection, trial, static_cast<std::uint64_t>(m_)}));
  }

  TrialScores score_trial(std::size_t trial) const {
    TrialScores s;
    if (!is_compressed(kind_)) {
      s.h0 = score_uncompressed(frames(trial, Hypothesis::h0));
      s.h1 = score_uncompressed(frames(trial, Hypothesis::h1));
      return s;
    }
    const BlockProjection bp = projection(trial);
    std::optional<GaussianModel> local_model;
    const GaussianModel* model = nullptr;
    if (kind_ == DetectorKind::c_ga) {
      if (fixed_) {
        model = &*model_fixed_;
      } else {
        local_model = build_gaussian_model(*stats_, bp);
        model = &*local_model;
      }
    }
    s.h0 = score_compressed(block_compress_frames(bp, frames(trial, Hypothesis::h0)), bp, model);
    s.h1 = score_compressed(block_compress_frames(bp, frames(trial, Hypothesis::h1)), bp, model);
    return s;
  }

  double score_h0(std::size_t trial) const {
    const MatrixXd x = frames(trial, Hypothesis::h0);
    if (!is_compressed(kind_)) return score_uncompressed(x);
    const BlockProjection bp = projection(trial);
    std::optional<GaussianModel> local_model;
    const GaussianModel* model = nullptr;
    if (kind_ == DetectorKind::c_ga) {
      if (fixed_) {
        model = &*model_fixed_;
      } else {
        local_model = build_gaussian_model(*stats_, bp);
        model = &*local_model;
      }
    }
    return score_compressed(block_compress_frames(bp, x), bp, model);
  }

  double score_uncompressed(const MatrixXd& x) const {
    double total = 0.0;
    switch (kind_) {
      case DetectorKind::u_energy: return energy_stat(x).value;
      case DetectorKind::u_product:
        for (Index f = 0; f < x.cols(); ++f) total += llr_product(x.col(f), marginals_).value;
        return total;
      default:
        for (Index f = 0; f < x.cols(); ++f) total += llr_copula(x.col(f), marginals_, *cop1_).value;
        return total;
    }
  }

  double score_compressed(const MatrixXd& y, const BlockProjection& bp, const GaussianModel* model) const {
    switch (kind_) {
      case DetectorKind::c_ga: return llr_ga_frames(y, *model).value;
      case DetectorKind::c_energy: return energy_stat(y).value;
      default: {
        const MatrixXd c = sample_cov(y);
        return cav_stat(ls_offdiag(c, bp, pairs_, cfg_.ls_mode, cfg_.tie)).value;
      }
    }
  }

  const ScenarioMarginals& marginals() const noexcept { return marginals_; }
  const std::vector<IndexPair>& pairs() const noexcept { return pairs_; }

 private:
  std::vector<IndexPair> resolve_pairs() const {
    if (!cfg_.sensor_pairs.empty()) return same_index_pairs(scenario_.n, cfg_.sensor_pairs);
    const HypothesisStats st = closed_form_stats(scenario_);
    std::vector<std::pair<Index, Index>> sp;
    for (Index j = 0; j < st.l(); ++j)
      for (Index k = j + 1; k < st.l(); ++k)
        if (st.d1.scalars(j, k) != 0.0) sp.emplace_back(j, k);
    if (sp.empty()) return all_cross_pairs(scenario_.n, scenario_.l());
    return same_index_pairs(scenario_.n, sp);
  }

  // Pseudo-observations from H1 draws through the H1 marginal cdfs.
  CopulaSpec fit(CopulaFamily fam) const {
    const Index n = scenario_.n, l = scenario_.l();
    const Index frames = std::max<Index>(1, (cfg_.copula_fit_samples + n - 1) / n);
    MatrixXd u(frames * n, l);
    for (Index f = 0; f < frames; ++f) {
      const VectorXd x = sample(scenario_, Hypothesis::h1, derive_seed(master_, {seed_tag::kCopulaFit, static_cast<std::uint64_t>(f)}));
      for (Index j = 0; j < l; ++j)
        for (Index t = 0; t < n; ++t)
          u(f * n + t, j) = std::clamp(marginals_.cdf(j, Hypothesis::h1, x(j * n + t)), kCopulaClamp, 1.0 - kCopulaClamp);
    }
    return fit_copula(u, fam);
  }

  ScenarioSpec scenario_;
  DetectorConfig cfg_;
  DetectorKind kind_;
  Index t_;
  std::uint64_t master_;
  bool fixed_;
  double c_r_ = 1.0;
  Index m_ = 0;
  ScenarioMarginals marginals_;
  std::optional<HypothesisStats> stats_;
  std::optional<CopulaSpec> cop1_;
  std::optional<BlockProjection> bp_fixed_;
  std::optional<GaussianModel> model_fixed_;
  std::vector<IndexPair> pairs_;
};

struct RocRun {
  std::vector<RocCurve> curves;
  std::vector<std::string> warnings;
};

/// Scores `trials` H0/H1 trials for one detector setting.
inline std::pair<std::vector<double>, std::vector<double>> run_scores(const DetectorEngine& eng, long trials,
                                                                      unsigned threads) {
  std::vector<double> h0(static_cast<std::size_t>(trials)), h1(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t k) {
    const TrialScores s = eng.score_trial(k);
    h0[k] = s.h0;
    h1[k] = s.h1;
  });
  return {std::move(h0), std::move(h1)};
}

inline RocRun run_roc(const ExperimentConfig& config) {
  validate(config);
  RocRun out;
  for (const auto& d : config.detectors) {
    const Index t = d.t.value_or(config.t);
    std::vector<double> ratios = is_compressed(d.kind) ? d.c_r : std::vector<double>{1.0};
    for (double c_r : ratios) {
      std::optional<DetectorEngine> eng;
      try {
        eng.emplace(config.scenario, d, c_r, t, config.seed, config.fixed_projection);
      } catch (const FitError& e) {
        out.warnings.push_back(to_string(d.kind) + " skipped: " + e.what());
        break;
      }
      auto [h0, h1] = run_scores(*eng, config.trials, config.threads);
      RocCurve c = make_roc(h0, h1, config.roc_levels);
      c.detector = to_string(d.kind);
      c.scenario = to_string(config.scenario.id);
      c.n = config.scenario.n;
      c.m = eng->m();
      c.c_r = eng->c_r();
      c.t = t;
      c.trials = config.trials;
      c.seed = config.seed;
      out.curves.push_back(std::move(c));
    }
  }
  return out;
}

struct CalibrationPoint {
  std::string detector;
  double a0 = 0.0;
  double inv_lambda0 = 0.0;
  long n = 0;
  long m = 0;
  long t = 1;
  double alpha0 = 0.0;
  double threshold = 0.0;
  double achieved_pf = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string method;  // simulation | analytic-corrected | analytic-printed
};

/// Simulated H0 threshold for one detector at one scenario.
inline CalibrationPoint calibrate_threshold(const DetectorConfig& d, const ScenarioSpec& scenario, Index t_default,
                                            double alpha0, long trials, std::uint64_t seed, unsigned threads = 1,
                                            bool fixed_projection = false) {
  validate_detector(d, scenario, t_default);
  const Index t = d.t.value_or(t_default);
  if (static_cast<double>(trials) * alpha0 < 20.0)
    throw CalibrationError("calibrate_threshold: trials * alpha0 < 20; increase trials");
  const DetectorEngine eng(scenario, d, d.c_r.front(), t, derive_seed(seed, {seed_tag::kCalibrate}), fixed_projection);
  std::vector<double> h0(static_cast<std::size_t>(trials));
  parallel_for(h0.size(), threads, [&](std::size_t k) { h0[k] = eng.score_h0(k); });
  const CalibratedThreshold c = calibrate_from_scores(std::move(h0), alpha0);
  CalibrationPoint p;
  p.detector = to_string(d.kind);
  p.a0 = scenario.params.a0;
  p.inv_lambda0 = 1.0 / scenario.params.lambda0;
  p.n = scenario.n;
  p.m = eng.m();
  p.t = t;
  p.alpha0 = alpha0;
  p.threshold = c.threshold;
  p.achieved_pf = c.achieved_pf;
  p.ci_low = c.ci_low;
  p.ci_high = c.ci_high;
  p.method = "simulation";
  return p;
}

/// Calibrated detector threshold plus analytic u:energy thresholds over the
/// (a0, 1/lambda0) grid of the calibrate section.
inline std::vector<CalibrationPoint> calibrate_grid(const ExperimentConfig& config) {
  const auto& cc = config.calibrate;
  std::vector<double> a0s = cc.a0_grid.empty() ? std::vector<double>{config.scenario.params.a0} : cc.a0_grid;
  std::vector<double> ils = cc.inv_lambda0_grid.empty() ? std::vector<double>{1.0 / config.scenario.params.lambda0}
                                                        : cc.inv_lambda0_grid;
  std::vector<CalibrationPoint> out;
  for (double a0 : a0s) {
    for (double il : ils) {
      ScenarioSpec s = config.scenario;
      s.params.a0 = a0;
      s.params.lambda0 = 1.0 / il;
      out.push_back(calibrate_threshold(cc.detector, s, config.t, cc.alpha0, cc.trials, config.seed, config.threads,
                                        config.fixed_projection));
      const Index t = cc.detector.t.value_or(config.t);
      if (config.scenario.id == ScenarioId::case2) {
        for (auto variant : {EnergyVariance::corrected, EnergyVariance::printed}) {
          const auto th = energy_threshold(Domain::uncompressed, cc.alpha0, s.params.lambda0, a0, s.n, t, variant);
          CalibrationPoint p;
          p.detector = "u:energy";
          p.a0 = a0;
          p.inv_lambda0 = il;
          p.n = s.n;
          p.m = s.n;
          p.t = t;
          p.alpha0 = cc.alpha0;
          p.threshold = th.value;
          p.achieved_pf = cc.alpha0;
          p.ci_low = p.ci_high = cc.alpha0;
          p.method = variant == EnergyVariance::corrected ? "analytic-corrected" : "analytic-printed";
          out.push_back(p);
        }
      }
    }
  }
  return out;
}

struct BoundsRun {
  std::vector<DistanceReport> reports;
  std::vector<RhoB> rho;  // diagonal-variant rho_B, one entry
  std::vector<std::string> warnings;
};

/// c:GA closed-form distances over the c_r list (averaged over
/// projection_seeds draws of A) and Monte Carlo distances of the
/// uncompressed approaches.
inline BoundsRun run_bounds(const ExperimentConfig& config) {
  config.scenario.validate();
  const auto& bc = config.bounds;
  const HypothesisStats stats = closed_form_stats(config.scenario);
  BoundsRun out;
  for (double c_r : bc.c_r) {
    if (!(c_r > 0.0 && c_r <= 1.0)) throw ConfigurationError("bounds: c_r must be in (0, 1]");
    const Index m = compressed_dim(config.scenario.n, c_r);
    const int reps = std::max(1, bc.projection_seeds);
    std::vector<double> d(static_cast<std::size_t>(reps));
    parallel_for(d.size(), config.threads, [&](std::size_t k) {
      const auto bp = make_block_projection(config.scenario.l(), m, config.scenario.n,
                                            derive_seed(config.seed, {seed_tag::kProjection, k, static_cast<std::uint64_t>(m)}));
      d[k] = bhatt_gaussian_compressed(stats, bp).d_b;
    });
    double mean = 0.0, sq = 0.0;
    for (double v : d) mean += v;
    mean /= reps;
    for (double v : d) sq += (v - mean) * (v - mean);
    DistanceReport r;
    r.approach = "c:GA";
    r.c_r = static_cast<double>(m) / static_cast<double>(config.scenario.n);
    r.d_b = mean;
    r.d_b_stderr = reps > 1 ? std::sqrt(sq / (reps - 1) / reps) : 0.0;
    r.p_ub = error_bound(r.d_b);
    r.method = reps > 1 ? "closed-form(mean of " + std::to_string(reps) + " projections)" : "closed-form";
    r.seed = config.seed;
    out.reports.push_back(r);
  }
  const ScenarioMarginals marg(config.scenario);
  for (const auto& name : bc.approaches) {
    const DetectorKind k = parse_detector(name);
    if (k == DetectorKind::u_product) {
      out.reports.push_back(bhatt_mc(McApproach::product, config.scenario, marg, std::nullopt, bc.trials,
                                     derive_seed(config.seed, {seed_tag::kBootstrap, 1}), config.threads));
    } else if (auto fam = copula_of(k)) {
      try {
        DetectorConfig dc;
        dc.kind = k;
        const DetectorEngine eng(config.scenario, dc, 1.0, 1, config.seed, true);
        out.reports.push_back(bhatt_mc(McApproach::copula, config.scenario, marg, eng.copula(), bc.trials,
                                       derive_seed(config.seed, {seed_tag::kBootstrap, 2}), config.threads));
      } catch (const FitError& e) {
        out.warnings.push_back(name + " skipped: " + e.what());
      }
    } else {
      throw ConfigurationError("bounds: approach '" + name + "' has no Bhattacharyya estimator");
    }
  }
  out.rho.push_back(rho_b(diagonal_moments(stats), config.scenario.n));
  return out;
}

struct TimingRow {
  std::string approach;
  long n = 0;
  long m = 0;
  double c_r = 1.0;
  long t = 1;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;
  long evals = 0;
};

/// Wall-clock seconds per decision statistic, warmup excluded. c:GA times
/// the statistic for a prebuilt model; c:GA-build times model construction
/// including the nested inversion.
inline std::vector<TimingRow> bench(const ExperimentConfig& config) {
  config.scenario.validate();
  const auto& bc = config.bench;
  if (bc.evals < 1) throw ConfigurationError("bench: evals must be >= 1");
  const ScenarioSpec& s = config.scenario;
  const Index n = s.n, l = s.l();
  std::vector<TimingRow> rows;
  using clock = std::chrono::steady_clock;
  volatile double sink = 0.0;

  auto time_it = [&](const std::string& name, Index m, Index t, auto&& fn) {
    for (long w = 0; w < bc.warmup; ++w) sink = sink + fn();
    std::vector<double> secs(static_cast<std::size_t>(bc.evals));
    for (auto& v : secs) {
      const auto t0 = clock::now();
      sink = sink + fn();
      v = std::chrono::duration<double>(clock::now() - t0).count();
    }
    double mean = 0.0, sq = 0.0;
    for (double v : secs) mean += v;
    mean /= static_cast<double>(secs.size());
    for (double v : secs) sq += (v - mean) * (v - mean);
    TimingRow r;
    r.approach = name;
    r.n = n;
    r.m = m;
    r.c_r = static_cast<double>(m) / static_cast<double>(n);
    r.t = t;
    r.mean_seconds = mean;
    r.std_seconds = secs.size() > 1 ? std::sqrt(sq / static_cast<double>(secs.size() - 1)) : 0.0;
    r.evals = bc.evals;
    rows.push_back(r);
  };

  const std::uint64_t bench_seed = derive_seed(config.seed, {seed_tag::kBench});
  for (const auto& name : bc.approaches) {
    const bool build_variant = [&] {
      std::string low = name;
      std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
      return low == "c:ga-build";
    }();
    DetectorConfig dc;
    dc.kind = build_variant ? DetectorKind::c_ga : parse_detector(name);
    const Index t = dc.kind == DetectorKind::c_cov ? std::max<Index>(2, config.t) : config.t;
    dc.t = t;
    const std::vector<double> ratios = is_compressed(dc.kind) ? bc.c_r : std::vector<double>{1.0};
    for (double c_r : ratios) {
      dc.c_r = {c_r};
      const DetectorEngine eng(s, dc, c_r, t, bench_seed, true);
      const MatrixXd x = eng.frames(0, Hypothesis::h1);
      if (!is_compressed(dc.kind)) {
        time_it(to_string(dc.kind), n, t, [&] { return eng.score_uncompressed(x); });
        continue;
      }
      const BlockProjection bp = eng.projection(0);
      const MatrixXd y = block_compress_frames(bp, x);
      if (dc.kind == DetectorKind::c_ga) {
        const HypothesisStats stats = closed_form_stats(s);
        if (build_variant) {
          time_it("c:GA-build", bp.m(), t, [&] { return build_gaussian_model(stats, bp).tau0; });
        } else {
          const GaussianModel g = build_gaussian_model(stats, bp);
          time_it("c:GA", bp.m(), t, [&] { return llr_ga_frames(y, g).value; });
        }
      } else {
        time_it(to_string(dc.kind), bp.m(), t, [&] { return eng.score_compressed(y, bp, nullptr); });
      }
    }
  }
  (void)l;
  return rows;
}

}  // namespace csfuse
