// Acceptance suite: one PASS/FAIL line per criterion, informational lines
// indented below it. Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csfuse/csfuse.hpp"

namespace {

using namespace csfuse;

constexpr std::uint64_t kSeed = 20230101;

unsigned g_threads = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;  // 0: no runtime budget
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void info(const std::string& s) { std::printf("      %s\n", s.c_str()); std::fflush(stdout); }

double binomial_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

double spread(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  return (*hi - *lo) / mean;
}

ScenarioSpec case2(Index n) {
  ScenarioSpec s;
  s.id = ScenarioId::case2;
  s.n = n;
  return s;
}

DetectorConfig detector(DetectorKind k, std::vector<double> c_r = {1.0}, std::optional<Index> t = std::nullopt) {
  DetectorConfig d;
  d.kind = k;
  d.c_r = std::move(c_r);
  d.t = t;
  return d;
}

double auc_of(const RocRun& run, const std::string& name, double c_r = 1.0) {
  for (const auto& c : run.curves)
    if (c.detector == name && std::abs(c.c_r - c_r) < 1e-9) return c.auc;
  throw Error("no curve for " + name);
}

MatrixXd random_matrix(Index r, Index c, Rng& rng) {
  std::normal_distribution<double> g;
  MatrixXd m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = g(rng);
  return m;
}

MatrixXd random_spd(Index d, Rng& rng) {
  const MatrixXd b = random_matrix(d, d, rng);
  return b * b.transpose() / static_cast<double>(d) + 0.5 * MatrixXd::Identity(d, d);
}

// log N(y; mu, c) through a dense LDLT, independent of the model's cached inverse.
double dense_log_density(const VectorXd& y, const VectorXd& mu, const MatrixXd& c) {
  Eigen::LDLT<MatrixXd> ldlt(c);
  const VectorXd r = y - mu;
  const double logdet = ldlt.vectorD().array().log().sum();
  return -0.5 * (r.dot(ldlt.solve(r)) + logdet + static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi));
}

// 1. Orthoprojector rows are orthonormal.
Outcome orthoprojectors() {
  Rng rng(derive_seed(kSeed, {1}));
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Index n = 1 + static_cast<Index>(rng() % 512);
    const Index m = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(n));
    const Projection p = make_orthoprojector(m, n, rng());
    const MatrixXd g = p.entries() * p.entries().transpose() - MatrixXd::Identity(m, m);
    worst = std::max(worst, g.cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-10, fmt("max |AA^T - I| = %.3g over 1000 instances (limit 1e-10)", worst)};
}

// 2. Mean ||A D A^T||_F^2 / ||D||_F^2 against c_r^2 for the Case II H1 covariance.
Outcome frobenius_shrinkage() {
  const ScenarioSpec s = case2(1000);
  const HypothesisStats st = closed_form_stats(s);
  const double d_norm = static_cast<double>(s.n) * st.d1.scalars.squaredNorm();
  bool ok = true;
  std::string detail;
  for (double c_r : {0.1, 0.2, 0.5}) {
    const Index m = compressed_dim(s.n, c_r);
    std::vector<double> ratio(100);
    parallel_for(ratio.size(), g_threads, [&](std::size_t k) {
      const auto bp = make_block_projection(s.l(), m, s.n, derive_seed(kSeed, {2, k, static_cast<std::uint64_t>(m)}));
      ratio[k] = compress_stats(bp, st.beta1, st.d1).c.squaredNorm() / d_norm;
    });
    double mean = 0.0;
    for (double r : ratio) mean += r;
    mean /= static_cast<double>(ratio.size());
    const double rel = mean / (c_r * c_r);
    ok = ok && std::abs(rel - 1.0) <= 0.2;
    info(fmt("c_r = %.1f: mean ratio %.5f, c_r^2 = %.4f, ratio / c_r^2 = %.3f, ratio / c_r = %.4f", c_r, mean,
             c_r * c_r, rel, mean / c_r));
    detail += fmt("%s%.2f", detail.empty() ? "ratio / c_r^2 = " : ", ", rel);
  }
  return {ok, detail + " (need within [0.8, 1.2])"};
}

// 3. GA log-likelihood ratio against dense log densities; nested against dense inverse.
Outcome ga_oracle() {
  Rng rng(derive_seed(kSeed, {3}));
  double worst_llr = 0.0, worst_inv = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Index l = 1 + static_cast<Index>(rng() % 4);
    const Index m = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(128 / l));
    const Index d = l * m;
    const MatrixXd c0 = random_spd(d, rng), c1 = random_spd(d, rng);
    const VectorXd mu0 = random_matrix(d, 1, rng), mu1 = random_matrix(d, 1, rng);
    const VectorXd y = random_matrix(d, 1, rng) * 1.5;
    const GaussianModel g = make_gaussian_model(mu0, c0, mu1, c1, m);
    const double want = dense_log_density(y, mu1, c1) - dense_log_density(y, mu0, c0);
    worst_llr = std::max(worst_llr, std::abs(llr_ga(y, g).value - want));
    const MatrixXd dense_inv = c0.partialPivLu().inverse();
    worst_inv = std::max(worst_inv, (nested_block_inverse(c0, m).inverse - dense_inv).cwiseAbs().maxCoeff());
  }
  return {worst_llr <= 1e-8 && worst_inv <= 1e-8,
          fmt("max |llr - oracle| = %.3g, max |nested - dense inverse| = %.3g over 1000 models (limit 1e-8)",
              worst_llr, worst_inv)};
}

// 4. Case II ROC ordering over 10 master seeds.
Outcome roc_reproduction() {
  int held = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ExperimentConfig c;
    c.scenario = case2(1000);
    c.detectors = {detector(DetectorKind::c_ga, {0.1, 0.2, 0.5}), detector(DetectorKind::u_product),
                   detector(DetectorKind::u_copula_gaussian)};
    c.trials = 1000;
    c.seed = seed;
    c.threads = g_threads;
    c.fixed_projection = true;
    const RocRun run = run_roc(c);
    const double g1 = auc_of(run, "c:GA", 0.1), g2 = auc_of(run, "c:GA", 0.2), g5 = auc_of(run, "c:GA", 0.5);
    const double prod = auc_of(run, "u:product"), cop = auc_of(run, "u:copula-gaussian");
    const bool ok = g5 > g1 - 0.02 && g2 > prod && g5 > prod && cop >= prod;
    held += ok;
    info(fmt("seed %2llu: c:GA(0.1) %.4f c:GA(0.2) %.4f c:GA(0.5) %.4f u:product %.4f u:copula-gaussian %.4f %s",
             static_cast<unsigned long long>(seed), g1, g2, g5, prod, cop, ok ? "holds" : "violated"));
  }
  return {held >= 9, fmt("ordering holds on %d of 10 seeds (need >= 9)", held)};
}

// 5. Bhattacharyya ordering and error bound of c:GA against u:product.
Outcome bhattacharyya_ordering() {
  ExperimentConfig c;
  c.scenario = case2(1000);
  c.seed = kSeed;
  c.threads = g_threads;
  c.bounds.c_r = {0.1, 0.2, 0.3, 0.5, 0.7, 1.0};
  c.bounds.trials = 10000;
  c.bounds.approaches = {"u:product"};
  const BoundsRun run = run_bounds(c);
  const DistanceReport& prod = run.reports.back();
  info(fmt("u:product D_B = %.4f (SE %.4f), P_ub = %.3g", prod.d_b, prod.d_b_stderr, prod.p_ub));
  bool dominates = true, below = false, stays_below = true;
  for (std::size_t k = 0; k + 1 < run.reports.size(); ++k) {
    const DistanceReport& r = run.reports[k];
    if (r.c_r >= 0.2 - 1e-12) dominates = dominates && r.d_b > prod.d_b + 3.0 * prod.d_b_stderr;
    if (below && r.p_ub >= 1e-3) stays_below = false;
    below = below || r.p_ub < 1e-3;
    const Recommendation rec = compare_rule({r, prod}, 1e-3);
    info(fmt("c:GA c_r = %.1f: D_B = %.4f, P_ub = %.3g; dominates by 3 SE: %s; meets 1e-3 target (D_B >= %.3f): %s",
             r.c_r, r.d_b, r.p_ub, rec.entries[0].dominated_3se ? "yes" : "no", rec.target,
             rec.meets_target ? "yes" : "no"));
  }
  return {dominates && below && stays_below,
          fmt("c:GA > u:product + 3 SE for c_r >= 0.2: %s; P_ub falls below 1e-3 and stays: %s",
              dominates ? "yes" : "no", below && stays_below ? "yes" : "no")};
}

// 6. Compressed distance of the diagonal Case I setting is M times the
// per-dimension form.
Outcome proposition_one() {
  ScenarioSpec s;
  s.id = ScenarioId::case1;
  s.n = 1000;
  s.params.lambda1 = 0.5;
  HypothesisStats st = closed_form_stats(s);
  for (Index j = 0; j < st.l(); ++j)
    for (Index k = 0; k < st.l(); ++k)
      if (j != k) st.d0.scalars(j, k) = st.d1.scalars(j, k) = 0.0;
  const RhoB rho = rho_b(diagonal_moments(st), s.n);
  const double per_dim = rho.corrected / static_cast<double>(s.n);
  bool ok = true;
  std::string detail;
  for (double c_r : {0.1, 0.5}) {
    const Index m = compressed_dim(s.n, c_r);
    std::vector<double> d(32);
    parallel_for(d.size(), g_threads, [&](std::size_t k) {
      d[k] = bhatt_gaussian_compressed(st, make_block_projection(s.l(), m, s.n, derive_seed(kSeed, {6, k, static_cast<std::uint64_t>(m)}))).d_b;
    });
    double mean = 0.0;
    for (double v : d) mean += v;
    mean /= static_cast<double>(d.size());
    const double want = static_cast<double>(m) * per_dim;
    const double rel = std::abs(mean / want - 1.0);
    ok = ok && rel <= 0.02;
    info(fmt("c_r = %.1f: mean D_B over 32 projections %.6f, M * per-dimension %.6f, rel. error %.4f", c_r, mean, want, rel));
    detail += fmt("%srel. error %.4f at c_r %.1f", detail.empty() ? "" : ", ", rel, c_r);
  }
  std::vector<double> ms, ds;
  for (int k = 1; k <= 10; ++k) {
    const Index m = compressed_dim(s.n, 0.1 * k);
    ms.push_back(static_cast<double>(m));
    ds.push_back(bhatt_gaussian_compressed(st, make_block_projection(s.l(), m, s.n, derive_seed(kSeed, {61, static_cast<std::uint64_t>(k)}))).d_b);
  }
  const double mx = std::accumulate(ms.begin(), ms.end(), 0.0) / 10.0, my = std::accumulate(ds.begin(), ds.end(), 0.0) / 10.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (int k = 0; k < 10; ++k) {
    sxy += (ms[k] - mx) * (ds[k] - my);
    sxx += (ms[k] - mx) * (ms[k] - mx);
    syy += (ds[k] - my) * (ds[k] - my);
  }
  const double r2 = sxy * sxy / (sxx * syy);
  ok = ok && r2 >= 0.999;
  info(fmt("slope %.6f per unit M (per-dimension corrected form %.6f), R^2 = %.6f", sxy / sxx, per_dim, r2));
  info(fmt("printed variant for this setting: %.6f (corrected %.6f)", rho.printed, rho.corrected));
  const SensorMoments unit{1.0, 1.0, 0.0, 0.0};
  const RhoB same = rho_b({unit}, s.n);
  info(fmt("identical hypotheses, unit variance, N = %ld: printed %.6f (= N/2 log 2), corrected %.3g",
           static_cast<long>(s.n), same.printed, same.corrected));
  return {ok, detail + fmt(", R^2 = %.6f (need <= 0.02 and >= 0.999)", r2)};
}

// Dense vectorized least squares for the off-diagonal recovery.
VectorXd dense_ls(const MatrixXd& c, const BlockProjection& bp, const OffDiagEstimate& est, double& cond) {
  MatrixXd a = MatrixXd::Zero(bp.rows(), bp.cols());
  for (Index j = 0; j < bp.l(); ++j) a.block(j * bp.m(), j * bp.n(), bp.m(), bp.n()) = bp.block(j).entries();
  const Index ml = a.rows(), nl = a.cols(), groups = static_cast<Index>(est.group_size.size());
  MatrixXd design = MatrixXd::Zero(ml * ml, groups);
  for (Index g = 0; g < groups; ++g) {
    MatrixXd s = MatrixXd::Zero(nl, nl);
    for (std::size_t k = 0; k < est.pairs.size(); ++k) {
      if (est.group_of[k] != g) continue;
      s(est.pairs[k].i, est.pairs[k].j) = 1.0;
      s(est.pairs[k].j, est.pairs[k].i) = 1.0;
    }
    const MatrixXd col = a * s * a.transpose();
    design.col(g) = Eigen::Map<const VectorXd>(col.data(), ml * ml);
  }
  Eigen::JacobiSVD<MatrixXd> svd(design);
  const auto sv = svd.singularValues();
  cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  return design.colPivHouseholderQr().solve(Eigen::Map<const VectorXd>(c.data(), ml * ml));
}

OffDiagEstimate grouping(const std::vector<IndexPair>& pairs, TieMode tie, Index n) {
  OffDiagEstimate g;
  g.pairs = pairs;
  std::map<std::pair<Index, Index>, Index> ids;
  for (const auto& p : pairs) {
    Index id = 0;
    if (tie == TieMode::none) {
      id = static_cast<Index>(g.group_size.size());
    } else if (tie == TieMode::per_block_pair) {
      id = ids.emplace(std::make_pair(p.i / n, p.j / n), static_cast<Index>(ids.size())).first->second;
    }
    if (id == static_cast<Index>(g.group_size.size())) g.group_size.push_back(0);
    ++g.group_size[static_cast<std::size_t>(id)];
    g.group_of.push_back(id);
  }
  return g;
}

Outcome ls_oracle_suite(int& compared) {
  Rng rng(derive_seed(kSeed, {71}));
  double worst = 0.0;
  int mismatched_throw = 0, skipped = 0;
  compared = 0;
  for (int k = 0; k < 200; ++k) {
    const Index l = 2 + static_cast<Index>(rng() % 2);
    const Index n = 2 + static_cast<Index>(rng() % static_cast<std::uint64_t>(64 / l - 1));
    const Index m = 1 + static_cast<Index>(rng() % static_cast<std::uint64_t>(n));
    const BlockProjection bp = make_block_projection(l, m, n, rng());
    const MatrixXd c = random_spd(m * l, rng);
    const auto pairs = all_cross_pairs(n, l);
    for (TieMode tie : {TieMode::none, TieMode::shared, TieMode::per_block_pair}) {
      OffDiagEstimate est;
      bool threw = false;
      try {
        est = ls_offdiag(c, bp, pairs, LsMode::exact, tie);
      } catch (const LeastSquaresError&) {
        threw = true;
      }
      if (threw) {
        // A singular report must agree with the oracle's conditioning.
        double cond = 0.0;
        dense_ls(c, bp, grouping(pairs, tie, n), cond);
        if (cond < 1e8) ++mismatched_throw;
        ++skipped;
        continue;
      }
      double cond = 0.0;
      const VectorXd oracle = dense_ls(c, bp, est, cond);
      if (!(cond < 1e8)) {
        ++skipped;
        continue;
      }
      worst = std::max(worst, (est.d_hat - oracle).cwiseAbs().maxCoeff());
      ++compared;
    }
  }
  info(fmt("LS exact mode vs dense oracle: %d solvable instances, max |diff| = %.3g; %d rank-deficient skipped, %d "
           "spurious singular reports",
           compared, worst, skipped, mismatched_throw));
  return {worst <= 1e-8 && mismatched_throw == 0 && compared > 0, fmt("LS max |diff| %.3g", worst)};
}

// 7. c:Cov against the energy detectors, T sweep and the LS oracle.
Outcome cov_suite() {
  int held = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ExperimentConfig c;
    c.scenario = case2(1000);
    c.detectors = {detector(DetectorKind::c_cov, {0.04}, 10), detector(DetectorKind::c_energy, {0.04}, 10),
                   detector(DetectorKind::u_energy, {1.0}, 10)};
    c.trials = 1000;
    c.seed = seed;
    c.threads = g_threads;
    const RocRun run = run_roc(c);
    const double cov = auc_of(run, "c:cov", 0.04), ce = auc_of(run, "c:energy", 0.04), ue = auc_of(run, "u:energy");
    const bool ok = cov > ce + 0.05 && cov > ue;
    held += ok;
    info(fmt("seed %2llu: c:cov %.4f c:energy %.4f u:energy %.4f %s", static_cast<unsigned long long>(seed), cov, ce,
             ue, ok ? "holds" : "violated"));
  }
  ExperimentConfig sweep;
  sweep.scenario = case2(1000);
  sweep.trials = 1000;
  sweep.seed = kSeed;
  sweep.threads = g_threads;
  std::vector<double> aucs;
  for (Index t : {5, 10, 20}) {
    sweep.detectors = {detector(DetectorKind::c_cov, {0.04}, t)};
    aucs.push_back(run_roc(sweep).curves.front().auc);
  }
  const bool sweep_ok = aucs[1] >= aucs[0] - 0.02 && aucs[2] >= aucs[1] - 0.02;
  info(fmt("T sweep: AUC(5) %.4f AUC(10) %.4f AUC(20) %.4f %s", aucs[0], aucs[1], aucs[2],
           sweep_ok ? "non-decreasing within 0.02" : "decreasing"));
  int compared = 0;
  const Outcome ls = ls_oracle_suite(compared);
  return {held >= 9 && sweep_ok && ls.pass,
          fmt("ordering holds on %d of 10 seeds (need >= 9); T sweep %s; %s over %d instances", held,
              sweep_ok ? "ok" : "violated", ls.detail.c_str(), compared)};
}

// 8. Calibrated c:Cov threshold against analytic u:Energy threshold over the (a0, 1/lambda0) grid.
Outcome threshold_robustness() {
  ExperimentConfig c;
  c.scenario = case2(1000);
  c.seed = kSeed;
  c.threads = g_threads;
  c.calibrate.detector = detector(DetectorKind::c_cov, {0.04}, 10);
  c.calibrate.alpha0 = 0.05;
  c.calibrate.trials = 1000;
  c.calibrate.a0_grid = {8, 9, 10, 11, 12};
  c.calibrate.inv_lambda0_grid = {8, 9, 10, 11, 12};
  const auto pts = calibrate_grid(c);
  std::vector<double> cov, energy, printed;
  for (const auto& p : pts) {
    if (p.method == "simulation") cov.push_back(p.threshold);
    if (p.method == "analytic-corrected") energy.push_back(p.threshold);
    if (p.method == "analytic-printed") printed.push_back(p.threshold);
  }
  const double sc = spread(cov), se = spread(energy);
  info(fmt("c:cov thresholds in [%.5f, %.5f]; u:energy corrected in [%.1f, %.1f]; printed-variance spread %.3f",
           *std::min_element(cov.begin(), cov.end()), *std::max_element(cov.begin(), cov.end()),
           *std::min_element(energy.begin(), energy.end()), *std::max_element(energy.begin(), energy.end()),
           spread(printed)));
  return {cov.size() == 25 && sc <= 0.1 && se >= 0.3,
          fmt("c:cov spread %.4f (need <= 0.1), u:energy spread %.4f (need >= 0.3)", sc, se)};
}

// 9. Empirical false-alarm rate at the analytic energy thresholds.
Outcome energy_calibration() {
  const ScenarioSpec s = case2(1000);
  const Index t = 10;
  const long trials = 10000;
  const DetectorEngine eng(s, detector(DetectorKind::c_energy, {0.04}, t), 0.04, t, derive_seed(kSeed, {9}), false);
  std::vector<double> u(trials), c(trials);
  parallel_for(static_cast<std::size_t>(trials), g_threads, [&](std::size_t k) {
    const MatrixXd x = eng.frames(k, Hypothesis::h0);
    u[k] = energy_stat(x).value;
    c[k] = energy_stat(block_compress_frames(eng.projection(k), x)).value;
  });
  auto pf = [&](const std::vector<double>& v, double tau) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [&](double x) { return x > tau; })) /
           static_cast<double>(v.size());
  };
  bool ok = true;
  std::string detail;
  for (double alpha : {0.01, 0.05, 0.1}) {
    const double tol = 3.0 * binomial_sigma(alpha, static_cast<double>(trials));
    const auto tu = energy_threshold(Domain::uncompressed, alpha, s.params.lambda0, s.params.a0, s.n, t);
    const auto tc = energy_threshold(Domain::compressed, alpha, s.params.lambda0, s.params.a0, eng.m(), t);
    const auto pu = energy_threshold(Domain::uncompressed, alpha, s.params.lambda0, s.params.a0, s.n, t,
                                     EnergyVariance::printed);
    const auto pc = energy_threshold(Domain::compressed, alpha, s.params.lambda0, s.params.a0, eng.m(), t,
                                     EnergyVariance::printed);
    const double fu = pf(u, tu.value), fc = pf(c, tc.value);
    const bool hu = std::abs(fu - alpha) <= tol, hc = std::abs(fc - alpha) <= tol;
    ok = ok && hu && hc;
    info(fmt("alpha %.2f (3 sigma %.4f): u:energy Pf %.4f %s, c:energy Pf %.4f %s; printed variance: u %.4f, c %.4f",
             alpha, tol, fu, hu ? "ok" : "out", fc, hc ? "ok" : "out", pf(u, pu.value), pf(c, pc.value)));
    detail += fmt("%sa=%.2f u %.4f c %.4f", detail.empty() ? "Pf at corrected threshold: " : "; ", alpha, fu, fc);
  }
  return {ok, detail};
}

// 10. Timing trends.
Outcome timing_trends() {
  ExperimentConfig c;
  c.scenario.id = ScenarioId::example2;
  c.scenario.n = 1000;
  c.seed = kSeed;
  c.bench.approaches = {"c:GA"};
  c.bench.c_r = {0.1, 0.2, 0.5};
  c.bench.evals = 1000;
  c.bench.warmup = 20;
  const auto ga = bench(c);
  c.bench.approaches = {"u:product"};
  c.bench.evals = 10;
  c.bench.warmup = 1;
  const auto prod = bench(c);
  bool increasing = true;
  for (std::size_t k = 0; k < ga.size(); ++k) {
    info(fmt("c:GA c_r = %.1f: %.3g s (sd %.2g)", ga[k].c_r, ga[k].mean_seconds, ga[k].std_seconds));
    if (k > 0) increasing = increasing && ga[k].mean_seconds > ga[k - 1].mean_seconds;
  }
  info(fmt("u:product: %.3g s (sd %.2g)", prod[0].mean_seconds, prod[0].std_seconds));
  const bool faster = ga[0].mean_seconds < prod[0].mean_seconds;
  return {increasing && faster, fmt("c:GA strictly increasing in c_r: %s; c:GA(0.1) faster than u:product: %s (%.2fx)",
                                    increasing ? "yes" : "no", faster ? "yes" : "no",
                                    prod[0].mean_seconds / ga[0].mean_seconds)};
}

// 11. Byte-identical CSV across repeated runs and thread counts.
Outcome determinism() {
  ExperimentConfig c;
  c.scenario = case2(200);
  c.detectors = {detector(DetectorKind::c_ga, {0.1, 0.5}),       detector(DetectorKind::u_product),
                 detector(DetectorKind::u_copula_gaussian),      detector(DetectorKind::c_cov, {0.1}, 4),
                 detector(DetectorKind::c_energy, {0.1}, 4),     detector(DetectorKind::u_energy, {1.0}, 4)};
  c.trials = 200;
  c.seed = kSeed;
  auto csv = [&](unsigned threads) {
    c.threads = threads;
    const RocRun run = run_roc(c);
    std::ostringstream os;
    write_roc_csv(os, run.curves);
    write_auc_csv(os, run.curves);
    return os.str();
  };
  const std::string a = csv(1), b = csv(1), p = csv(8);
  return {a == b && a == p && !a.empty(), fmt("repeat run identical: %s; threads 1 vs 8 identical: %s (%zu bytes)",
                                              a == b ? "yes" : "no", a == p ? "yes" : "no", a.size())};
}

// 12. Ingest pipeline on synthetic data.
Outcome ingest_pipeline() {
  // Framing consumes the prefix without loss.
  const ScenarioSpec big = case2(100000);
  const VectorXd x = sample(big, Hypothesis::h1, derive_seed(kSeed, {12}));
  const std::vector<double> series(x.data(), x.data() + big.n);
  const SplitFrames f = frame_and_split(series, 100, 300, 600, Hypothesis::h1);
  bool lossless = f.train.count() == 300 && f.test.count() == 600;
  for (Index k = 0; k < 90000 && lossless; ++k) {
    const FrameSet& fs = k < 30000 ? f.train : f.test;
    const Index j = k < 30000 ? k : k - 30000;
    lossless = fs.frames(j % 100, j / 100) == series[static_cast<std::size_t>(k)] - f.removed_mean;
  }
  info(fmt("framing 90000 samples into 300 + 600 frames of 100: %s", lossless ? "lossless" : "MISMATCH"));

  // Synthetic consistency: one series per sensor holding H0 then H1 frames,
  // centered as a whole, KDE marginals from the training frames.
  const ScenarioSpec s = case2(100);
  const Index n = s.n, l = s.l(), n_tr = 10000, n_mont = 1000, per = n_tr + n_mont;
  std::vector<std::vector<double>> sensor_series(static_cast<std::size_t>(l), std::vector<double>(static_cast<std::size_t>(2 * per * n)));
  parallel_for(static_cast<std::size_t>(2 * per), g_threads, [&](std::size_t fidx) {
    const Hypothesis h = static_cast<Index>(fidx) < per ? Hypothesis::h0 : Hypothesis::h1;
    const VectorXd v = sample(s, h, derive_seed(kSeed, {121, fidx}));
    for (Index j = 0; j < l; ++j)
      for (Index t = 0; t < n; ++t) sensor_series[static_cast<std::size_t>(j)][fidx * static_cast<std::size_t>(n) + static_cast<std::size_t>(t)] = v(j * n + t);
  });
  std::vector<SplitFrames> framed;
  for (Index j = 0; j < l; ++j)
    framed.push_back(frame_and_split(sensor_series[static_cast<std::size_t>(j)], n, 2 * per, 0, Hypothesis::h0, false));
  auto cols = [&](Index j, Index first, Index count) {
    FrameSet fs;
    fs.frames = framed[static_cast<std::size_t>(j)].train.frames.middleCols(first, count);
    return fs;
  };
  const ScenarioMarginals exact(s);
  std::vector<double> e0(n_mont), e1(n_mont);
  std::vector<std::vector<FrameSet>> test(2);
  for (Index j = 0; j < l; ++j) {
    test[0].push_back(cols(j, n_tr, n_mont));
    test[1].push_back(cols(j, per + n_tr, n_mont));
  }
  const MatrixXd y0 = stack_sensors(test[0]), y1 = stack_sensors(test[1]);
  VectorXd offset(n * l);
  for (Index j = 0; j < l; ++j) offset.segment(j * n, n).setConstant(framed[static_cast<std::size_t>(j)].removed_mean);
  for (Index k = 0; k < n_mont; ++k) {
    e0[static_cast<std::size_t>(k)] = llr_product(VectorXd(y0.col(k) + offset), exact).value;
    e1[static_cast<std::size_t>(k)] = llr_product(VectorXd(y1.col(k) + offset), exact).value;
  }
  const double auc_exact = make_roc(e0, e1).auc;
  double gap = 1.0, worst_norm = 0.0;
  for (Index tr : {Index{100}, Index{1000}, n_tr}) {
    std::vector<Kde> k0, k1;
    for (Index j = 0; j < l; ++j) {
      k0.push_back(kde_fit(cols(j, n_tr - tr, tr)));
      k1.push_back(kde_fit(cols(j, per + n_tr - tr, tr)));
    }
    const KdeMarginals kde(k0, k1);
    std::vector<double> s0(n_mont), s1(n_mont);
    parallel_for(static_cast<std::size_t>(n_mont), g_threads, [&](std::size_t k) {
      s0[k] = llr_product(y0.col(static_cast<Index>(k)), kde).value;
      s1[k] = llr_product(y1.col(static_cast<Index>(k)), kde).value;
    });
    gap = std::abs(make_roc(s0, s1).auc - auc_exact);
    for (const auto* ks : {&k0, &k1})
      for (const Kde& k : *ks) {
        const int steps = 20000;
        const double dx = (k.hi() - k.lo()) / steps;
        double area = 0.0;
        for (int g = 0; g < steps; ++g) area += k.pdf(k.lo() + (g + 0.5) * dx) * dx;
        worst_norm = std::max({worst_norm, std::abs(area - 1.0), k.cdf(k.lo()), 1.0 - k.cdf(k.hi())});
      }
    info(fmt("training frames %5ld: KDE u:product AUC %.4f vs closed-form %.4f, gap %.4f", static_cast<long>(tr),
             make_roc(s0, s1).auc, auc_exact, gap));
  }
  info(fmt("worst KDE normalization error %.3g", worst_norm));
  return {lossless && worst_norm <= 1e-3 && gap <= 0.03,
          fmt("framing %s, KDE normalization %.2g (need <= 1e-3), AUC gap at 10^4 frames %.4f (need <= 0.03)",
              lossless ? "lossless" : "lossy", worst_norm, gap)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"csfuse acceptance suite"};
  std::vector<int> only;
  app.add_option("--threads", g_threads, "worker threads")->check(CLI::Range(1u, 256u));
  app.add_option("--only", only, "criterion numbers to run");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all = {
      {1, "orthoprojector suite", 10, orthoprojectors},
      {2, "Frobenius shrinkage", 30, frobenius_shrinkage},
      {3, "GA-LLR oracle equivalence", 30, ga_oracle},
      {4, "Case II ROC reproduction", 600, roc_reproduction},
      {5, "Bhattacharyya ordering", 300, bhattacharyya_ordering},
      {6, "compressed distance consistency", 60, proposition_one},
      {7, "c:Cov suite", 600, cov_suite},
      {8, "threshold robustness", 600, threshold_robustness},
      {9, "energy-threshold calibration", 120, energy_calibration},
      {10, "timing trends", 300, timing_trends},
      {11, "determinism", 0, determinism},
      {12, "ingest pipeline", 300, ingest_pipeline},
  };
  const std::set<int> wanted(only.begin(), only.end());
  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    std::printf("[%d] %s\n", c.id, c.name.c_str());
    std::fflush(stdout);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt("%.1f s", secs);
    if (c.budget_s > 0) {
      timing += fmt(" of %.0f s budget", c.budget_s);
      if (secs > c.budget_s) {
        o.pass = false;
        timing += ", over budget";
      }
    }
    failed += !o.pass;
    std::printf("%s [%d] %s: %s (%s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
