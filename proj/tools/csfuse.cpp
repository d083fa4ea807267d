// csfuse command-line driver: gen, roc, calibrate, bounds, bench, ingest.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "csfuse/csfuse.hpp"

namespace {

using namespace csfuse;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  bool fixed_projection = false;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  app->add_option("--seed", f.seed, "master seed (overrides config)");
  app->add_option("--out", f.out, "output directory (overrides config)");
  app->add_option("--threads", f.threads, "worker threads (overrides config)")->check(CLI::PositiveNumber);
  app->add_flag("--fixed-projection", f.fixed_projection, "draw one projection per M instead of one per trial");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.output_dir = *f.out;
  if (f.threads) c.threads = *f.threads;
  if (f.fixed_projection) c.fixed_projection = true;
  return c;
}

std::pair<long, long> parse_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw ConfigurationError("range '" + s + "' must look like a:b");
  const long a = std::stol(s.substr(0, colon)), b = std::stol(s.substr(colon + 1));
  if (a < 0 || b <= a) throw ConfigurationError("range '" + s + "' must satisfy 0 <= a < b");
  return {a, b};
}

int cmd_gen(const CommonFlags& f, const std::string& hyp, long count) {
  const ExperimentConfig c = resolve(f);
  c.scenario.validate();
  std::vector<Hypothesis> hs;
  if (hyp == "h0" || hyp == "both") hs.push_back(Hypothesis::h0);
  if (hyp == "h1" || hyp == "both") hs.push_back(Hypothesis::h1);
  if (hs.empty()) throw ConfigurationError("--hyp must be h0, h1 or both");
  const Index n = c.scenario.n, l = c.scenario.l();
  for (Hypothesis h : hs) {
    const std::string name = std::string("gen_") + (h == Hypothesis::h0 ? "h0" : "h1") + ".csv";
    emit_file(c.output_dir, name, [&](std::ostream& os) {
      os << "trial,t";
      for (Index j = 0; j < l; ++j) os << ",sensor" << j;
      os << '\n';
      VectorXd x(n * l);
      for (long trial = 0; trial < count; ++trial) {
        Rng rng(derive_seed(c.seed, {hypothesis_tag(h), static_cast<std::uint64_t>(trial), 0}));
        sample_into(c.scenario, h, rng, x);
        for (Index t = 0; t < n; ++t) {
          os << trial << ',' << t;
          for (Index j = 0; j < l; ++j) os << ',' << fmt_num(x(j * n + t));
          os << '\n';
        }
      }
    });
    std::cout << "wrote " << c.output_dir << "/" << name << "\n";
  }
  return 0;
}

int cmd_roc(const CommonFlags& f) {
  ExperimentConfig c = resolve(f);
  if (c.detectors.empty()) {
    DetectorConfig ga;
    ga.kind = DetectorKind::c_ga;
    ga.c_r = {0.1, 0.2, 0.5};
    DetectorConfig prod;
    prod.kind = DetectorKind::u_product;
    c.detectors = {ga, prod};
  }
  const RocRun run = run_roc(c);
  for (const auto& w : run.warnings) std::cerr << "warning: " << w << "\n";
  emit_file(c.output_dir, "roc.csv", [&](std::ostream& os) { write_roc_csv(os, run.curves); });
  emit_file(c.output_dir, "auc.csv", [&](std::ostream& os) { write_auc_csv(os, run.curves); });
  emit_file(c.output_dir, "roc.svg", [&](std::ostream& os) { write_roc_svg(os, run.curves, to_string(c.scenario.id)); });
  for (const auto& r : run.curves)
    std::printf("%-20s M=%-5ld c_r=%-6.3g T=%-3ld AUC=%.4f\n", r.detector.c_str(), r.m, r.c_r, r.t, r.auc);
  return 0;
}

int cmd_calibrate(const CommonFlags& f) {
  const ExperimentConfig c = resolve(f);
  const auto pts = calibrate_grid(c);
  emit_file(c.output_dir, "calibration.csv", [&](std::ostream& os) { write_calibration_csv(os, pts); });
  emit_file(c.output_dir, "thresholds.svg", [&](std::ostream& os) { write_threshold_svg(os, pts); });
  for (const auto& p : pts)
    std::printf("%-10s %-18s a0=%-6g 1/lambda0=%-6g threshold=%.6g pf=%.4f [%.4f, %.4f]\n", p.detector.c_str(),
                p.method.c_str(), p.a0, p.inv_lambda0, p.threshold, p.achieved_pf, p.ci_low, p.ci_high);
  return 0;
}

int cmd_bounds(const CommonFlags& f) {
  const ExperimentConfig c = resolve(f);
  const BoundsRun run = run_bounds(c);
  for (const auto& w : run.warnings) std::cerr << "warning: " << w << "\n";
  emit_file(c.output_dir, "bounds.csv", [&](std::ostream& os) { write_bounds_csv(os, run.reports); });
  for (const auto& r : run.reports)
    std::printf("%-20s c_r=%-6.3g D_B=%.6g (se %.2g) P_ub=%.4g %s\n", r.approach.c_str(), r.c_r, r.d_b, r.d_b_stderr,
                r.p_ub, r.method.c_str());
  std::vector<DistanceReport> uncompressed;
  for (const auto& r : run.reports)
    if (r.approach != "c:GA") uncompressed.push_back(r);
  for (const auto& r : run.reports) {
    if (r.approach != "c:GA") continue;
    std::vector<DistanceReport> set{r};
    set.insert(set.end(), uncompressed.begin(), uncompressed.end());
    const Recommendation rec = compare_rule(set, c.bounds.epsilon_b);
    std::printf("c_r=%-6.3g meets -log(2 eps_B)=%.4g: %s", r.c_r, rec.target, rec.meets_target ? "yes" : "no");
    for (const auto& e : rec.entries)
      std::printf("; beats %s: %s%s", e.approach.c_str(), e.dominated ? "yes" : "no", e.dominated_3se ? " (3 SE)" : "");
    std::printf("\n");
  }
  for (const auto& rho : run.rho)
    std::printf("diagonal-variant rho_B: corrected=%.6g printed=%.6g\n", rho.corrected, rho.printed);
  return 0;
}

int cmd_bench(const CommonFlags& f) {
  const ExperimentConfig c = resolve(f);
  const auto rows = bench(c);
  emit_file(c.output_dir, "timing.csv", [&](std::ostream& os) { write_timing_csv(os, rows); });
  for (const auto& r : rows)
    std::printf("%-20s N=%-5ld M=%-5ld T=%-3ld %.3e s (sd %.1e, %ld evals)\n", r.approach.c_str(), r.n, r.m, r.t,
                r.mean_seconds, r.std_seconds, r.evals);
  return 0;
}

struct IngestFlags {
  std::string input;
  std::string format = "csv-column";
  std::string column;
  long frame_size = 0;
  long train = 0;
  long test = 0;
  std::string label = "h0";
  std::string h0_range;
  std::string h1_range;
  bool test_only = false;
  double sample_rate = 0.0;
};

int cmd_ingest(const CommonFlags& f, const IngestFlags& g) {
  const std::string out_dir = f.out.value_or("out");
  const Hypothesis label = g.label == "h1" ? Hypothesis::h1 : Hypothesis::h0;
  if (g.label != "h0" && g.label != "h1") throw ConfigurationError("--label must be h0 or h1");
  std::vector<double> series = load_series(g.input, parse_series_format(g.format), g.column);
  const std::string& range = label == Hypothesis::h0 ? g.h0_range : g.h1_range;
  if (!range.empty()) {
    const auto [a, b] = parse_range(range);
    if (static_cast<std::size_t>(b) > series.size())
      throw InsufficientDataError("range end " + std::to_string(b) + " beyond series length " + std::to_string(series.size()));
    series = std::vector<double>(series.begin() + a, series.begin() + b);
  }
  const SplitFrames split = frame_and_split(series, g.frame_size, g.train, g.test, label, g.test_only, g.input, g.sample_rate);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "'");
  const std::string base = out_dir + "/frames_" + g.label;
  if (split.train.count() > 0) write_frameset(base + "_train.bin", split.train);
  write_frameset(base + "_test.bin", split.test);
  std::printf("N=%ld train=%ld test=%ld removed_mean=%.17g -> %s_{train,test}.bin\n", g.frame_size,
              static_cast<long>(split.train.count()), static_cast<long>(split.test.count()), split.removed_mean, base.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive-sensing detection of dependent multimodal data"};
  app.require_subcommand(1);

  CommonFlags gen_f, roc_f, cal_f, bnd_f, bench_f, ing_f;
  std::string gen_hyp = "both";
  long gen_count = 1;
  auto* gen = app.add_subcommand("gen", "sample scenario data to CSV");
  add_common(gen, gen_f);
  gen->add_option("--hyp", gen_hyp, "h0, h1 or both");
  gen->add_option("--count", gen_count, "number of trials to dump")->check(CLI::PositiveNumber);

  auto* roc = app.add_subcommand("roc", "Monte Carlo ROC curves");
  add_common(roc, roc_f);
  auto* cal = app.add_subcommand("calibrate", "simulation-based thresholds over the (a0, 1/lambda0) grid");
  add_common(cal, cal_f);
  auto* bnd = app.add_subcommand("bounds", "Bhattacharyya distances and error bounds");
  add_common(bnd, bnd_f);
  auto* bch = app.add_subcommand("bench", "decision-statistic timing");
  add_common(bch, bench_f);

  IngestFlags ig;
  auto* ing = app.add_subcommand("ingest", "frame a time series into CSFUSE01 containers");
  add_common(ing, ing_f);
  ing->add_option("--input", ig.input, "series file")->required()->check(CLI::ExistingFile);
  ing->add_option("--format", ig.format, "csv-column or raw-float64-le");
  ing->add_option("--column", ig.column, "column name for csv-column");
  ing->add_option("--frame-size", ig.frame_size, "samples per frame N")->required()->check(CLI::PositiveNumber);
  ing->add_option("--train", ig.train, "training frames N_tr");
  ing->add_option("--test", ig.test, "test frames N_mont");
  ing->add_option("--label", ig.label, "h0 or h1");
  ing->add_option("--h0-range", ig.h0_range, "sample index range a:b used for h0");
  ing->add_option("--h1-range", ig.h1_range, "sample index range a:b used for h1");
  ing->add_flag("--test-only", ig.test_only, "allow --train 0");
  ing->add_option("--sample-rate", ig.sample_rate, "sample rate metadata in Hz");

  CLI11_PARSE(app, argc, argv);
  try {
    if (gen->parsed()) return cmd_gen(gen_f, gen_hyp, gen_count);
    if (roc->parsed()) return cmd_roc(roc_f);
    if (cal->parsed()) return cmd_calibrate(cal_f);
    if (bnd->parsed()) return cmd_bounds(bnd_f);
    if (bch->parsed()) return cmd_bench(bench_f);
    if (ing->parsed()) return cmd_ingest(ing_f, ig);
  } catch (const csfuse::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}
