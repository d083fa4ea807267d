#pragma once

// Time-series ingestion: loading, framing with a train/test split, Gaussian
// KDE marginals and empirical compressed-domain Gaussian models.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "csfuse/detectors.hpp"
#include "csfuse/error.hpp"
#include "csfuse/gaussian_model.hpp"
#include "csfuse/linops.hpp"
#include "csfuse/scenarios.hpp"

namespace csfuse {

static_assert(std::endian::native == std::endian::little, "raw float64 I/O assumes a little-endian host");

enum class SeriesFormat { csv_column, raw_f64_le };

inline SeriesFormat parse_series_format(const std::string& s) {
  if (s == "csv-column" || s == "csv") return SeriesFormat::csv_column;
  if (s == "raw-float64-le" || s == "raw") return SeriesFormat::raw_f64_le;
  throw ConfigurationError("unknown series format '" + s + "' (expected csv-column or raw-float64-le)");
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace detail

/// Reads one numeric series. csv-column needs a header row naming `column`.
inline std::vector<double> load_series(const std::string& path, SeriesFormat format, const std::string& column = "") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<double> out;
  if (format == SeriesFormat::raw_f64_le) {
    in.seekg(0, std::ios::end);
    const auto bytes = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    if (bytes % 8 != 0)
      throw ParseError("'" + path + "': size " + std::to_string(bytes) + " is not a multiple of 8 bytes", 0);
    out.resize(bytes / 8);
    in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(bytes));
    if (!in) throw IoError("read failed for '" + path + "'");
    for (std::size_t k = 0; k < out.size(); ++k)
      if (!std::isfinite(out[k]))
        throw ParseError("'" + path + "': non-finite value at sample " + std::to_string(k), 0);
    return out;
  }
  if (column.empty()) throw ConfigurationError("load_series: csv-column format needs a column name");
  std::string line;
  std::size_t lineno = 0;
  std::size_t col = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (!header) {
      auto it = std::find_if(fields.begin(), fields.end(), [&](const std::string& f) { return detail::trim(f) == column; });
      if (it == fields.end()) throw ParseError("'" + path + "': no column named '" + column + "'", lineno);
      col = static_cast<std::size_t>(it - fields.begin());
      header = true;
      continue;
    }
    if (col >= fields.size()) throw ParseError("'" + path + "': missing field '" + column + "'", lineno);
    const std::string f = detail::trim(fields[col]);
    double v = 0.0;
    std::size_t used = 0;
    try {
      v = std::stod(f, &used);
    } catch (const std::exception&) {
      throw ParseError("'" + path + "': cannot parse '" + f + "' as a number", lineno);
    }
    if (used != f.size()) throw ParseError("'" + path + "': trailing characters in '" + f + "'", lineno);
    if (!std::isfinite(v)) throw ParseError("'" + path + "': non-finite value '" + f + "'", lineno);
    out.push_back(v);
  }
  if (!header) throw ParseError("'" + path + "': empty file", 0);
  return out;
}

inline void write_series(const std::string& path, const std::vector<double>& series, SeriesFormat format,
                         const std::string& column = "value") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  if (format == SeriesFormat::raw_f64_le) {
    out.write(reinterpret_cast<const char*>(series.data()), static_cast<std::streamsize>(series.size() * 8));
  } else {
    out << column << '\n';
    char buf[40];
    for (double v : series) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << '\n';
    }
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

/// Equal-length frames of one sensor, one frame per column.
struct FrameSet {
  MatrixXd frames;  // N x count
  Hypothesis label = Hypothesis::h0;
  std::string source;
  double sample_rate = 0.0;

  Index n() const noexcept { return frames.rows(); }
  Index count() const noexcept { return frames.cols(); }
};

struct SplitFrames {
  FrameSet train;
  FrameSet test;
  double removed_mean = 0.0;
};

/// Removes the series mean, then takes n_tr training frames followed by
/// n_mont test frames of n samples each from the start of the series.
inline SplitFrames frame_and_split(const std::vector<double>& series, Index n, Index n_tr, Index n_mont,
                                   Hypothesis label, bool allow_empty_train = false, const std::string& source = "",
                                   double sample_rate = 0.0) {
  if (n < 1) throw ConfigurationError("frame_and_split: frame size must be >= 1");
  if (n_tr < 0 || n_mont < 0) throw ConfigurationError("frame_and_split: frame counts must be >= 0");
  if (n_tr == 0 && !allow_empty_train)
    throw ConfigurationError("frame_and_split: n_tr = 0 needs the test-only flag");
  const auto need = static_cast<std::size_t>(n) * static_cast<std::size_t>(n_tr + n_mont);
  if (series.size() < need)
    throw InsufficientDataError("frame_and_split: need " + std::to_string(need) + " samples (N * (n_tr + n_mont)), got " +
                                std::to_string(series.size()));
  if (series.empty()) throw InsufficientDataError("frame_and_split: empty series");
  long double acc = 0.0L;
  for (double v : series) acc += v;
  const double mean = static_cast<double>(acc / static_cast<long double>(series.size()));
  SplitFrames out;
  out.removed_mean = mean;
  auto fill = [&](FrameSet& fs, Index first, Index count) {
    fs.frames.resize(n, count);
    fs.label = label;
    fs.source = source;
    fs.sample_rate = sample_rate;
    for (Index f = 0; f < count; ++f)
      for (Index t = 0; t < n; ++t) fs.frames(t, f) = series[static_cast<std::size_t>((first + f) * n + t)] - mean;
  };
  fill(out.train, 0, n_tr);
  fill(out.test, n_tr, n_mont);
  return out;
}

inline constexpr char kFrameSetMagic[8] = {'C', 'S', 'F', 'U', 'S', 'E', '0', '1'};

/// Container: magic "CSFUSE01", u32 N, u32 frame count, then count * N f64
/// values (little endian), frame by frame.
inline void write_frameset(const std::string& path, const FrameSet& fs) {
  if (fs.n() > std::numeric_limits<std::uint32_t>::max() || fs.count() > std::numeric_limits<std::uint32_t>::max())
    throw InvalidDimensionError("write_frameset: dimensions exceed u32");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out.write(kFrameSetMagic, 8);
  const std::uint32_t n = static_cast<std::uint32_t>(fs.n()), c = static_cast<std::uint32_t>(fs.count());
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&c), 4);
  out.write(reinterpret_cast<const char*>(fs.frames.data()), static_cast<std::streamsize>(fs.frames.size() * 8));
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline FrameSet read_frameset(const std::string& path, Hypothesis label = Hypothesis::h0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char magic[8];
  std::uint32_t n = 0, c = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&c), 4);
  if (!in || std::memcmp(magic, kFrameSetMagic, 8) != 0) throw ParseError("'" + path + "': not a CSFUSE01 container", 0);
  FrameSet fs;
  fs.frames.resize(n, c);
  in.read(reinterpret_cast<char*>(fs.frames.data()), static_cast<std::streamsize>(fs.frames.size() * 8));
  if (!in) throw ParseError("'" + path + "': truncated payload", 0);
  fs.label = label;
  fs.source = path;
  return fs;
}

/// One-dimensional Gaussian-kernel density estimate with density and cdf
/// cached on a uniform grid.
class Kde {
 public:
  static constexpr int kGrid = 4096;

  double bandwidth() const noexcept { return h_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t samples() const noexcept { return x_.size(); }

  double pdf(double x) const {
    if (x < lo_ || x > hi_) return std::exp(log_pdf_exact(x));
    return interp(pdf_, x);
  }

  double log_pdf(double x) const {
    if (x < lo_ || x > hi_) return log_pdf_exact(x);
    const double p = interp(pdf_, x);
    return p > 0.0 ? std::log(p) : log_pdf_exact(x);
  }

  double cdf(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    return interp(cdf_, x);
  }

  /// Direct kernel sum, for oracle checks and tails.
  double log_pdf_exact(double x) const {
    double mx = -std::numeric_limits<double>::infinity();
    for (double xi : x_) mx = std::max(mx, -0.5 * ((x - xi) / h_) * ((x - xi) / h_));
    long double acc = 0.0L;
    for (double xi : x_) acc += std::exp(-0.5 * ((x - xi) / h_) * ((x - xi) / h_) - mx);
    return mx + std::log(static_cast<double>(acc)) - std::log(static_cast<double>(x_.size()) * h_) -
           0.5 * std::log(2.0 * std::numbers::pi);
  }

  friend Kde kde_fit_samples(std::vector<double> samples, double bandwidth_scale);

 private:
  double interp(const std::vector<double>& tab, double x) const {
    const double pos = (x - lo_) / step_;
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(pos), tab.size() - 2);
    const double w = pos - static_cast<double>(k);
    return (1.0 - w) * tab[k] + w * tab[k + 1];
  }

  std::vector<double> x_;  // sorted
  double h_ = 1.0;
  double lo_ = 0.0, hi_ = 1.0, step_ = 1.0;
  std::vector<double> pdf_, cdf_;
};

/// Silverman bandwidth h = 0.9 min(sd, IQR/1.34) m^(-1/5), scaled by
/// bandwidth_scale and floored at 1e-6 times the sample range (or 1).
inline Kde kde_fit_samples(std::vector<double> samples, double bandwidth_scale = 1.0) {
  if (samples.size() < 30)
    throw FitError("kde_fit: need at least 30 training samples, got " + std::to_string(samples.size()));
  for (double v : samples)
    if (!std::isfinite(v)) throw FitError("kde_fit: non-finite training sample");
  if (!(bandwidth_scale > 0.0)) throw ConfigurationError("kde_fit: bandwidth scale must be > 0");
  std::sort(samples.begin(), samples.end());
  const double m = static_cast<double>(samples.size());
  long double s1 = 0.0L, s2 = 0.0L;
  for (double v : samples) s1 += v;
  const double mean = static_cast<double>(s1 / samples.size());
  for (double v : samples) s2 += (v - mean) * (v - mean);
  const double sd = std::sqrt(static_cast<double>(s2 / (samples.size() - 1)));
  auto quantile = [&](double p) {
    const double pos = p * (m - 1.0);
    const auto k = static_cast<std::size_t>(pos);
    const double w = pos - static_cast<double>(k);
    return k + 1 < samples.size() ? (1.0 - w) * samples[k] + w * samples[k + 1] : samples.back();
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  const double range = samples.back() - samples.front();
  const double floor = 1e-6 * (range > 0.0 ? range : std::max(1.0, std::abs(samples.front())));
  Kde k;
  k.h_ = std::max(bandwidth_scale * 0.9 * spread * std::pow(m, -0.2), floor);
  k.x_ = std::move(samples);
  k.lo_ = k.x_.front() - 8.0 * k.h_;
  k.hi_ = k.x_.back() + 8.0 * k.h_;
  k.step_ = (k.hi_ - k.lo_) / (Kde::kGrid - 1);
  k.pdf_.assign(Kde::kGrid, 0.0);
  // Kernels are truncated at 8h, where the Gaussian weight is below 1.3e-14.
  const double norm = 1.0 / (m * k.h_ * std::sqrt(2.0 * std::numbers::pi));
  for (int g = 0; g < Kde::kGrid; ++g) {
    const double x = k.lo_ + k.step_ * g;
    const auto b = std::lower_bound(k.x_.begin(), k.x_.end(), x - 8.0 * k.h_);
    const auto e = std::upper_bound(k.x_.begin(), k.x_.end(), x + 8.0 * k.h_);
    long double acc = 0.0L;
    for (auto it = b; it != e; ++it) {
      const double z = (x - *it) / k.h_;
      acc += std::exp(-0.5 * z * z);
    }
    k.pdf_[static_cast<std::size_t>(g)] = static_cast<double>(acc) * norm;
  }
  // Trapezoid cumulative integral, normalized so the grid ends at 1.
  k.cdf_.assign(Kde::kGrid, 0.0);
  for (int g = 1; g < Kde::kGrid; ++g)
    k.cdf_[static_cast<std::size_t>(g)] =
        k.cdf_[static_cast<std::size_t>(g - 1)] + 0.5 * k.step_ * (k.pdf_[static_cast<std::size_t>(g - 1)] + k.pdf_[static_cast<std::size_t>(g)]);
  const double total = k.cdf_.back();
  if (!(total > 0.0)) throw FitError("kde_fit: density integrates to zero");
  for (auto& c : k.cdf_) c /= total;
  return k;
}

/// Pools every sample of the training frames.
inline Kde kde_fit(const FrameSet& train, double bandwidth_scale = 1.0) {
  std::vector<double> s(train.frames.data(), train.frames.data() + train.frames.size());
  return kde_fit_samples(std::move(s), bandwidth_scale);
}

/// KDE marginals per (sensor, hypothesis), usable by the product and copula
/// detectors.
class KdeMarginals {
 public:
  KdeMarginals(std::vector<Kde> h0, std::vector<Kde> h1) : h0_(std::move(h0)), h1_(std::move(h1)) {
    if (h0_.size() != h1_.size() || h0_.empty())
      throw ConfigurationError("KdeMarginals: need one density per sensor under each hypothesis");
  }
  Index sensors() const noexcept { return static_cast<Index>(h0_.size()); }
  const Kde& get(Index sensor, Hypothesis h) const {
    return h == Hypothesis::h0 ? h0_.at(static_cast<std::size_t>(sensor)) : h1_.at(static_cast<std::size_t>(sensor));
  }
  double log_pdf(Index sensor, Hypothesis h, double x) const { return get(sensor, h).log_pdf(x); }
  double cdf(Index sensor, Hypothesis h, double x) const { return get(sensor, h).cdf(x); }

 private:
  std::vector<Kde> h0_, h1_;
};

/// Stacks per-sensor frame sets (equal N and count) into NL x count frames.
inline MatrixXd stack_sensors(const std::vector<FrameSet>& sensors) {
  if (sensors.empty()) throw InvalidDimensionError("stack_sensors: no sensors");
  const Index n = sensors.front().n(), c = sensors.front().count();
  MatrixXd out(n * static_cast<Index>(sensors.size()), c);
  for (std::size_t j = 0; j < sensors.size(); ++j) {
    if (sensors[j].n() != n || sensors[j].count() != c)
      throw InvalidDimensionError("stack_sensors: sensors disagree on frame size or count");
    out.middleRows(static_cast<Index>(j) * n, n) = sensors[j].frames;
  }
  return out;
}

/// Compresses the NL x T training frames of each hypothesis with bp and
/// builds the Gaussian model from their sample means and covariances.
inline GaussianModel empirical_gaussian_model(const Eigen::Ref<const MatrixXd>& train_h0,
                                              const Eigen::Ref<const MatrixXd>& train_h1, const BlockProjection& bp) {
  if (train_h0.rows() != bp.cols() || train_h1.rows() != bp.cols())
    throw InvalidDimensionError("empirical_gaussian_model: frame length must be N*L");
  if (train_h0.cols() < 2 || train_h1.cols() < 2)
    throw InsufficientDataError("empirical_gaussian_model: need at least 2 training frames per hypothesis");
  const MatrixXd y0 = block_compress_frames(bp, train_h0);
  const MatrixXd y1 = block_compress_frames(bp, train_h1);
  VectorXd mu0 = y0.rowwise().mean(), mu1 = y1.rowwise().mean();
  MatrixXd c0 = sample_cov(y0), c1 = sample_cov(y1);
  GaussianModel g = make_gaussian_model(std::move(mu0), std::move(c0), std::move(mu1), std::move(c1), bp.m());
  g.meta.rank_deficient_training = std::min(train_h0.cols(), train_h1.cols()) < bp.rows();
  return g;
}

}  // namespace csfuse
