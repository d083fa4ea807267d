#pragma once

// CSV and self-contained SVG output. Numbers use %.17g so outputs round-trip
// and repeated runs are byte-identical.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "csfuse/analysis.hpp"
#include "csfuse/error.hpp"
#include "csfuse/harness.hpp"
#include "csfuse/roc.hpp"

namespace csfuse {

inline std::string fmt_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kRocHeader = "detector,scenario,N,M,c_r,T,trials,seed,threshold,pf,pd";
inline constexpr const char* kAucHeader = "detector,scenario,N,M,c_r,T,trials,seed,auc";
inline constexpr const char* kBoundsHeader = "approach,c_r,d_b,d_b_stderr,p_ub,method";
inline constexpr const char* kTimingHeader = "approach,N,M,c_r,T,mean_seconds,std_seconds,evals";
inline constexpr const char* kCalibrationHeader =
    "detector,a0,inv_lambda0,N,M,T,alpha0,threshold,achieved_pf,ci_low,ci_high,method";

namespace detail {

inline std::string curve_key(const RocCurve& c) {
  return c.detector + "," + c.scenario + "," + std::to_string(c.n) + "," + std::to_string(c.m) + "," +
         fmt_num(c.c_r) + "," + std::to_string(c.t) + "," + std::to_string(c.trials) + "," + std::to_string(c.seed);
}

// Quotes a field if it contains a comma or quote.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace detail

inline void write_roc_csv(std::ostream& os, const std::vector<RocCurve>& curves) {
  os << kRocHeader << '\n';
  for (const auto& c : curves) {
    const std::string key = detail::curve_key(c);
    for (const auto& p : c.points) os << key << ',' << fmt_num(p.threshold) << ',' << fmt_num(p.pf) << ',' << fmt_num(p.pd) << '\n';
  }
}

inline void write_auc_csv(std::ostream& os, const std::vector<RocCurve>& curves) {
  os << kAucHeader << '\n';
  for (const auto& c : curves) os << detail::curve_key(c) << ',' << fmt_num(c.auc) << '\n';
}

inline void write_bounds_csv(std::ostream& os, const std::vector<DistanceReport>& reports) {
  os << kBoundsHeader << '\n';
  for (const auto& r : reports)
    os << r.approach << ',' << fmt_num(r.c_r) << ',' << fmt_num(r.d_b) << ',' << fmt_num(r.d_b_stderr) << ','
       << fmt_num(r.p_ub) << ',' << detail::csv_field(r.method) << '\n';
}

inline void write_timing_csv(std::ostream& os, const std::vector<TimingRow>& rows) {
  os << kTimingHeader << '\n';
  for (const auto& r : rows)
    os << r.approach << ',' << r.n << ',' << r.m << ',' << fmt_num(r.c_r) << ',' << r.t << ',' << fmt_num(r.mean_seconds)
       << ',' << fmt_num(r.std_seconds) << ',' << r.evals << '\n';
}

inline void write_calibration_csv(std::ostream& os, const std::vector<CalibrationPoint>& pts) {
  os << kCalibrationHeader << '\n';
  for (const auto& p : pts)
    os << p.detector << ',' << fmt_num(p.a0) << ',' << fmt_num(p.inv_lambda0) << ',' << p.n << ',' << p.m << ',' << p.t
       << ',' << fmt_num(p.alpha0) << ',' << fmt_num(p.threshold) << ',' << fmt_num(p.achieved_pf) << ','
       << fmt_num(p.ci_low) << ',' << fmt_num(p.ci_high) << ',' << p.method << '\n';
}

namespace detail {

inline const char* palette(std::size_t k) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[k % 10];
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

inline std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace detail

/// ROC curves as polylines in (pf, pd) space; one polyline per curve, in
/// ascending threshold order.
inline void write_roc_svg(std::ostream& os, const std::vector<RocCurve>& curves, const std::string& title = "ROC") {
  constexpr double w = 520, h = 520, left = 60, top = 40, size = 400;
  auto sx = [&](double pf) { return left + pf * size; };
  auto sy = [&](double pd) { return top + (1.0 - pd) * size; };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
     << ' ' << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left + size / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
     << detail::xml_escape(title) << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << size << "\" height=\"" << size
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = k / 4.0;
    os << "<text x=\"" << detail::px(sx(v)) << "\" y=\"" << top + size + 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << v << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << detail::px(sy(v) + 3)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" << v << "</text>\n";
  }
  os << "<text x=\"" << left + size / 2 << "\" y=\"" << top + size + 34
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">Pf</text>\n";
  os << "<text x=\"16\" y=\"" << top + size / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " << top + size / 2
     << ")\">Pd</text>\n";
  os << "<line x1=\"" << sx(0) << "\" y1=\"" << sy(0) << "\" x2=\"" << sx(1) << "\" y2=\"" << sy(1)
     << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const auto& c = curves[k];
    os << "<polyline class=\"roc\" data-label=\"" << detail::xml_escape(c.detector) << "\" fill=\"none\" stroke=\""
       << detail::palette(k) << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < c.points.size(); ++i)
      os << (i ? " " : "") << detail::px(sx(c.points[i].pf)) << ',' << detail::px(sy(c.points[i].pd));
    os << "\"/>\n";
    const double ly = top + 16 + 14 * static_cast<double>(k);
    os << "<text x=\"" << left + size - 8 << "\" y=\"" << detail::px(ly + size - 14 * curves.size() - 24)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\" fill=\"" << detail::palette(k) << "\">"
       << detail::xml_escape(c.detector + " c_r=" + fmt_num(c.c_r) + " T=" + std::to_string(c.t) + " AUC=" + detail::px(c.auc))
       << "</text>\n";
  }
  os << "</svg>\n";
}

/// Calibrated thresholds over the (a0, 1/lambda0) grid: one heat-map panel
/// per detector/method, cells labelled with the threshold value.
inline void write_threshold_svg(std::ostream& os, const std::vector<CalibrationPoint>& pts) {
  std::map<std::string, std::vector<const CalibrationPoint*>> panels;
  for (const auto& p : pts) panels[p.detector + " (" + p.method + ")"].push_back(&p);
  constexpr double cell = 56, left = 70, top = 50, gap = 60;
  double width = left, height = top;
  std::vector<std::pair<double, double>> offsets;
  for (const auto& [name, v] : panels) {
    std::set<double> a0s, ils;
    for (auto* p : v) {
      a0s.insert(p->a0);
      ils.insert(p->inv_lambda0);
    }
    offsets.emplace_back(width, top);
    width += cell * static_cast<double>(ils.size()) + gap + left;
    height = std::max(height, top + cell * static_cast<double>(a0s.size()) + 60);
  }
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\" viewBox=\"0 0 "
     << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::size_t k = 0;
  for (const auto& [name, v] : panels) {
    const auto [ox, oy] = offsets[k++];
    std::set<double> a0s, ils;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (auto* p : v) {
      a0s.insert(p->a0);
      ils.insert(p->inv_lambda0);
      lo = std::min(lo, p->threshold);
      hi = std::max(hi, p->threshold);
    }
    const std::vector<double> av(a0s.begin(), a0s.end()), iv(ils.begin(), ils.end());
    os << "<text x=\"" << ox << "\" y=\"" << oy - 24 << "\" font-family=\"sans-serif\" font-size=\"12\">"
       << detail::xml_escape(name) << "</text>\n";
    for (auto* p : v) {
      const auto r = std::find(av.begin(), av.end(), p->a0) - av.begin();
      const auto c = std::find(iv.begin(), iv.end(), p->inv_lambda0) - iv.begin();
      const double t = hi > lo ? (p->threshold - lo) / (hi - lo) : 0.5;
      const int red = static_cast<int>(std::lround(255 * t)), blue = 255 - red;
      os << "<rect class=\"cell\" x=\"" << detail::px(ox + cell * static_cast<double>(c)) << "\" y=\""
         << detail::px(oy + cell * static_cast<double>(r)) << "\" width=\"" << cell << "\" height=\"" << cell
         << "\" fill=\"rgb(" << red << ",96," << blue << ")\" data-threshold=\"" << fmt_num(p->threshold) << "\"/>\n";
      os << "<text x=\"" << detail::px(ox + cell * (static_cast<double>(c) + 0.5)) << "\" y=\""
         << detail::px(oy + cell * (static_cast<double>(r) + 0.55))
         << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\" fill=\"white\">"
         << detail::px(p->threshold) << "</text>\n";
    }
    for (std::size_t r = 0; r < av.size(); ++r)
      os << "<text x=\"" << ox - 4 << "\" y=\"" << detail::px(oy + cell * (static_cast<double>(r) + 0.55))
         << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">a0=" << fmt_num(av[r]) << "</text>\n";
    for (std::size_t c = 0; c < iv.size(); ++c)
      os << "<text x=\"" << detail::px(ox + cell * (static_cast<double>(c) + 0.5)) << "\" y=\""
         << detail::px(oy + cell * static_cast<double>(av.size()) + 14)
         << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" << fmt_num(iv[c]) << "</text>\n";
    os << "<text x=\"" << detail::px(ox + cell * static_cast<double>(iv.size()) / 2) << "\" y=\""
       << detail::px(oy + cell * static_cast<double>(av.size()) + 30)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">1/lambda0</text>\n";
  }
  os << "</svg>\n";
}

/// Opens `dir/name` for writing, creating dir as needed.
inline std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

template <class Writer>
void emit_file(const std::string& dir, const std::string& name, Writer&& w) {
  auto out = open_output(dir, name);
  w(out);
  out.flush();
  if (!out) throw IoError("write failed for '" + (std::filesystem::path(dir) / name).string() + "'");
}

}  // namespace csfuse
