// Copyright 2026 The SurvONS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal static SVG charts for the benchmark outputs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "survons/bench.hpp"
#include "survons/error.hpp"

namespace survons {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;

  double map(double v, double a, double b) const {
    const double x = log ? std::log10(v) : v;
    return a + (x - lo) / (hi - lo) * (b - a);
  }
};

Axis make_axis(double lo, double hi, bool log) {
  Axis ax;
  ax.log = log;
  if (log) {
    lo = std::log10(lo);
    hi = std::log10(hi);
  }
  if (!(hi > lo)) {
    const double pad = std::abs(lo) > 0 ? 0.05 * std::abs(lo) : 1.0;
    lo -= pad;
    hi += pad;
  }
  ax.lo = lo;
  ax.hi = hi;
  return ax;
}

bool usable(double v, bool log) {
  return std::isfinite(v) && (!log || v > 0.0);
}

class Svg {
 public:
  explicit Svg(const std::string& title) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
         << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" "
         << "font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" "
         << "fill=\"white\"/>\n<text x=\"" << num(kWidth / 2)
         << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
         << escape(title) << "</text>\n";
  }

  void frame(const Axis& x, const Axis& y) {
    const double x0 = kLeft, x1 = kWidth - kRight;
    const double y0 = kHeight - kBottom, y1 = kTop;
    out_ << "<rect x=\"" << num(x0) << "\" y=\"" << num(y1) << "\" width=\""
         << num(x1 - x0) << "\" height=\"" << num(y0 - y1)
         << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
      const double fx = x.lo + (x.hi - x.lo) * i / 4.0;
      const double fy = y.lo + (y.hi - y.lo) * i / 4.0;
      const double px = x0 + (x1 - x0) * i / 4.0;
      const double py = y0 + (y1 - y0) * i / 4.0;
      out_ << "<text x=\"" << num(px) << "\" y=\"" << num(y0 + 16)
           << "\" text-anchor=\"middle\">"
           << tick_label(x.log ? std::pow(10.0, fx) : fx) << "</text>\n";
      out_ << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(py + 4)
           << "\" text-anchor=\"end\">"
           << tick_label(y.log ? std::pow(10.0, fy) : fy) << "</text>\n";
    }
  }

  void polyline(const std::vector<std::pair<double, double>>& pts,
                const char* colour) {
    if (pts.empty()) return;
    out_ << "<polyline fill=\"none\" stroke=\"" << colour
         << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [px, py] : pts) out_ << num(px) << ',' << num(py) << ' ';
    out_ << "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const char* colour) {
    out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\""
         << num(w) << "\" height=\"" << num(h) << "\" fill=\"" << colour
         << "\" fill-opacity=\"0.45\" stroke=\"" << colour << "\"/>\n";
  }

  void legend(const std::vector<std::string>& labels) {
    const double x = kWidth - kRight + 12;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const double y = kTop + 10 + 18.0 * static_cast<double>(i);
      out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y - 8)
           << "\" width=\"12\" height=\"8\" fill=\"" << kPalette[i % 8]
           << "\"/>\n<text x=\"" << num(x + 18) << "\" y=\"" << num(y) << "\">"
           << escape(labels[i]) << "</text>\n";
    }
  }

  void axis_labels(const std::string& x, const std::string& y) {
    out_ << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\""
         << num(kHeight - 12) << "\" text-anchor=\"middle\">" << escape(x)
         << "</text>\n<text x=\"14\" y=\"" << num(kHeight / 2)
         << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
         << num(kHeight / 2) << ")\">" << escape(y) << "</text>\n";
  }

  void save(const std::string& path) {
    out_ << "</svg>\n";
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidArgument("cannot open '" + path + "' for writing");
    f << out_.str();
    if (!f) throw InvalidArgument("write to '" + path + "' failed");
  }

 private:
  std::ostringstream out_;
};

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(i);
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

}  // namespace

double freedman_diaconis_width(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return !std::isfinite(v); }),
               values.end());
  if (values.size() < 2) return 0.0;
  std::sort(values.begin(), values.end());
  const double iqr = quantile(values, 0.75) - quantile(values, 0.25);
  return 2.0 * iqr / std::cbrt(static_cast<double>(values.size()));
}

void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<FigureSeries>& series, bool log_x,
                      bool log_y) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], log_x) || !usable(s.y[i], log_y)) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (!std::isfinite(xlo)) {
    xlo = ylo = log_x || log_y ? 1.0 : 0.0;
    xhi = yhi = 10.0;
  }
  const Axis ax = make_axis(xlo, xhi, log_x);
  const Axis ay = make_axis(ylo, yhi, log_y);
  Svg svg(title);
  svg.frame(ax, ay);
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], log_x) || !usable(s.y[i], log_y)) continue;
      pts.emplace_back(ax.map(s.x[i], kLeft, kWidth - kRight),
                       ay.map(s.y[i], kHeight - kBottom, kTop));
    }
    svg.polyline(pts, kPalette[k % 8]);
    labels.push_back(s.label);
  }
  svg.legend(labels);
  svg.axis_labels(log_x ? "t (log scale)" : "t", log_y ? "value (log scale)" : "value");
  svg.save(path);
}

void write_histogram(const std::string& path, const std::string& title,
                     const std::vector<std::vector<double>>& samples,
                     const std::vector<std::string>& labels) {
  std::vector<double> pooled;
  for (const auto& s : samples) {
    for (const double v : s) {
      if (std::isfinite(v)) pooled.push_back(v);
    }
  }
  Svg svg(title + " (Freedman-Diaconis bins)");
  if (pooled.empty()) {
    svg.frame(make_axis(0, 1, false), make_axis(0, 1, false));
    svg.save(path);
    return;
  }
  const auto [mn, mx] = std::minmax_element(pooled.begin(), pooled.end());
  const double lo = *mn;
  double width = freedman_diaconis_width(pooled);
  const double span = *mx - lo;
  if (!(width > 0.0)) width = span > 0.0 ? span / 10.0 : 1.0;
  const int bins = std::clamp(static_cast<int>(std::ceil(span / width)), 1, 200);
  width = span > 0.0 ? span / bins : width;

  // Densities so that different sample sizes are comparable.
  std::vector<std::vector<double>> density(samples.size(),
                                           std::vector<double>(bins, 0.0));
  double top = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    std::size_t count = 0;
    for (const double v : samples[k]) {
      if (!std::isfinite(v)) continue;
      const int b = std::min(bins - 1, static_cast<int>((v - lo) / width));
      density[k][static_cast<std::size_t>(b)] += 1.0;
      ++count;
    }
    for (double& d : density[k]) {
      d = count > 0 ? d / (static_cast<double>(count) * width) : 0.0;
      top = std::max(top, d);
    }
  }
  const Axis ax = make_axis(lo, lo + width * bins, false);
  const Axis ay = make_axis(0.0, top > 0 ? top : 1.0, false);
  svg.frame(ax, ay);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    for (int b = 0; b < bins; ++b) {
      const double x0 = ax.map(lo + b * width, kLeft, kWidth - kRight);
      const double x1 = ax.map(lo + (b + 1) * width, kLeft, kWidth - kRight);
      const double y = ay.map(density[k][static_cast<std::size_t>(b)],
                              kHeight - kBottom, kTop);
      svg.rect(x0, y, x1 - x0, kHeight - kBottom - y, kPalette[k % 8]);
    }
  }
  svg.legend(labels);
  svg.axis_labels("gamma_t", "density");
  svg.save(path);
}

void emit_figures(const FigureSet& set, const std::string& directory) {
  std::filesystem::create_directories(directory);
  const std::string base = directory + "/";
  std::vector<std::vector<double>> gammas;
  std::vector<std::string> gamma_labels;
  std::vector<FigureSeries> nll;
  std::vector<FigureSeries> err;
  for (const auto& [label, result] : set.methods) {
    if (result == nullptr) continue;
    std::vector<double> g;
    for (const auto& trace : result->traces) {
      for (const auto& row : trace.rows) g.push_back(row.gamma);
    }
    gammas.push_back(std::move(g));
    gamma_labels.push_back(label);
    FigureSeries a{label, {}, {}};
    FigureSeries b{label, {}, {}};
    for (const auto& row : result->averaged) {
      a.x.push_back(row.t);
      a.y.push_back(row.cum_nll_diff);
      b.x.push_back(row.t);
      b.y.push_back(row.sq_err_mean_iterate);
    }
    nll.push_back(std::move(a));
    err.push_back(std::move(b));
  }
  write_histogram(base + "gamma_density_" + set.tag + ".svg",
                  "gamma_t estimates", gammas, gamma_labels);
  write_line_chart(base + "cum_nll_" + set.tag + ".svg",
                   "Cumulative NLL difference to the truth", nll, false, false);
  write_line_chart(base + "sq_error_" + set.tag + ".svg",
                   "Squared error of the averaged prediction", err, true, true);
}

}  // namespace survons
