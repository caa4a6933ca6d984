#include "hnoise/pipeline/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace hnoise::pipeline {

namespace {

struct Axis {
  bool log;
  double lo;
  double hi;

  double map(double v) const {
    const double t = log ? std::log10(v) : v;
    return (t - lo) / (hi - lo);
  }
  bool accepts(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
};

Axis make_axis(bool log, double min_v, double max_v) {
  if (!(min_v <= max_v)) {
    min_v = log ? 1.0 : 0.0;
    max_v = log ? 10.0 : 1.0;
  }
  if (log) {
    double lo = std::floor(std::log10(min_v));
    double hi = std::ceil(std::log10(max_v));
    if (hi <= lo) hi = lo + 1.0;
    return {true, lo, hi};
  }
  double span = max_v - min_v;
  if (span <= 0.0) span = std::max(std::abs(max_v), 1.0);
  return {false, min_v - 0.05 * span, max_v + 0.05 * span};
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> out;
  if (a.log) {
    for (double e = a.lo; e <= a.hi + 1e-9; e += 1.0) out.push_back(std::pow(10.0, e));
    return out;
  }
  const double raw = (a.hi - a.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-12 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

std::string tick_label(double v, bool log) {
  char buf[32];
  if (log) {
    std::snprintf(buf, sizeof(buf), "1e%d", static_cast<int>(std::lround(std::log10(v))));
  } else {
    std::snprintf(buf, sizeof(buf), "%g", v);
  }
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string palette(std::size_t i) {
  static constexpr std::array<const char*, 6> colors = {"#1f77b4", "#d62728", "#2ca02c",
                                                        "#9467bd", "#ff7f0e", "#17becf"};
  return colors[i % colors.size()];
}

std::string render_svg(const PlotSpec& plot) {
  const double left = 80, right = 170, top = 40, bottom = 60;
  const double pw = plot.width - left - right;
  const double ph = plot.height - top - bottom;

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      const bool ok_x = std::isfinite(s.x[i]) && (!plot.log_x || s.x[i] > 0.0);
      const bool ok_y = std::isfinite(s.y[i]) && (!plot.log_y || s.y[i] > 0.0);
      if (!ok_x || !ok_y) continue;
      x_min = std::min(x_min, s.x[i]);
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  const Axis ax = make_axis(plot.log_x, x_min, x_max);
  const Axis ay = make_axis(plot.log_y, y_min, y_max);
  auto px = [&](double v) { return left + ax.map(v) * pw; };
  auto py = [&](double v) { return top + (1.0 - ay.map(v)) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << plot.width << "\" height=\""
      << plot.height << "\" viewBox=\"0 0 " << plot.width << ' ' << plot.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(plot.title) << "</text>\n";

  for (double t : ticks(ax)) {
    const double x = px(t);
    svg << "<line x1=\"" << num(x) << "\" y1=\"" << num(top) << "\" x2=\"" << num(x) << "\" y2=\""
        << num(top + ph) << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 16)
        << "\" text-anchor=\"middle\">" << tick_label(t, ax.log) << "</text>\n";
  }
  for (double t : ticks(ay)) {
    const double y = py(t);
    svg << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + pw)
        << "\" y2=\"" << num(y) << "\" stroke=\"#e0e0e0\"/>\n";
    svg << "<text x=\"" << num(left - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
        << tick_label(t, ay.log) << "</text>\n";
  }
  svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(plot.height - 14)
      << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
  svg << "<text transform=\"translate(18 " << num(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.y_label) << "</text>\n";

  svg << "<g clip-path=\"url(#plot-area)\">\n";
  svg << "<clipPath id=\"plot-area\"><rect x=\"" << num(left) << "\" y=\"" << num(top)
      << "\" width=\"" << num(pw) << "\" height=\"" << num(ph) << "\"/></clipPath>\n";
  for (const auto& s : plot.series) {
    std::ostringstream pts;
    std::size_t n = 0;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!ax.accepts(s.x[i]) || !ay.accepts(s.y[i])) continue;
      if (s.markers) {
        svg << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
            << "\" r=\"1.6\" fill=\"" << s.color << "\"/>\n";
      } else {
        pts << (n > 0 ? " " : "") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
      }
      ++n;
    }
    if (!s.markers && n > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
          << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"" << pts.str() << "\"/>\n";
    }
  }
  svg << "</g>\n";

  double ly = top + 10;
  for (const auto& s : plot.series) {
    const double lx = left + pw + 12;
    svg << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 24) << "\" y2=\""
        << num(ly) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
        << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    svg << "<text x=\"" << num(lx + 30) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label)
        << "</text>\n";
    ly += 18;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace hnoise::pipeline
