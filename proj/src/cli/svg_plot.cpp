#include "varx/cli/svg_plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

namespace varx::cli {

namespace {

constexpr double kPanelW = 420.0;
constexpr double kPanelH = 320.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 16.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 46.0;

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  std::string s(buf, res.ptr);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string tick_label(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
  return std::string(buf, res.ptr);
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += ch;
    }
  }
  return out;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  bool usable(double v) const { return std::isfinite(v) && (!log || v > 0.0); }
  double t(double v) const { return log ? std::log10(v) : v; }
  double frac(double v) const { return (t(v) - lo) / (hi - lo); }
};

Axis fit_axis(const std::vector<const std::vector<double>*>& data, bool log) {
  Axis ax;
  ax.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto* d : data) {
    for (double v : *d) {
      if (!ax.usable(v)) continue;
      lo = std::min(lo, ax.t(v));
      hi = std::max(hi, ax.t(v));
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
  const double pad = 0.05 * (hi - lo);
  ax.lo = lo - pad;
  ax.hi = hi + pad;
  return ax;
}

void draw_panel(std::ostream& os, const Panel& panel, double x0) {
  std::vector<const std::vector<double>*> xs, ys;
  for (const auto& s : panel.series) xs.push_back(&s.x), ys.push_back(&s.y);
  Axis ax = fit_axis(xs, panel.log_x);
  Axis ay = fit_axis(ys, panel.log_y);
  const double pw = kPanelW - kLeft - kRight;
  const double ph = kPanelH - kTop - kBottom;
  auto px = [&](double v) { return x0 + kLeft + ax.frac(v) * pw; };
  auto py = [&](double v) { return kTop + (1.0 - ay.frac(v)) * ph; };

  os << "<rect x=\"" << num(x0 + kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  os << "<text x=\"" << num(x0 + kLeft + pw / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">"
     << escape(panel.title) << "</text>\n";
  os << "<text x=\"" << num(x0 + kLeft + pw / 2) << "\" y=\"" << num(kPanelH - 8)
     << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(panel.x_label) << "</text>\n";
  os << "<text transform=\"translate(" << num(x0 + 14) << "," << num(kTop + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"11\">" << escape(panel.y_label) << "</text>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = ax.lo + (ax.hi - ax.lo) * i / 4.0;
    const double fy = ay.lo + (ay.hi - ay.lo) * i / 4.0;
    const double tx = x0 + kLeft + pw * i / 4.0;
    const double ty = kTop + ph * (1.0 - i / 4.0);
    os << "<text x=\"" << num(tx) << "\" y=\"" << num(kTop + ph + 14)
       << "\" text-anchor=\"middle\" font-size=\"9\">" << tick_label(ax.log ? std::pow(10.0, fx) : fx)
       << "</text>\n";
    os << "<text x=\"" << num(x0 + kLeft - 4) << "\" y=\"" << num(ty + 3)
       << "\" text-anchor=\"end\" font-size=\"9\">" << tick_label(ay.log ? std::pow(10.0, fy) : fy)
       << "</text>\n";
  }

  for (double v : panel.vlines) {
    if (!ax.usable(v)) continue;
    os << "<line x1=\"" << num(px(v)) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(px(v))
       << "\" y2=\"" << num(kTop + ph) << "\" stroke=\"#888\" stroke-dasharray=\"2,3\"/>\n";
  }

  double legend_y = kTop + 12;
  for (const auto& s : panel.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    if (s.stroke == Stroke::markers) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
        os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
           << "\" r=\"3\" fill=\"none\" stroke=\"" << s.color << "\"/>\n";
      }
    } else {
      std::string pts;
      for (std::size_t i = 0; i < n; ++i) {
        if (!ax.usable(s.x[i]) || !ay.usable(s.y[i])) continue;
        if (!pts.empty()) pts += ' ';
        pts += num(px(s.x[i])) + "," + num(py(s.y[i]));
      }
      if (!pts.empty()) {
        os << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << s.color << "\"";
        if (s.stroke == Stroke::dashed) os << " stroke-dasharray=\"6,4\"";
        if (s.stroke == Stroke::dotted) os << " stroke-dasharray=\"1,3\"";
        os << "/>\n";
      }
    }
    if (!s.label.empty()) {
      os << "<text x=\"" << num(x0 + kLeft + pw - 6) << "\" y=\"" << num(legend_y)
         << "\" text-anchor=\"end\" font-size=\"10\" fill=\"" << s.color << "\">" << escape(s.label)
         << "</text>\n";
      legend_y += 12;
    }
  }
}

}  // namespace

void write_svg(std::ostream& os, const std::vector<Panel>& panels) {
  const double width = kPanelW * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
     << num(kPanelH) << "\" viewBox=\"0 0 " << num(width) << " " << num(kPanelH) << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) draw_panel(os, panels[i], kPanelW * static_cast<double>(i));
  os << "</svg>\n";
}

}  // namespace varx::cli
