#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace pocs::plot {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 55;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

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
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Roughly five "nice" ticks covering [lo, hi].
std::vector<double> linear_ticks(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double f : {1.0, 2.0, 5.0, 10.0})
    if (f * mag >= raw) {
      step = f * mag;
      break;
    }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(v);
  return t;
}

}  // namespace

std::string compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string render_svg(const Figure& fig) {
  const double inf = std::numeric_limits<double>::infinity();
  double xmin = inf, xmax = -inf, ymin = inf, ymax = -inf;
  auto usable_x = [&](double x) { return std::isfinite(x) && (!fig.log_x || x > 0.0); };
  for (const Series& s : fig.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable_x(s.x[i]) || !std::isfinite(s.y[i])) continue;
      const double x = fig.log_x ? std::log10(s.x[i]) : s.x[i];
      xmin = std::min(xmin, x), xmax = std::max(xmax, x);
      ymin = std::min(ymin, s.y[i]), ymax = std::max(ymax, s.y[i]);
      if (i < s.lo.size() && std::isfinite(s.lo[i])) ymin = std::min(ymin, s.lo[i]);
      if (i < s.hi.size() && std::isfinite(s.hi[i])) ymax = std::max(ymax, s.hi[i]);
    }
  }
  if (!(xmin <= xmax)) xmin = 0, xmax = 1;
  if (!(ymin <= ymax)) ymin = 0, ymax = 1;
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad, ymax += ypad;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + pw * ((fig.log_x ? std::log10(x) : x) - xmin) / (xmax - xmin); };
  auto sy = [&](double y) { return kTop + ph * (1.0 - (y - ymin) / (ymax - ymin)); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << escape(fig.title) << "</text>\n";
  os << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw) << "\" height=\""
     << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  std::vector<double> xt;
  if (fig.log_x)
    for (double e = std::ceil(xmin - 1e-9); e <= xmax + 1e-9; e += 1.0) xt.push_back(std::pow(10.0, e));
  else
    xt = linear_ticks(xmin, xmax);
  for (double v : xt) {
    const double px = sx(v);
    os << "<line x1=\"" << num(px) << "\" y1=\"" << num(kTop + ph) << "\" x2=\"" << num(px) << "\" y2=\""
       << num(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(px) << "\" y=\"" << num(kTop + ph + 18) << "\" text-anchor=\"middle\">"
       << tick_label(v) << "</text>\n";
  }
  for (double v : linear_ticks(ymin, ymax)) {
    const double py = sy(v);
    os << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py) << "\" x2=\"" << num(kLeft) << "\" y2=\""
       << num(py) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py + 4) << "\" text-anchor=\"end\">" << tick_label(v)
       << "</text>\n";
  }
  os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">"
     << escape(fig.xlabel) << "</text>\n";
  os << "<text transform=\"translate(18," << num(kTop + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(fig.ylabel) << "</text>\n";

  for (std::size_t k = 0; k < fig.series.size(); ++k) {
    const Series& s = fig.series[k];
    const char* color = kColors[k % std::size(kColors)];
    if (s.line) {
      std::string pts;
      for (std::size_t i = 0; i < s.x.size(); ++i)
        if (usable_x(s.x[i]) && std::isfinite(s.y[i])) pts += num(sx(s.x[i])) + "," + num(sy(s.y[i])) + " ";
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"" << pts
         << "\"/>\n";
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable_x(s.x[i])) continue;
      const double px = sx(s.x[i]);
      if (i < s.lo.size() && i < s.hi.size() && std::isfinite(s.lo[i]) && std::isfinite(s.hi[i]))
        os << "<line x1=\"" << num(px) << "\" y1=\"" << num(sy(s.lo[i])) << "\" x2=\"" << num(px) << "\" y2=\""
           << num(sy(s.hi[i])) << "\" stroke=\"" << color << "\"/>\n";
      if (s.markers && std::isfinite(s.y[i]))
        os << "<circle cx=\"" << num(px) << "\" cy=\"" << num(sy(s.y[i])) << "\" r=\"3\" fill=\"" << color
           << "\"/>\n";
    }
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    const double lx = kLeft + pw + 12;
    os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 20) << "\" y2=\"" << num(ly)
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << num(lx + 26) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace pocs::plot
