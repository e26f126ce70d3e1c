#include "tunnelfuse/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace tunnelfuse {

namespace {

constexpr std::size_t kMaxPointsPerSeries = 4000;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
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

// 1, 2 or 5 times a power of ten, giving roughly `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  const double nice = r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

std::string format_tick(double v, double step) {
  const int decimals = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step)));
  if (std::abs(v) < 0.5 * step * 1e-6) v = 0.0;
  return fixed(v, decimals);
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finalize() {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      const double pad = std::max(1.0, std::abs(lo)) * 0.05;
      lo -= pad;
      hi += pad;
    }
  }
};

}  // namespace

std::string render_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  Range xr;
  Range yr;
  for (const auto& s : series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
        xr.add(s.x[i]);
        yr.add(s.y[i]);
      }
    }
  }
  xr.finalize();
  yr.finalize();

  const double pw = spec.width - kMarginLeft - kMarginRight;
  const double ph = spec.height - kMarginTop - kMarginBottom;
  double sx = pw / (xr.hi - xr.lo);
  double sy = ph / (yr.hi - yr.lo);
  if (spec.equal_aspect) {
    const double s = std::min(sx, sy);
    xr.lo -= 0.5 * (pw / s - (xr.hi - xr.lo));
    yr.lo -= 0.5 * (ph / s - (yr.hi - yr.lo));
    xr.hi = xr.lo + pw / s;
    yr.hi = yr.lo + ph / s;
    sx = sy = s;
  }
  const auto px = [&](double x) { return kMarginLeft + (x - xr.lo) * sx; };
  const auto py = [&](double y) { return kMarginTop + ph - (y - yr.lo) * sy; };

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" fill=\"white\"/>\n"
      << "<text x=\"" << fixed(spec.width / 2.0, 1) << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape(spec.title) << "</text>\n";

  // Grid and tick labels.
  out << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
  const double xs = nice_step(xr.hi - xr.lo, 8);
  for (double v = std::ceil(xr.lo / xs) * xs; v <= xr.hi + 1e-9 * xs; v += xs) {
    const std::string x = fixed(px(v), 2);
    out << "<line x1=\"" << x << "\" y1=\"" << fixed(kMarginTop, 2) << "\" x2=\"" << x
        << "\" y2=\"" << fixed(kMarginTop + ph, 2) << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << x << "\" y=\"" << fixed(kMarginTop + ph + 16, 2)
        << "\" text-anchor=\"middle\">" << format_tick(v, xs) << "</text>\n";
  }
  const double ys = nice_step(yr.hi - yr.lo, 6);
  for (double v = std::ceil(yr.lo / ys) * ys; v <= yr.hi + 1e-9 * ys; v += ys) {
    const std::string y = fixed(py(v), 2);
    out << "<line x1=\"" << fixed(kMarginLeft, 2) << "\" y1=\"" << y << "\" x2=\""
        << fixed(kMarginLeft + pw, 2) << "\" y2=\"" << y << "\" stroke=\"#ddd\"/>\n"
        << "<text x=\"" << fixed(kMarginLeft - 6, 2) << "\" y=\"" << y
        << "\" text-anchor=\"end\" dominant-baseline=\"middle\">" << format_tick(v, ys)
        << "</text>\n";
  }
  out << "</g>\n"
      << "<rect x=\"" << fixed(kMarginLeft, 2) << "\" y=\"" << fixed(kMarginTop, 2)
      << "\" width=\"" << fixed(pw, 2) << "\" height=\"" << fixed(ph, 2)
      << "\" fill=\"none\" stroke=\"#333\"/>\n"
      << "<text x=\"" << fixed(kMarginLeft + pw / 2, 2) << "\" y=\"" << spec.height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(spec.x_label) << "</text>\n"
      << "<text transform=\"translate(16 " << fixed(kMarginTop + ph / 2, 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(spec.y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const std::size_t n = std::min(s.x.size(), s.y.size());
    const std::size_t stride = std::max<std::size_t>(1, (n + kMaxPointsPerSeries - 1) / kMaxPointsPerSeries);
    out << "<polyline fill=\"none\" stroke=\"" << escape(s.color)
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < n; i += stride) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!first) out << ' ';
      out << fixed(px(s.x[i]), 2) << ',' << fixed(py(s.y[i]), 2);
      first = false;
    }
    if (n > 0 && (n - 1) % stride != 0 && std::isfinite(s.x[n - 1]) && std::isfinite(s.y[n - 1])) {
      out << (first ? "" : " ") << fixed(px(s.x[n - 1]), 2) << ',' << fixed(py(s.y[n - 1]), 2);
    }
    out << "\"/>\n";

    const double ly = kMarginTop + 14.0 + 16.0 * static_cast<double>(si);
    const double lx = kMarginLeft + pw - 150.0;
    out << "<line x1=\"" << fixed(lx, 2) << "\" y1=\"" << fixed(ly, 2) << "\" x2=\""
        << fixed(lx + 20, 2) << "\" y2=\"" << fixed(ly, 2) << "\" stroke=\"" << escape(s.color)
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << fixed(lx + 26, 2) << "\" y=\"" << fixed(ly, 2)
        << "\" dominant-baseline=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace tunnelfuse
