#include "sqz/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "sqz/io.hpp"

namespace sqz {

namespace {

// Colorblind-safe palette (Okabe & Ito).
constexpr const char* kPalette[] = {"#0072B2", "#D55E00", "#009E73", "#CC79A7",
                                    "#E69F00", "#56B4E9", "#000000", "#F0E442"};

std::string xml_escape(const std::string& s) {
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

std::string tick_label(double v, double step) {
  if (std::abs(v) < 1e-12 * std::max(1.0, step)) v = 0.0;
  const int decimals = std::clamp(static_cast<int>(std::ceil(-std::log10(step) + 1e-9)), 0, 6);
  char buf[32];
  if (std::abs(v) >= 1e6 || (v != 0.0 && std::abs(v) < 1e-4))
    std::snprintf(buf, sizeof buf, "%.2g", v);
  else
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::pair<double, double> data_range(const LineChart& c, bool x_axis) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : c.series) {
    const auto& v = x_axis ? s.x : s.y;
    for (std::size_t i = 0; i < v.size() && i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
    }
  }
  if (!std::isfinite(lo)) return {0.0, 1.0};
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    const double pad = std::max(0.5, 0.05 * std::abs(hi));
    return {lo - pad, hi + pad};
  }
  if (!x_axis) {
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
  std::vector<double> ticks;
  if (!(hi > lo) || target < 1) return ticks;
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  const double first = std::ceil(lo / step - 1e-9) * step;
  for (double t = first; t <= hi + 1e-9 * step; t += step) ticks.push_back(t);
  return ticks;
}

std::string render_svg(const LineChart& c) {
  const double left = 78, right = 24, top = c.title.empty() ? 20 : 44, bottom = 58;
  const double legend_w = c.series.size() > 1 ? 150 : 0;
  const double pw = c.width - left - right - legend_w;
  const double ph = c.height - top - bottom;
  auto [x0, x1] = c.x_range.value_or(data_range(c, true));
  auto [y0, y1] = c.y_range.value_or(data_range(c, false));
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << c.width << "\" height=\"" << c.height
     << "\" viewBox=\"0 0 " << c.width << " " << c.height << "\" font-family=\"Helvetica, Arial, sans-serif\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!c.title.empty())
    os << "<text x=\"" << num(left + pw / 2) << "\" y=\"26\" font-size=\"16\" text-anchor=\"middle\">"
       << xml_escape(c.title) << "</text>\n";

  os << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  const auto xt = nice_ticks(x0, x1);
  const auto yt = nice_ticks(y0, y1);
  for (double t : xt) os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(px(t)) << "\" y2=\"" << num(top + ph) << "\"/>\n";
  for (double t : yt) os << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(left + pw) << "\" y2=\"" << num(py(t)) << "\"/>\n";
  os << "</g>\n";

  os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<g font-size=\"12\">\n";
  const double xstep = xt.size() > 1 ? xt[1] - xt[0] : 1.0;
  const double ystep = yt.size() > 1 ? yt[1] - yt[0] : 1.0;
  for (double t : xt)
    os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">"
       << tick_label(t, xstep) << "</text>\n";
  for (double t : yt)
    os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
       << tick_label(t, ystep) << "</text>\n";
  os << "</g>\n";
  os << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(c.height - 14.0)
     << "\" font-size=\"14\" text-anchor=\"middle\">" << xml_escape(c.x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << num(top + ph / 2) << ") rotate(-90)\" font-size=\"14\" text-anchor=\"middle\">"
     << xml_escape(c.y_label) << "</text>\n";

  for (double m : c.x_marks) {
    if (m < x0 || m > x1) continue;
    os << "<line x1=\"" << num(px(m)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(px(m)) << "\" y2=\""
       << num(top + ph) << "\" stroke=\"black\" stroke-dasharray=\"5,4\"/>\n";
  }

  // Clip traces to the plot frame so explicit ranges can cut data.
  os << "<clipPath id=\"frame\"><rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\"/></clipPath>\n<g clip-path=\"url(#frame)\">\n";
  for (std::size_t k = 0; k < c.series.size(); ++k) {
    const auto& s = c.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string path;
    bool pen = false;
    const std::size_t n = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        pen = false;
        continue;
      }
      path += (pen ? " L" : " M") + num(px(s.x[i])) + " " + num(py(s.y[i]));
      pen = true;
    }
    if (!path.empty())
      os << "<path d=\"" << path.substr(1) << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    if (s.markers)
      for (std::size_t i = 0; i < n; ++i)
        if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
          os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
  }
  os << "</g>\n";

  if (legend_w > 0) {
    const double lx = left + pw + 14;
    for (std::size_t k = 0; k < c.series.size(); ++k) {
      const double ly = top + 12 + 20.0 * k;
      os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 22) << "\" y2=\"" << num(ly)
         << "\" stroke=\"" << kPalette[k % std::size(kPalette)] << "\" stroke-width=\"2\"/>\n"
         << "<text x=\"" << num(lx + 28) << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">"
         << xml_escape(c.series[k].label) << "</text>\n";
    }
  }
  os << "</svg>\n";
  return os.str();
}

void write_svg(const std::filesystem::path& path, const LineChart& chart) { write_text(path, render_svg(chart)); }

}  // namespace sqz
