#pragma once

// Minimal polyline SVG plots (optionally log-scaled axes) for sweep tables.
// No external renderer; the output is a self-contained figure artifact.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace logdiff {

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
};

struct SvgOptions {
  int width = 640;
  int height = 420;
  bool log_x = false;
  bool log_y = false;
  std::string title;
  std::string x_label;
  std::string y_label;
};

inline void write_svg_plot(const std::string& path,
                           const std::vector<SvgSeries>& series,
                           const SvgOptions& opt = {}) {
  const double margin_l = 64, margin_r = 16, margin_t = 36, margin_b = 48;
  const double pw = opt.width - margin_l - margin_r;
  const double ph = opt.height - margin_t - margin_b;

  const auto tx = [&](double v) { return opt.log_x ? std::log10(v) : v; };
  const auto ty = [&](double v) { return opt.log_y ? std::log10(v) : v; };

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (opt.log_x && !(s.x[i] > 0.0)) continue;
      if (opt.log_y && !(s.y[i] > 0.0)) continue;
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  }
  if (!(xmin < xmax)) { xmin -= 0.5; xmax += 0.5; }
  if (!(ymin < ymax)) { ymin -= 0.5; ymax += 0.5; }

  const auto px = [&](double v) {
    return margin_l + (tx(v) - xmin) / (xmax - xmin) * pw;
  };
  const auto py = [&](double v) {
    return margin_t + (1.0 - (ty(v) - ymin) / (ymax - ymin)) * ph;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width
      << "\" height=\"" << opt.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<rect x=\"" << margin_l << "\" y=\"" << margin_t << "\" width=\""
      << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";

  // axis ticks (5 per axis)
  for (int i = 0; i <= 4; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 4.0;
    const double fy = ymin + (ymax - ymin) * i / 4.0;
    const double X = margin_l + pw * i / 4.0;
    const double Y = margin_t + ph * (1.0 - i / 4.0);
    svg << "<line x1=\"" << X << "\" y1=\"" << margin_t + ph << "\" x2=\"" << X
        << "\" y2=\"" << margin_t + ph + 4 << "\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << X << "\" y=\"" << margin_t + ph + 18
        << "\" font-size=\"11\" text-anchor=\"middle\">"
        << (opt.log_x ? "1e" + std::to_string(static_cast<int>(std::round(fx)))
                      : [&] { std::ostringstream o; o.precision(3); o << fx; return o.str(); }())
        << "</text>\n";
    svg << "<line x1=\"" << margin_l - 4 << "\" y1=\"" << Y << "\" x2=\""
        << margin_l << "\" y2=\"" << Y << "\" stroke=\"#444\"/>\n";
    svg << "<text x=\"" << margin_l - 8 << "\" y=\"" << Y + 4
        << "\" font-size=\"11\" text-anchor=\"end\">"
        << (opt.log_y ? "1e" + std::to_string(static_cast<int>(std::round(fy)))
                      : [&] { std::ostringstream o; o.precision(3); o << fy; return o.str(); }())
        << "</text>\n";
  }

  for (const auto& s : series) {
    svg << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (opt.log_x && !(s.x[i] > 0.0)) continue;
      if (opt.log_y && !(s.y[i] > 0.0)) continue;
      svg << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    svg << "\"/>\n";
  }

  if (!opt.title.empty())
    svg << "<text x=\"" << opt.width / 2 << "\" y=\"20\" font-size=\"14\" "
        << "text-anchor=\"middle\">" << opt.title << "</text>\n";
  if (!opt.x_label.empty())
    svg << "<text x=\"" << margin_l + pw / 2 << "\" y=\"" << opt.height - 10
        << "\" font-size=\"12\" text-anchor=\"middle\">" << opt.x_label
        << "</text>\n";
  if (!opt.y_label.empty())
    svg << "<text x=\"14\" y=\"" << margin_t + ph / 2
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << margin_t + ph / 2 << ")\">" << opt.y_label << "</text>\n";
  svg << "</svg>\n";

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open svg file: " + path);
  out << svg.str();
}

}  // namespace logdiff
