#include "fpp/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "fpp/config.hpp"
#include "fpp/estimators.hpp"
#include "fpp/results.hpp"

namespace fpp {

namespace {

struct PlotPoint {
  double n, x, y;
};

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(6);
  out << v;
  return out.str();
}

}  // namespace

void emit_plot(const std::string& csv_path, const std::string& svg_path) {
  std::vector<ResultRow> rows = read_results_csv(csv_path);

  double r = 1.0;
  bool have_r = false;
  std::vector<PlotPoint> pts;
  std::vector<std::pair<double, double>> fit_points;
  double ref_slope = 0.0;
  bool have_ref = false;
  for (const ResultRow& row : rows) {
    if (!row.n || !row.log_p || !std::isfinite(*row.log_p)) continue;
    if (!have_r) {
      r = row.r.value_or(1.0);
      have_r = true;
      if (row.d && row.alpha && row.xi) {
        // Predicted decay rate of log p per unit n^r.
        ref_slope = -2.0 * *row.d * *row.alpha * std::pow(*row.xi, r);
        have_ref = true;
      }
    }
    double n = static_cast<double>(*row.n);
    pts.push_back({n, std::pow(n, r), *row.log_p});
    fit_points.emplace_back(n, *row.log_p);
  }
  if (pts.size() < 2)
    throw ConfigError("plot: need at least 2 rows with finite log_p");
  std::sort(pts.begin(), pts.end(),
            [](const PlotPoint& a, const PlotPoint& b) { return a.x < b.x; });

  bool have_fit = false;
  RateFit fit;
  try {
    fit = fit_rate(fit_points, r);
    have_fit = true;
  } catch (const std::invalid_argument&) {
    // fewer than 4 usable points: draw the data alone
  }

  double xmin = pts.front().x, xmax = pts.back().x;
  double ymin = pts.front().y, ymax = pts.front().y;
  for (const PlotPoint& p : pts) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  double xpad = 0.05 * (xmax - xmin + 1e-300);
  double ypad = 0.05 * (ymax - ymin + 1e-300);
  xmin -= xpad, xmax += xpad, ymin -= ypad, ymax += ypad;

  const double width = 640, height = 480;
  const double left = 80, right = 620, top = 20, bottom = 430;
  auto sx = [&](double x) {
    return left + (x - xmin) / (xmax - xmin) * (right - left);
  };
  auto sy = [&](double y) {
    return bottom - (y - ymin) / (ymax - ymin) * (bottom - top);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n"
      << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n"
      << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\""
      << right - left << "\" height=\"" << bottom - top
      << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    double fx = xmin + (xmax - xmin) * i / 4.0;
    double fy = ymin + (ymax - ymin) * i / 4.0;
    svg << "<line x1=\"" << sx(fx) << "\" y1=\"" << bottom << "\" x2=\""
        << sx(fx) << "\" y2=\"" << bottom + 5 << "\" stroke=\"#333\"/>\n"
        << "<text x=\"" << sx(fx) << "\" y=\"" << bottom + 20
        << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt(fx)
        << "</text>\n"
        << "<line x1=\"" << left - 5 << "\" y1=\"" << sy(fy) << "\" x2=\""
        << left << "\" y2=\"" << sy(fy) << "\" stroke=\"#333\"/>\n"
        << "<text x=\"" << left - 8 << "\" y=\"" << sy(fy) + 4
        << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(fy)
        << "</text>\n";
  }
  svg << "<text x=\"" << (left + right) / 2 << "\" y=\"" << bottom + 40
      << "\" font-size=\"13\" text-anchor=\"middle\">n^r  (r = " << fmt(r)
      << ")</text>\n"
      << "<text x=\"18\" y=\"" << (top + bottom) / 2
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 "
         "18 "
      << (top + bottom) / 2 << ")\">log p</text>\n";

  if (have_fit) {
    svg << "<line x1=\"" << sx(xmin) << "\" y1=\""
        << sy(fit.intercept + fit.slope * xmin) << "\" x2=\"" << sx(xmax)
        << "\" y2=\"" << sy(fit.intercept + fit.slope * xmax)
        << "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
  }
  if (have_ref) {
    double cx = 0.0, cy = 0.0;
    for (const PlotPoint& p : pts) cx += p.x, cy += p.y;
    cx /= static_cast<double>(pts.size());
    cy /= static_cast<double>(pts.size());
    svg << "<line x1=\"" << sx(xmin) << "\" y1=\""
        << sy(cy + ref_slope * (xmin - cx)) << "\" x2=\"" << sx(xmax)
        << "\" y2=\"" << sy(cy + ref_slope * (xmax - cx))
        << "\" stroke=\"#2ca02c\" stroke-width=\"1.5\" "
           "stroke-dasharray=\"6 4\"/>\n";
  }
  for (const PlotPoint& p : pts)
    svg << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y)
        << "\" r=\"3.5\" fill=\"#1f77b4\"/>\n";

  double ly = top + 18;
  if (have_fit) {
    svg << "<text x=\"" << right - 10 << "\" y=\"" << ly
        << "\" font-size=\"12\" text-anchor=\"end\" fill=\"#d62728\">fit "
           "slope "
        << fmt(fit.slope) << " &#177; " << fmt(fit.slope_std_error)
        << "</text>\n";
    ly += 16;
  }
  if (have_ref)
    svg << "<text x=\"" << right - 10 << "\" y=\"" << ly
        << "\" font-size=\"12\" text-anchor=\"end\" "
           "fill=\"#2ca02c\">reference slope "
        << fmt(ref_slope) << "</text>\n";
  svg << "</svg>\n";

  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write plot file: " + svg_path);
  out << svg.str();
  if (!out) throw std::runtime_error("write failed: " + svg_path);
}

}  // namespace fpp
