#include "svg.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "vlmp/error.hpp"

namespace vlmp::cli {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMargin = 40.0;
constexpr double kLegendWidth = 150.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title) {
  double xmin = std::numeric_limits<double>::infinity();
  double ymin = xmin;
  double xmax = -xmin;
  double ymax = -xmin;
  for (const auto& s : series) {
    for (const auto& t : s.trajectories) {
      for (const auto& p : t.poses) {
        if (p.dim() < 2) throw Error(ErrorKind::DimensionMismatch, "plot needs at least 2D positions");
        xmin = std::min(xmin, p.position[0]);
        xmax = std::max(xmax, p.position[0]);
        ymin = std::min(ymin, p.position[1]);
        ymax = std::max(ymax, p.position[1]);
      }
    }
  }
  if (!(xmin <= xmax)) throw Error(ErrorKind::InvalidArgument, "plot: nothing to draw");
  const double plot_w = kWidth - 2.0 * kMargin - kLegendWidth;
  const double plot_h = kHeight - 2.0 * kMargin;
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double scale = std::min(plot_w, plot_h) / span;
  const double cx = 0.5 * (xmin + xmax);
  const double cy = 0.5 * (ymin + ymax);
  auto px = [&](double x) { return kMargin + 0.5 * plot_w + (x - cx) * scale; };
  auto py = [&](double y) { return kMargin + 0.5 * plot_h - (y - cy) * scale; };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" +
                    fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(kMargin) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" + escape(title) +
         "</text>\n";
  for (const auto& s : series) {
    svg += "<g stroke=\"" + escape(s.color) + "\" fill=\"none\" stroke-width=\"" + fmt(s.stroke_width) + "\"" +
           (s.dashed ? " stroke-dasharray=\"4 3\"" : "") + ">\n";
    for (const auto& t : s.trajectories) {
      if (t.empty()) continue;
      svg += "<polyline points=\"";
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) svg += ' ';
        svg += fmt(px(t.poses[i].position[0])) + "," + fmt(py(t.poses[i].position[1]));
      }
      svg += "\"/>\n";
    }
    svg += "</g>\n";
    for (const auto& t : s.trajectories) {
      if (t.empty()) continue;
      const auto& a = t.poses.front().position;
      const auto& b = t.poses.back().position;
      svg += "<text class=\"start\" x=\"" + fmt(px(a[0])) + "\" y=\"" + fmt(py(a[1])) +
             "\" fill=\"" + escape(s.color) + "\" font-size=\"16\" text-anchor=\"middle\" dominant-baseline=\"central\">+</text>\n";
      svg += "<text class=\"end\" x=\"" + fmt(px(b[0])) + "\" y=\"" + fmt(py(b[1])) +
             "\" fill=\"" + escape(s.color) + "\" font-size=\"16\" text-anchor=\"middle\" dominant-baseline=\"central\">*</text>\n";
    }
  }
  double ly = kMargin + 10.0;
  const double lx = kWidth - kLegendWidth;
  for (const auto& s : series) {
    svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(lx + 24.0) + "\" y2=\"" + fmt(ly) +
           "\" stroke=\"" + escape(s.color) + "\" stroke-width=\"2\"" + (s.dashed ? " stroke-dasharray=\"4 3\"" : "") +
           "/>\n";
    svg += "<text x=\"" + fmt(lx + 30.0) + "\" y=\"" + fmt(ly + 4.0) + "\" font-family=\"sans-serif\" font-size=\"12\">" +
           escape(s.label) + "</text>\n";
    ly += 18.0;
  }
  svg += "<text x=\"" + fmt(lx) + "\" y=\"" + fmt(ly + 4.0) + "\" font-family=\"sans-serif\" font-size=\"12\">+ start   * end</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace vlmp::cli
