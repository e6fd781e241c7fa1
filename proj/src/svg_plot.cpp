#include "metafair/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "metafair/embedding.hpp"

namespace metafair {

namespace {

struct Point {
  std::string label;
  double x, y;
  std::string meta_method, debias_method, stage;
};

std::string marker_shape(const std::string& meta_method) {
  // paper legend scheme: source star, avg circle, conc square, lle triangle,
  // gle pentagon, aeme diamond
  if (meta_method == "avg") return "<circle r=\"5\"/>";
  if (meta_method == "conc") return "<rect x=\"-4.5\" y=\"-4.5\" width=\"9\" height=\"9\"/>";
  if (meta_method == "lle") return "<polygon points=\"0,-5.5 5,4 -5,4\"/>";
  if (meta_method == "gle")
    return "<polygon points=\"0,-5.5 5.2,-1.7 3.2,4.5 -3.2,4.5 -5.2,-1.7\"/>";
  if (meta_method == "aeme") return "<polygon points=\"0,-6 5,0 0,6 -5,0\"/>";
  return "<polygon points=\"0,-6 1.8,-1.8 6,-1.8 2.6,1.2 4,5.8 0,3 -4,5.8 -2.6,1.2 -6,-1.8 -1.8,-1.8\"/>";
}

std::string marker_color(const std::string& debias_method) {
  if (debias_method.find("hard") != std::string::npos) return "#2ca02c";   // green
  if (debias_method.find("inlp") != std::string::npos) return "#ffbf00";   // yellow
  if (debias_method.find("dict") != std::string::npos) return "#1f77b4";   // blue
  return "#ff7f0e";                                                        // no debiasing: orange
}

std::string marker_opacity(const std::string& stage) {
  if (stage == "pre") return "0.45";
  if (stage == "post") return "0.7";
  return "1";
}

bool lower_is_better(const std::string& metric) {
  return metric.rfind("weat", 0) == 0 || metric.rfind("wat", 0) == 0 ||
         metric.rfind("sembias", 0) == 0;
}

}  // namespace

std::string plot_scatter_svg(const EvalReport& report_x, const EvalReport& report_y,
                             const PlotOptions& opts) {
  if (opts.x_metric.empty() || opts.y_metric.empty())
    throw InvalidArgument("plot needs both an x and a y metric");

  std::vector<Point> points;
  for (const auto& rx : report_x.rows) {
    if (rx.metric != opts.x_metric) continue;
    const EvalRow* ry = report_y.find(rx.label, opts.y_metric);
    if (!ry) continue;
    points.push_back({rx.label, rx.score, ry->score, rx.meta_method, rx.debias_method, rx.stage});
  }
  if (points.empty())
    throw EmptyPlot("no shared labels carry both " + opts.x_metric + " and " + opts.y_metric);

  double xmin = points.front().x, xmax = xmin, ymin = points.front().y, ymax = ymin;
  for (const auto& p : points) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  auto pad = [](double& lo, double& hi) {
    const double span = hi - lo;
    const double margin = span > 0.0 ? 0.05 * span : std::max(0.5, std::abs(hi) * 0.05);
    lo -= margin;
    hi += margin;
  };
  pad(xmin, xmax);
  pad(ymin, ymax);

  const double ml = 62, mr = 18, mt = 18, mb = 48;
  const double pw = opts.width - ml - mr, ph = opts.height - mt - mb;
  auto sx = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return opts.height - mb - (y - ymin) / (ymax - ymin) * ph; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opts.width) +
         "\" height=\"" + std::to_string(opts.height) + "\" viewBox=\"0 0 " +
         std::to_string(opts.width) + " " + std::to_string(opts.height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // axes
  svg += "<line x1=\"" + format_value(ml) + "\" y1=\"" + format_value(opts.height - mb) +
         "\" x2=\"" + format_value(opts.width - mr) + "\" y2=\"" +
         format_value(opts.height - mb) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + format_value(ml) + "\" y1=\"" + format_value(mt) + "\" x2=\"" +
         format_value(ml) + "\" y2=\"" + format_value(opts.height - mb) +
         "\" stroke=\"black\"/>\n";

  auto tick = [&](double vx, double vy, const std::string& text, const std::string& anchor) {
    return "<text x=\"" + format_value(vx) + "\" y=\"" + format_value(vy) +
           "\" font-size=\"11\" text-anchor=\"" + anchor + "\">" + text + "</text>\n";
  };
  svg += tick(sx(xmin), opts.height - mb + 16, format_value(xmin), "middle");
  svg += tick(sx(xmax), opts.height - mb + 16, format_value(xmax), "middle");
  svg += tick(ml - 6, sy(ymin) + 4, format_value(ymin), "end");
  svg += tick(ml - 6, sy(ymax) + 4, format_value(ymax), "end");
  svg += tick((ml + opts.width - mr) / 2.0, opts.height - 12, opts.x_metric, "middle");
  svg += "<text x=\"14\" y=\"" + format_value((mt + opts.height - mb) / 2.0) +
         "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         format_value((mt + opts.height - mb) / 2.0) + ")\">" + opts.y_metric + "</text>\n";
  if (lower_is_better(opts.x_metric)) {
    svg += tick(opts.width - mr, opts.height - 12, "&#8592; lower is better", "end");
  }

  for (const auto& p : points) {
    svg += "<g data-label=\"" + p.label + "\" transform=\"translate(" + format_value(sx(p.x)) +
           "," + format_value(sy(p.y)) + ")\" fill=\"" + marker_color(p.debias_method) +
           "\" fill-opacity=\"" + marker_opacity(p.stage) +
           "\" stroke=\"black\" stroke-width=\"0.6\">" + marker_shape(p.meta_method) +
           "<title>" + p.label + "</title></g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

void plot_scatter(const EvalReport& report_x, const EvalReport& report_y, const PlotOptions& opts,
                  const std::string& out_path) {
  const std::string svg = plot_scatter_svg(report_x, report_y, opts);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError("cannot open " + out_path + " for writing");
  out << svg;
  if (!out) throw IoError("write failed on " + out_path);
}

}  // namespace metafair
