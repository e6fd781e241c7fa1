#include <doctest.h>

#include <regex>

#include "metafair/svg_plot.hpp"

using namespace metafair;

namespace {

EvalReport toy_report() {
  EvalReport report;
  auto add = [&](const std::string& label, const std::string& metric, double score,
                 const std::string& meta, const std::string& debias, const std::string& stage) {
    EvalRow row;
    row.label = label;
    row.metric = metric;
    row.score = score;
    row.meta_method = meta;
    row.debias_method = debias;
    row.stage = stage;
    report.rows.push_back(row);
  };
  add("msnd:avg", "sembias", 40.0, "avg", "none", "");
  add("msnd:avg", "similarity:sl", 61.0, "avg", "none", "");
  add("mssd-pre:hard+conc", "sembias", 25.0, "conc", "hard", "pre");
  add("mssd-pre:hard+conc", "similarity:sl", 58.0, "conc", "hard", "pre");
  add("mssd-both:hard+conc", "sembias", 20.0, "conc", "hard", "both");
  add("mssd-both:hard+conc", "similarity:sl", 57.0, "conc", "hard", "both");
  return report;
}

// geometry oracle: pull marker centres back out of the svg text
std::vector<std::pair<double, double>> parse_markers(const std::string& svg) {
  std::vector<std::pair<double, double>> out;
  std::regex re("translate\\(([-0-9.e+]+),([-0-9.e+]+)\\)");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator();
       ++it) {
    out.emplace_back(std::stod((*it)[1]), std::stod((*it)[2]));
  }
  return out;
}

}  // namespace

TEST_CASE("plot: single point lands at the centre of the padded axes") {
  EvalReport report;
  EvalRow a{"only", "sembias", 10.0, 0, "", "avg", "none", ""};
  EvalRow b{"only", "similarity:sl", 50.0, 0, "", "avg", "none", ""};
  report.rows = {a, b};

  PlotOptions opts;
  opts.x_metric = "sembias";
  opts.y_metric = "similarity:sl";
  const std::string svg = plot_scatter_svg(report, report, opts);
  CHECK(svg.rfind("<svg", 0) == 0);
  const auto markers = parse_markers(svg);
  REQUIRE(markers.size() == 1);
  // degenerate range pads symmetrically, so the point sits mid-plot
  const double ml = 62, mr = 18, mt = 18, mb = 48;
  CHECK(markers[0].first == doctest::Approx(ml + (640 - ml - mr) / 2.0));
  CHECK(markers[0].second == doctest::Approx(480 - mb - (480 - mt - mb) / 2.0));
}

TEST_CASE("plot: marker coordinates match the 5%-padded linear map") {
  const EvalReport report = toy_report();
  PlotOptions opts;
  opts.x_metric = "sembias";
  opts.y_metric = "similarity:sl";
  const std::string svg = plot_scatter_svg(report, report, opts);
  const auto markers = parse_markers(svg);
  REQUIRE(markers.size() == 3);

  // oracle: recompute the affine map from the data
  const double xlo = 20.0 - 0.05 * 20.0, xhi = 40.0 + 0.05 * 20.0;
  const double ylo = 57.0 - 0.05 * 4.0, yhi = 61.0 + 0.05 * 4.0;
  const double ml = 62, mr = 18, mt = 18, mb = 48, w = 640, h = 480;
  const double xs[3] = {40, 25, 20}, ys[3] = {61, 58, 57};
  for (int i = 0; i < 3; ++i) {
    const double ex = ml + (xs[i] - xlo) / (xhi - xlo) * (w - ml - mr);
    const double ey = h - mb - (ys[i] - ylo) / (yhi - ylo) * (h - mt - mb);
    CHECK(markers[static_cast<std::size_t>(i)].first == doctest::Approx(ex).epsilon(1e-6));
    CHECK(markers[static_cast<std::size_t>(i)].second == doctest::Approx(ey).epsilon(1e-6));
  }
}

TEST_CASE("plot: deterministic bytes, legend encoding, bias-axis annotation") {
  const EvalReport report = toy_report();
  PlotOptions opts;
  opts.x_metric = "sembias";
  opts.y_metric = "similarity:sl";
  const std::string a = plot_scatter_svg(report, report, opts);
  const std::string b = plot_scatter_svg(report, report, opts);
  CHECK(a == b);

  CHECK(a.find("lower is better") != std::string::npos);
  CHECK(a.find("<circle") != std::string::npos);  // avg marker
  CHECK(a.find("<rect x=\"-4.5\"") != std::string::npos);  // conc marker
  CHECK(a.find("#ff7f0e") != std::string::npos);  // no-debiasing colour
  CHECK(a.find("#2ca02c") != std::string::npos);  // hard colour
  CHECK(a.find("fill-opacity=\"0.45\"") != std::string::npos);  // pre shade
  CHECK(a.find("fill-opacity=\"1\"") != std::string::npos);     // both shade

  PlotOptions quality;
  quality.x_metric = "similarity:sl";
  quality.y_metric = "sembias";
  const std::string c = plot_scatter_svg(report, report, quality);
  CHECK(c.find("lower is better") == std::string::npos);
}

TEST_CASE("plot: no shared labels is an EmptyPlot error") {
  EvalReport left, right;
  EvalRow a{"x", "sembias", 1.0, 0, "", "", "", ""};
  EvalRow b{"y", "similarity:sl", 2.0, 0, "", "", "", ""};
  left.rows = {a};
  right.rows = {b};
  PlotOptions opts;
  opts.x_metric = "sembias";
  opts.y_metric = "similarity:sl";
  CHECK_THROWS_AS(plot_scatter_svg(left, right, opts), EmptyPlot);
}
