#pragma once

#include "metafair/report.hpp"

namespace metafair {

struct PlotOptions {
  std::string x_metric;
  std::string y_metric;
  int width = 640;
  int height = 480;
};

// Scatter of shared labels: marker shape encodes the meta method, fill colour
// the debias method, fill opacity the debias stage. Axis limits are the data
// range padded by 5%. Output bytes are deterministic for identical inputs.
std::string plot_scatter_svg(const EvalReport& report_x, const EvalReport& report_y,
                             const PlotOptions& opts);

void plot_scatter(const EvalReport& report_x, const EvalReport& report_y, const PlotOptions& opts,
                  const std::string& out_path);

}  // namespace metafair
