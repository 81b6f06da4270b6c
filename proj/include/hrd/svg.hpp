#pragma once

#include <string>
#include <vector>

namespace hrd::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

// Minimal line chart (polylines + axes + legend), enough for the depth-vs-m,
// error-vs-n and log-tail-vs-r^2 plots.
void write_line_chart(const std::string& path, const ChartSpec& spec,
                      const std::vector<Series>& series);

}  // namespace hrd::svg
