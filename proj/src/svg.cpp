#include "hrd/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace hrd::svg {

namespace {

constexpr double kW = 720, kH = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

double transform(double v, bool log_scale) {
  if (!log_scale) return v;
  if (v <= 0) throw std::invalid_argument("svg: log scale requires positive values");
  return std::log10(v);
}

}  // namespace

void write_line_chart(const std::string& path, const ChartSpec& spec,
                      const std::vector<Series>& series) {
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("svg: series length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xmin = std::min(xmin, transform(s.x[i], spec.log_x));
      xmax = std::max(xmax, transform(s.x[i], spec.log_x));
      ymin = std::min(ymin, transform(s.y[i], spec.log_y));
      ymax = std::max(ymax, transform(s.y[i], spec.log_y));
    }
  }
  if (!(xmin <= xmax)) throw std::invalid_argument("svg: no data");
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;

  const auto px = [&](double x) {
    return kLeft + (transform(x, spec.log_x) - xmin) / (xmax - xmin) * (kW - kLeft - kRight);
  };
  const auto py = [&](double y) {
    return kH - kBottom -
           (transform(y, spec.log_y) - ymin) / (ymax - ymin) * (kH - kTop - kBottom);
  };

  std::ofstream out(path);
  if (!out) throw std::invalid_argument("svg: cannot open " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
      << "' viewBox='0 0 " << kW << ' ' << kH << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << kW / 2 << "' y='22' text-anchor='middle' font-size='16'>" << spec.title
      << "</text>\n";
  out << "<text x='" << kW / 2 << "' y='" << kH - 10 << "' text-anchor='middle' font-size='12'>"
      << spec.x_label << (spec.log_x ? " (log)" : "") << "</text>\n";
  out << "<text x='16' y='" << kH / 2 << "' text-anchor='middle' font-size='12' transform='rotate(-90 16 "
      << kH / 2 << ")'>" << spec.y_label << (spec.log_y ? " (log)" : "") << "</text>\n";
  // axes + 5 ticks per side
  out << "<line x1='" << kLeft << "' y1='" << kH - kBottom << "' x2='" << kW - kRight << "' y2='"
      << kH - kBottom << "' stroke='black'/>\n";
  out << "<line x1='" << kLeft << "' y1='" << kTop << "' x2='" << kLeft << "' y2='"
      << kH - kBottom << "' stroke='black'/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double fx = xmin + (xmax - xmin) * i / 5.0;
    const double fy = ymin + (ymax - ymin) * i / 5.0;
    const double sx = kLeft + (kW - kLeft - kRight) * i / 5.0;
    const double sy = kH - kBottom - (kH - kTop - kBottom) * i / 5.0;
    const double vx = spec.log_x ? std::pow(10.0, fx) : fx;
    const double vy = spec.log_y ? std::pow(10.0, fy) : fy;
    out << "<text x='" << sx << "' y='" << kH - kBottom + 16
        << "' text-anchor='middle' font-size='10'>" << vx << "</text>\n";
    out << "<text x='" << kLeft - 6 << "' y='" << sy + 3
        << "' text-anchor='end' font-size='10'>" << vy << "</text>\n";
    out << "<line x1='" << sx << "' y1='" << kH - kBottom << "' x2='" << sx << "' y2='"
        << kH - kBottom + 4 << "' stroke='black'/>\n";
    out << "<line x1='" << kLeft - 4 << "' y1='" << sy << "' x2='" << kLeft << "' y2='" << sy
        << "' stroke='black'/>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kColors[s % 6];
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < series[s].x.size(); ++i)
      out << px(series[s].x[i]) << ',' << py(series[s].y[i]) << ' ';
    out << "'/>\n";
    for (std::size_t i = 0; i < series[s].x.size(); ++i)
      out << "<circle cx='" << px(series[s].x[i]) << "' cy='" << py(series[s].y[i])
          << "' r='2.5' fill='" << color << "'/>\n";
    out << "<text x='" << kW - kRight - 150 << "' y='" << kTop + 14 * (s + 1)
        << "' font-size='11' fill='" << color << "'>" << series[s].name << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace hrd::svg
