#pragma once

// Test-only oracles, independent of the library implementation paths they
// check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testsup {

// Composite Simpson with a fixed (fine) grid.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20001) {
  if (n % 2 == 0) ++n;
  const double h = (b - a) / (n - 1);
  double acc = f(a) + f(b);
  for (int i = 1; i < n - 1; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> x, std::vector<double> y) {
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] <= y[j])
      ++i;
    else
      ++j;
    const double fx = static_cast<double>(i) / x.size();
    const double fy = static_cast<double>(j) / y.size();
    d = std::max(d, std::abs(fx - fy));
  }
  return d;
}

// Asymptotic Kolmogorov distribution tail Q(lambda) = 2 sum (-1)^{k-1} exp(-2k^2 lambda^2).
inline double ks_pvalue(double d, std::size_t n1, std::size_t n2) {
  const double ne = static_cast<double>(n1) * n2 / static_cast<double>(n1 + n2);
  const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return std::clamp(p, 0.0, 1.0);
}

inline double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace testsup
