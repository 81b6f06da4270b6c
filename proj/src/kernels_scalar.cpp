#include "hrd/kernels.hpp"

namespace hrd::kernels::scalar {

SidePair side_compare(const double* x, const double* h, std::size_t n) {
  bool above = true;
  bool below = true;
  for (std::size_t i = 0; i < n && (above || below); ++i) {
    above = above && x[i] >= h[i];
    below = below && x[i] <= h[i];
  }
  return {above, below};
}

double min_diff(const double* x, const double* h, std::size_t n) {
  double lo = x[0] - h[0];
  for (std::size_t i = 1; i < n; ++i) {
    const double d = x[i] - h[i];
    if (d < lo) lo = d;
  }
  return lo;
}

MinMax minmax_diff(const double* x, const double* h, std::size_t n) {
  double lo = x[0] - h[0];
  double hi = lo;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = x[i] - h[i];
    if (d < lo) lo = d;
    if (d > hi) hi = d;
  }
  return {lo, hi};
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = x[i] < 0 ? -x[i] : x[i];
    if (a > m) m = a;
  }
  return m;
}

MinMax minmax(const double* x, std::size_t n) {
  double lo = x[0];
  double hi = x[0];
  for (std::size_t i = 1; i < n; ++i) {
    if (x[i] < lo) lo = x[i];
    if (x[i] > hi) hi = x[i];
  }
  return {lo, hi};
}

}  // namespace hrd::kernels::scalar
