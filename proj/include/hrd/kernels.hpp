#pragma once

#include <cstddef>
#include <string>

namespace hrd::kernels {

// Grid-sweep primitives behind the depth and margin computations. Each op has
// a scalar reference implementation and an AVX2 variant; the active backend
// is chosen once at startup (override with HRDEPTH_KERNEL=scalar|avx2 or
// set_backend). Variants are required to produce identical results.

enum class Backend { scalar, avx2 };

Backend active_backend();
void set_backend(Backend b);  // throws std::invalid_argument if unsupported
bool avx2_supported();
std::string backend_name(Backend b);

struct SidePair {
  bool above;
  bool below;
};

struct MinMax {
  double lo;
  double hi;
};

// above <=> x[i] >= h[i] for all i; below <=> x[i] <= h[i] for all i.
// Early-exits once both sides are violated. Empty input is (true, true).
SidePair side_compare(const double* x, const double* h, std::size_t n);

// min / max over i of x[i] - h[i]. Require n >= 1.
double min_diff(const double* x, const double* h, std::size_t n);
MinMax minmax_diff(const double* x, const double* h, std::size_t n);

// max |x[i]| (0 for empty input) and elementwise min/max (n >= 1).
double max_abs(const double* x, std::size_t n);
MinMax minmax(const double* x, std::size_t n);

namespace scalar {
SidePair side_compare(const double* x, const double* h, std::size_t n);
double min_diff(const double* x, const double* h, std::size_t n);
MinMax minmax_diff(const double* x, const double* h, std::size_t n);
double max_abs(const double* x, std::size_t n);
MinMax minmax(const double* x, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
SidePair side_compare(const double* x, const double* h, std::size_t n);
double min_diff(const double* x, const double* h, std::size_t n);
MinMax minmax_diff(const double* x, const double* h, std::size_t n);
double max_abs(const double* x, std::size_t n);
MinMax minmax(const double* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace hrd::kernels
