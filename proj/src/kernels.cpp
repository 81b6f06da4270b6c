#include "hrd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace hrd::kernels {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {

Backend resolve_initial_backend() {
  if (const char* env = std::getenv("HRDEPTH_KERNEL")) {
    const std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && avx2_supported()) return Backend::avx2;
    // Unknown or unsupported request falls through to auto-detection.
  }
  return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{resolve_initial_backend()};
  return slot;
}

}  // namespace

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_supported())
    throw std::invalid_argument("kernels: AVX2 backend requested but not supported by this CPU");
  backend_slot().store(b, std::memory_order_relaxed);
}

std::string backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

#if defined(__x86_64__) || defined(_M_X64)
#define HRD_DISPATCH(fn, ...) \
  return active_backend() == Backend::avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define HRD_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

SidePair side_compare(const double* x, const double* h, std::size_t n) {
  HRD_DISPATCH(side_compare, x, h, n);
}

double min_diff(const double* x, const double* h, std::size_t n) {
  HRD_DISPATCH(min_diff, x, h, n);
}

MinMax minmax_diff(const double* x, const double* h, std::size_t n) {
  HRD_DISPATCH(minmax_diff, x, h, n);
}

double max_abs(const double* x, std::size_t n) { HRD_DISPATCH(max_abs, x, n); }

MinMax minmax(const double* x, std::size_t n) { HRD_DISPATCH(minmax, x, n); }

#undef HRD_DISPATCH

}  // namespace hrd::kernels
