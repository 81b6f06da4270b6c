// AVX2 variants of the grid-sweep kernels. This translation unit is compiled
// with -mavx2; callers must check avx2_supported() before dispatching here.

#include "hrd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace hrd::kernels::avx2 {

SidePair side_compare(const double* x, const double* h, std::size_t n) {
  std::size_t i = 0;
  int above = 1;
  int below = 1;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    const __m256d hv = _mm256_loadu_pd(h + i);
    const int ge = _mm256_movemask_pd(_mm256_cmp_pd(xv, hv, _CMP_GE_OQ));
    const int le = _mm256_movemask_pd(_mm256_cmp_pd(xv, hv, _CMP_LE_OQ));
    above &= (ge == 0xF);
    below &= (le == 0xF);
    if (!(above | below)) return {false, false};
  }
  for (; i < n && (above | below); ++i) {
    above &= (x[i] >= h[i]);
    below &= (x[i] <= h[i]);
  }
  return {above != 0, below != 0};
}

namespace {

inline double hmin(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_min_pd(lo, hi);
  const __m128d s = _mm_min_sd(m, _mm_unpackhi_pd(m, m));
  return _mm_cvtsd_f64(s);
}

inline double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m = _mm_max_pd(lo, hi);
  const __m128d s = _mm_max_sd(m, _mm_unpackhi_pd(m, m));
  return _mm_cvtsd_f64(s);
}

}  // namespace

double min_diff(const double* x, const double* h, std::size_t n) {
  std::size_t i = 0;
  double lo = x[0] - h[0];
  if (n >= 4) {
    __m256d acc = _mm256_sub_pd(_mm256_loadu_pd(x), _mm256_loadu_pd(h));
    for (i = 4; i + 4 <= n; i += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(h + i));
      acc = _mm256_min_pd(acc, d);
    }
    lo = hmin(acc);
  }
  for (; i < n; ++i) {
    const double d = x[i] - h[i];
    if (d < lo) lo = d;
  }
  return lo;
}

MinMax minmax_diff(const double* x, const double* h, std::size_t n) {
  std::size_t i = 0;
  double lo = x[0] - h[0];
  double hi = lo;
  if (n >= 4) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(x), _mm256_loadu_pd(h));
    __m256d acc_lo = d0;
    __m256d acc_hi = d0;
    for (i = 4; i + 4 <= n; i += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(h + i));
      acc_lo = _mm256_min_pd(acc_lo, d);
      acc_hi = _mm256_max_pd(acc_hi, d);
    }
    lo = hmin(acc_lo);
    hi = hmax(acc_hi);
  }
  for (; i < n; ++i) {
    const double d = x[i] - h[i];
    if (d < lo) lo = d;
    if (d > hi) hi = d;
  }
  return {lo, hi};
}

double max_abs(const double* x, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i));
    acc = _mm256_max_pd(acc, a);
  }
  double m = hmax(acc);
  for (; i < n; ++i) {
    const double a = x[i] < 0 ? -x[i] : x[i];
    if (a > m) m = a;
  }
  return m;
}

MinMax minmax(const double* x, std::size_t n) {
  std::size_t i = 0;
  double lo = x[0];
  double hi = x[0];
  if (n >= 4) {
    __m256d acc_lo = _mm256_loadu_pd(x);
    __m256d acc_hi = acc_lo;
    for (i = 4; i + 4 <= n; i += 4) {
      const __m256d v = _mm256_loadu_pd(x + i);
      acc_lo = _mm256_min_pd(acc_lo, v);
      acc_hi = _mm256_max_pd(acc_hi, v);
    }
    lo = hmin(acc_lo);
    hi = hmax(acc_hi);
  }
  for (; i < n; ++i) {
    if (x[i] < lo) lo = x[i];
    if (x[i] > hi) hi = x[i];
  }
  return {lo, hi};
}

}  // namespace hrd::kernels::avx2

#endif  // x86_64
