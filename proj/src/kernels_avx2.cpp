// Compiled with -mavx2 only; never called unless the CPU reports AVX2.
#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "kernels_impl.hpp"

namespace mspsc::kernels::detail {
namespace {

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(pair, pair);
  return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

void reciprocal_distance(const double* values, const std::uint8_t* present, std::size_t n,
                         double current, double eps_div, double* out) {
  const __m256d cur = _mm256_set1_pd(current);
  const __m256d eps = _mm256_set1_pd(eps_div);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256i zero = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    std::int32_t flags;
    std::memcpy(&flags, present + i, sizeof(flags));
    const __m256i wide = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(flags));
    const __m256d keep = _mm256_castsi256_pd(
        _mm256_xor_si256(_mm256_cmpeq_epi64(wide, zero), _mm256_set1_epi64x(-1)));
    const __m256d dist = _mm256_add_pd(abs_pd(_mm256_sub_pd(_mm256_loadu_pd(values + i), cur)), eps);
    _mm256_storeu_pd(out + i, _mm256_and_pd(_mm256_div_pd(one, dist), keep));
  }
  for (; i < n; ++i) {
    out[i] = present[i] ? 1.0 / (std::abs(values[i] - current) + eps_div) : 0.0;
  }
}

double sum(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  if (i + 4 <= n) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    i += 4;
  }
  double total = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) total += x[i];
  return total;
}

void divide(double* x, std::size_t n, double denom) {
  const __m256d d = _mm256_set1_pd(denom);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_div_pd(_mm256_loadu_pd(x + i), d));
  }
  for (; i < n; ++i) x[i] /= denom;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) {
    const double prod = a * x[i];
    y[i] += prod;
  }
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double total = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

}  // namespace

const KernelTable kAvx2Table{Isa::avx2, reciprocal_distance, sum, divide, axpy, squared_distance};

}  // namespace mspsc::kernels::detail
