#include <arm_neon.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace mspsc::kernels::detail {
namespace {

void reciprocal_distance(const double* values, const std::uint8_t* present, std::size_t n,
                         double current, double eps_div, double* out) {
  const float64x2_t cur = vdupq_n_f64(current);
  const float64x2_t eps = vdupq_n_f64(eps_div);
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t dist = vaddq_f64(vabsq_f64(vsubq_f64(vld1q_f64(values + i), cur)), eps);
    const float64x2_t recip = vdivq_f64(one, dist);
    const uint64x2_t keep = {present[i] ? ~0ull : 0ull, present[i + 1] ? ~0ull : 0ull};
    vst1q_f64(out + i, vreinterpretq_f64_u64(vandq_u64(vreinterpretq_u64_f64(recip), keep)));
  }
  for (; i < n; ++i) {
    out[i] = present[i] ? 1.0 / (std::abs(values[i] - current) + eps_div) : 0.0;
  }
}

double sum(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) total += x[i];
  return total;
}

void divide(double* x, std::size_t n, double denom) {
  const float64x2_t d = vdupq_n_f64(denom);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vdivq_f64(vld1q_f64(x + i), d));
  for (; i < n; ++i) x[i] /= denom;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    // Separate multiply and add; vfmaq would break bit-equality with scalar.
    const float64x2_t prod = vmulq_f64(va, vld1q_f64(x + i));
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
  }
  for (; i < n; ++i) {
    const double prod = a * x[i];
    y[i] += prod;
  }
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vaddq_f64(acc, vmulq_f64(d, d));
  }
  double total = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

}  // namespace

const KernelTable kNeonTable{Isa::neon, reciprocal_distance, sum, divide, axpy, squared_distance};

}  // namespace mspsc::kernels::detail
