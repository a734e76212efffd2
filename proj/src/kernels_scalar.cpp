#include <cmath>

#include "kernels_impl.hpp"

namespace mspsc::kernels::detail {
namespace {

void reciprocal_distance(const double* values, const std::uint8_t* present, std::size_t n,
                         double current, double eps_div, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = present[i] ? 1.0 / (std::abs(values[i] - current) + eps_div) : 0.0;
  }
}

double sum(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void divide(double* x, std::size_t n, double denom) {
  for (std::size_t i = 0; i < n; ++i) x[i] /= denom;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double prod = a * x[i];
    y[i] += prod;
  }
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

const KernelTable kScalarTable{Isa::scalar, reciprocal_distance, sum, divide, axpy,
                               squared_distance};

}  // namespace mspsc::kernels::detail
