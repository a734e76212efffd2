#pragma once

// Data-parallel inner loops behind similarity retrieval, scoring and the KNN
// baseline. Every kernel has a scalar reference; vector variants are picked at
// runtime from what the CPU reports, or forced with MSPSC_SIMD=scalar|avx2|neon.
//
// reciprocal_distance, divide, axpy are bit-identical across variants (same
// IEEE operations per lane, no FMA contraction). sum and squared_distance
// reassociate and agree to rounding only.

#include <cstdint>
#include <span>
#include <string_view>

namespace mspsc::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  // out[t] = present[t] ? 1 / (|values[t] - current| + eps_div) : 0
  void (*reciprocal_distance)(const double* values, const std::uint8_t* present, std::size_t n,
                              double current, double eps_div, double* out);
  double (*sum)(const double* x, std::size_t n);
  // x[t] /= denom
  void (*divide)(double* x, std::size_t n, double denom);
  // y[t] += a * x[t]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
};

bool supported(Isa isa) noexcept;
Isa best_available() noexcept;

// The table for a specific ISA; throws Error{InvalidArgument} if unsupported.
const KernelTable& table(Isa isa);

// Currently dispatched variant.
const KernelTable& active() noexcept;
void set_active(Isa isa);

// Span wrappers over the active table.
void reciprocal_distance(std::span<const double> values, std::span<const std::uint8_t> present,
                         double current, double eps_div, std::span<double> out);
double sum(std::span<const double> x);
void divide(std::span<double> x, double denom);
void axpy(double a, std::span<const double> x, std::span<double> y);
double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace mspsc::kernels
