#include "mspsc/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "mspsc/error.hpp"

namespace mspsc::kernels {
namespace {

Isa initial_isa() noexcept {
  if (const char* forced = std::getenv("MSPSC_SIMD")) {
    const std::string_view name(forced);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
      if (name == to_string(isa) && supported(isa)) return isa;
    }
  }
  return best_available();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> current{&table(initial_isa())};
  return current;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw Error(Errc::InvalidArgument, "kernel span sizes differ");
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "scalar";
}

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(MSPSC_HAVE_AVX2_TU)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(MSPSC_HAVE_NEON_TU)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa best_available() noexcept {
  if (supported(Isa::avx2)) return Isa::avx2;
  if (supported(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) {
    throw Error(Errc::InvalidArgument, "SIMD variant '" + std::string(to_string(isa)) +
                                           "' is not available on this machine");
  }
  switch (isa) {
#if defined(MSPSC_HAVE_AVX2_TU)
    case Isa::avx2: return detail::kAvx2Table;
#endif
#if defined(MSPSC_HAVE_NEON_TU)
    case Isa::neon: return detail::kNeonTable;
#endif
    default: return detail::kScalarTable;
  }
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

void set_active(Isa isa) { slot().store(&table(isa), std::memory_order_release); }

void reciprocal_distance(std::span<const double> values, std::span<const std::uint8_t> present,
                         double current, double eps_div, std::span<double> out) {
  check_sizes(values.size(), present.size());
  check_sizes(values.size(), out.size());
  active().reciprocal_distance(values.data(), present.data(), values.size(), current, eps_div,
                               out.data());
}

double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

void divide(std::span<double> x, double denom) { active().divide(x.data(), x.size(), denom); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size());
  active().axpy(a, x.data(), y.data(), x.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return active().squared_distance(a.data(), b.data(), a.size());
}

}  // namespace mspsc::kernels
