#pragma once

#include "mspsc/kernels.hpp"

namespace mspsc::kernels::detail {

extern const KernelTable kScalarTable;
#if defined(MSPSC_HAVE_AVX2_TU)
extern const KernelTable kAvx2Table;
#endif
#if defined(MSPSC_HAVE_NEON_TU)
extern const KernelTable kNeonTable;
#endif

}  // namespace mspsc::kernels::detail
