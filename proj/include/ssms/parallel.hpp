#pragma once

#ifdef _OPENMP
#include <omp.h>
#define SSMS_PRAGMA_OMP(x) _Pragma(#x)
#else
#define SSMS_PRAGMA_OMP(x)
#endif

namespace ssms {

// Worker count for parallel kernels: explicit setting wins, then the
// SSM_SPACES_THREADS environment variable, then the OpenMP default.
// Always >= 1. Results never depend on the value, only wall time does.
int resolve_threads(int requested = 0);

void set_thread_override(int n);  // 0 clears the override

}  // namespace ssms
