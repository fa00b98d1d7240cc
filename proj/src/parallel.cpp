#include "ssms/parallel.hpp"

#include <atomic>
#include <cstdlib>

namespace ssms {

namespace {
std::atomic<int> g_override{0};
}

void set_thread_override(int n) { g_override.store(n < 0 ? 0 : n); }

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (int o = g_override.load(); o > 0) return o;
  if (const char* env = std::getenv("SSM_SPACES_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace ssms
