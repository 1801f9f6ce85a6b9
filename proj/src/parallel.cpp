#include "curvopt/parallel.hpp"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace curvopt::par {

namespace {
std::atomic<bool> g_enabled{true};
}

bool enabled() { return g_enabled.load(std::memory_order_relaxed); }
void set_enabled(bool on) { g_enabled.store(on, std::memory_order_relaxed); }

void set_threads(int t) {
#ifdef _OPENMP
  if (t > 0) omp_set_num_threads(t);
#else
  (void)t;
#endif
}

int threads_in_use() {
#ifdef _OPENMP
  return enabled() ? omp_get_max_threads() : 1;
#else
  return 1;
#endif
}

}  // namespace curvopt::par
