#include "nrbm/parallel.hpp"

#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nrbm {

namespace {
int g_override = 0;
}

void set_thread_override(int threads) { g_override = threads; }

int effective_threads() {
  if (g_override > 0) return g_override;
  static const int from_env = [] {
    const char* env = std::getenv("NRBM_THREADS");
    if (env != nullptr) {
      const int t = std::atoi(env);
      if (t > 0) return t;
    }
    return 0;
  }();
  if (from_env > 0) return from_env;
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace nrbm
