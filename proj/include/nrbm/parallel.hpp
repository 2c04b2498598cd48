#ifndef NRBM_PARALLEL_HPP
#define NRBM_PARALLEL_HPP

namespace nrbm {

// Thread budget for the OpenMP kernels. NRBM_THREADS caps parallelism
// (0 or unset = all available cores). Every kernel in this library is
// written so its output is bit-identical for any thread count.
int effective_threads();

// Overrides the cap for the current process (used by tests and the
// benchmark); pass 0 to return to the environment-derived value.
void set_thread_override(int threads);

}  // namespace nrbm

#endif  // NRBM_PARALLEL_HPP
