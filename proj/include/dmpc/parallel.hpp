#pragma once

namespace dmpc {

/// How the per-agent kernels are executed. Results are required to be
/// identical in both modes; openmp only changes wall time.
enum class ExecMode { serial, openmp };

/// Runs fn(i) for every agent index in [0, count). In openmp mode iterations
/// run concurrently, so fn must write only to slots owned by agent i and may
/// read shared state written before the call.
template <typename F>
void for_each_agent(ExecMode mode, int count, F&& fn) {
#ifdef DMPC_HAVE_OPENMP
  if (mode == ExecMode::openmp) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
#else
  (void)mode;
#endif
  for (int i = 0; i < count; ++i) fn(i);
}

}  // namespace dmpc
