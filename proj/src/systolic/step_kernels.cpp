// Serial reference kernel and OpenMP kernel for one simulated clock cycle.
//
// A cycle runs in two sweeps over the busy units. The first sweep only reads
// start-of-cycle state (plus the unit's own plan buffer); the second writes
// each unit's own slots and at most the inbox of the next unit, which by the
// issue cadence is never being consumed in the same cycle. Both sweeps are
// therefore free of cross-unit races and the two kernels agree bit-for-bit.

#include "gsq/systolic.hpp"

#if defined(GSQ_HAVE_OPENMP)
#include <omp.h>
#endif

namespace gsq::systolic {

void SystolicState::step() {
  if (parallel_ && active_.size() >= parallel_threshold_) {
    step_parallel();
  } else {
    step_serial();
  }
}

void SystolicState::step_serial() {
  for (auto u : active_) now_[u] = phase_now(u);
  for (auto u : active_) {
    if (now_[u] == Phase::Search) compute(u);
  }
  for (auto u : active_) commit(u);
  settle();
}

void SystolicState::step_parallel() {
#if defined(GSQ_HAVE_OPENMP)
  const auto n = static_cast<std::ptrdiff_t>(active_.size());
#pragma omp parallel
  {
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto u = active_[static_cast<std::size_t>(i)];
      now_[u] = phase_now(u);
    }
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto u = active_[static_cast<std::size_t>(i)];
      if (now_[u] == Phase::Search) compute(u);
    }
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      commit(active_[static_cast<std::size_t>(i)]);
    }
  }
  settle();
#else
  step_serial();
#endif
}

}  // namespace gsq::systolic
