// Serial vs OpenMP systolic step kernels on a deep, busy array.

#include <benchmark/benchmark.h>

#include <random>

#include "gsq/systolic.hpp"

namespace {

using gsq::systolic::ExternalOp;
using gsq::systolic::Geometry;
using gsq::systolic::SystolicState;

// Fill the array, then keep pushing far-future timestamps so operations ripple
// down to the tail and many units are busy at once.
SystolicState busy_state(std::size_t units) {
  gsq::QueueConfig cfg;
  cfg.data_width = 16;
  cfg.timeout_width = 8;
  cfg.id_width = 16;
  SystolicState s(cfg, Geometry{units, 2});
  for (gsq::Id id = 1; id <= units; ++id) {
    while (!s.ready()) s.step_serial();
    s.issue(ExternalOp::push(id, static_cast<gsq::Data>(id)));
  }
  s.drain();
  return s;
}

template <bool Parallel>
void BM_Step(benchmark::State& state) {
  const auto units = static_cast<std::size_t>(state.range(0));
  auto s = busy_state(units);
  s.set_parallel_threshold(1);
  gsq::Id next = static_cast<gsq::Id>(units) + 1;
  const gsq::Id top = static_cast<gsq::Id>(units * 2);
  for (auto _ : state) {
    if (s.ready()) {
      // Alternate a tail-bound push with a pop so occupancy stays level.
      if (next % 2 == 0) {
        s.issue(ExternalOp::pop());
      } else {
        s.issue(ExternalOp::push(next, 30000));
      }
      next = next >= top ? static_cast<gsq::Id>(units) + 1 : next + 1;
    }
    if constexpr (Parallel) {
      s.step_parallel();
    } else {
      s.step_serial();
    }
  }
  state.SetItemsProcessed(state.iterations());
}

}  // namespace

BENCHMARK(BM_Step<false>)->Name("step_serial")->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(BM_Step<true>)->Name("step_parallel")->Arg(256)->Arg(1024)->Arg(4096);

BENCHMARK_MAIN();
