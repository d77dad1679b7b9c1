#include <algorithm>
#include <limits>
#include <random>

#include "gsq/harness.hpp"

namespace gsq {

SaturationStats saturate(const QueueConfig& config, const systolic::Geometry& geometry, std::uint64_t cycles,
                         std::uint64_t seed) {
  systolic::SystolicState state(config, geometry);
  std::mt19937_64 rng(seed);
  const auto span = static_cast<Id>(std::max<std::size_t>(1, geometry.capacity() / 2));
  const Data mask = config.data_mask();

  SaturationStats out;
  out.min_latency = std::numeric_limits<std::uint64_t>::max();
  bool want_pop = false;
  std::uint64_t accepted_at = 0;
  bool waiting = false;
  std::uint64_t done = 0;  // cycle by which the last accepted op has finished
  for (std::uint64_t c = 0; c < cycles; ++c) {
    if (waiting && state.ready()) {
      const auto latency = state.cycle() - accepted_at;
      out.min_latency = std::min(out.min_latency, latency);
      out.max_latency = std::max(out.max_latency, latency);
      waiting = false;
    }
    systolic::IssueResult r;
    if (want_pop && state.peek()) {
      r = state.issue(systolic::ExternalOp::pop());
    } else {
      const Id id = 1 + static_cast<Id>(rng() % span);
      r = state.issue(systolic::ExternalOp::push(id, static_cast<Data>(rng()) & (mask >> 1)));
    }
    if (r.accepted) {
      ++out.accepted;
      want_pop = !want_pop;
      accepted_at = state.cycle();
      waiting = true;
      done = accepted_at + systolic::kOpCycles;
    } else {
      ++out.rejected;
    }
    state.step();
  }
  out.cycles = cycles;
  if (out.min_latency == std::numeric_limits<std::uint64_t>::max()) out.min_latency = 0;
  if (done > 0) {
    out.modeled_mpps =
        static_cast<double>(out.accepted) * 1000.0 / (static_cast<double>(done) * config.cycle_time_ns);
  }
  return out;
}

}  // namespace gsq
