#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gsq/behavioral_queue.hpp"
#include "gsq/harness.hpp"
#include "gsq/oracle.hpp"
#include "gsq/script.hpp"
#include "gsq/systolic.hpp"

namespace gsq {

/// Queue shape a script is replayed on.
struct EquivalenceConfig {
  unsigned data_width = 9;
  unsigned timeout_width = 7;
  unsigned id_width = 8;
  systolic::Geometry geometry{4, 2};
  bool with_systolic = true;
  /// Drain the systolic array and compare full contents every this many ops
  /// (and always at the end). 0 = only at the end.
  std::size_t checkpoint_every = 16;
  /// Replay scripts with boundary inversions instead of rejecting them.
  /// They are expected to diverge from the oracle.
  bool allow_inversions = false;

  [[nodiscard]] QueueConfig queue_config() const;
};

/// First point where the three replays disagree.
struct Divergence {
  std::size_t op_index = 0;  // index of the op at which disagreement was seen
  std::string what;
  std::vector<Element> core_state;
  std::vector<Element> systolic_state;   // empty when unavailable
  std::vector<WideOracleQueue::Entry> oracle_state;
};

struct EquivalenceReport {
  bool equivalent = true;
  std::size_t ops_replayed = 0;
  std::vector<DequeueEvent> stream;  // agreed dequeue stream, up to any divergence
  Tick oracle_max_tick = 0;          // largest absolute expiration the oracle held
  unsigned oracle_bits = 0;          // plain timestamp width that tick needs
  unsigned queue_width = 0;          // W_r actually used by the grouped queues
  std::array<std::uint64_t, 4> propagation_rows{};  // systolic, by PropagationRow
  InsertionCaseCounts insertion_cases{};            // behavioral, by (head MSB, new MSB)
  std::optional<Divergence> divergence;
};

/// Replays the script on the behavioral queue, the systolic array (if
/// enabled) and the wide oracle; stops at the first disagreement in the
/// dequeue stream, a content checkpoint, or a systolic hazard.
/// Throws ConfigError when the script does not fit the configured queue.
EquivalenceReport check_equivalence(const OpScript& script, const EquivalenceConfig& config);

/// Checks every (script, config) pair, in parallel when OpenMP is available.
/// Result [i * configs.size() + j] belongs to scripts[i] on configs[j].
std::vector<EquivalenceReport> check_batch(const std::vector<OpScript>& scripts,
                                           const std::vector<EquivalenceConfig>& configs);

/// Minimizes a failing script: shortest failing prefix, then greedy removal
/// of single operations while the replay still diverges. Returns the input
/// unchanged when it does not diverge.
OpScript shrink(const OpScript& script, const EquivalenceConfig& config);

/// Counterexample document (JSON): configuration, minimized script and the
/// three queue states at the divergence.
void write_counterexample(std::ostream& out, const OpScript& script, const EquivalenceConfig& config,
                          const EquivalenceReport& report);

}  // namespace gsq
