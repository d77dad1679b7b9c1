#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gsq/config.hpp"

namespace gsq {

/// One timed external operation. Ticks are absolute and never wrap.
struct ScriptOp {
  enum class Kind : std::uint8_t { Push, PopIfExpired, Remove };

  Tick tick = 0;
  Kind kind = Kind::PopIfExpired;
  Id id = kNoId;
  std::uint64_t timeout = 0;  // Push only

  static ScriptOp push(Tick t, Id id, std::uint64_t timeout) { return {t, Kind::Push, id, timeout}; }
  static ScriptOp pop(Tick t) { return {t, Kind::PopIfExpired, kNoId, 0}; }
  static ScriptOp remove(Tick t, Id id) { return {t, Kind::Remove, id, 0}; }

  friend bool operator==(const ScriptOp&, const ScriptOp&) = default;
};

/// Generator parameters. Rates are probabilities in [0, 1].
struct ScriptParams {
  std::uint64_t seed = 1;
  std::size_t ops = 1000;
  unsigned data_width = 9;     // the widest-wrapping queue the script must stay valid for
  unsigned timeout_width = 7;
  Id max_id = 16;              // ids drawn from [1, max_id]; keep <= queue capacity
  std::uint64_t min_timeout = 1;
  std::uint64_t max_timeout = 0;  // 0 = 2^timeout_width - 1
  Tick start_tick = 0;
  double push_weight = 0.55;
  double pop_weight = 0.35;
  double remove_weight = 0.10;
  double advance_rate = 0.7;       // chance the tick moves before an op
  std::uint64_t max_advance = 5;   // largest single tick step
  double dup_id_rate = 0.3;        // push re-uses a live id (an update)
  double collision_rate = 0.15;    // push lands on an existing expiration
  double wrap_straddle_rate = 0.01; // push expiration crosses a wrap of 2^data_width
  std::uint64_t max_pop_lag = 0;   // 0 = 2^(data_width-2); bound on how long an expired element may wait
  /// Permit pushes that land ahead of the head across a group boundary.
  /// Head-MSB grouping misplaces such elements; off by default.
  bool allow_inversions = false;

  [[nodiscard]] std::uint64_t timeout_cap() const noexcept {
    return max_timeout != 0 ? max_timeout : (std::uint64_t{1} << timeout_width) - 1;
  }
  [[nodiscard]] std::uint64_t pop_lag_cap() const noexcept {
    return max_pop_lag != 0 ? max_pop_lag : (std::uint64_t{1} << (data_width - 2));
  }
  void validate() const;

  friend bool operator==(const ScriptParams&, const ScriptParams&) = default;
};

struct OpScript {
  ScriptParams params;
  std::vector<ScriptOp> ops;

  friend bool operator==(const OpScript&, const OpScript&) = default;
};

/// Deterministic in `params`. Pops are interleaved so that no element stays
/// expired for longer than params.pop_lag_cap() ticks.
OpScript make_script(const ScriptParams& params);

/// Line-delimited text: "# key=value" parameter lines, then "tick,push,id,timeout",
/// "tick,pop" or "tick,remove,id".
void write_script(std::ostream& out, const OpScript& script);
/// Throws ParseError (see trace.hpp) with the offending line.
OpScript read_script(std::istream& in);
OpScript read_script_file(const std::string& path);

/// True when an element expiring at `expiration` would sort ahead of the
/// current head at `head` with a multiple of 2^(data_width-1) in between.
/// Grouping by the head's MSB cannot place such an element correctly: it
/// lands behind the head's group and is dequeued late.
[[nodiscard]] bool boundary_inversion(Tick head, Tick expiration, unsigned data_width) noexcept;

/// Why replaying the script leaves the domain in which a `data_width`-bit
/// grouped queue matches unbounded timestamps, or nullopt when it stays
/// inside: the current tick and all live expirations must span less than
/// half the range, and no push may cause a boundary inversion unless
/// `allow_inversions` is set.
[[nodiscard]] std::optional<std::string> domain_violation(const std::vector<ScriptOp>& ops, unsigned data_width,
                                                          bool allow_inversions = false);

}  // namespace gsq
