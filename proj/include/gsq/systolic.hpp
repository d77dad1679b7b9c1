#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsq/config.hpp"

namespace gsq::systolic {

/// Cycles an operation spends in one unit: search, shift/set, finish.
inline constexpr unsigned kOpCycles = 3;

/// Internal consistency failure of the simulated datapath (a write conflict,
/// an illegal operation pair, a non one-hot id match). Always a bug.
class HazardError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Geometry {
  std::size_t units = 1024;  // N
  std::size_t blocks = 2;    // M, shift blocks per unit

  [[nodiscard]] std::size_t capacity() const noexcept { return units * blocks; }
  void validate() const;
};

/// Empty-slot encoding: id 0, data all-ones.
[[nodiscard]] inline Element empty_slot(unsigned data_width) noexcept {
  return Element{kNoId, data_width >= 32 ? ~Data{0} : (Data{1} << data_width) - 1};
}

enum class OpKind : std::uint8_t { Enqueue = 1, Remove = 2, Dequeue = 4, PushFirst = 8 };

/// A set of operation kinds, as carried by an interface register.
struct OpSet {
  std::uint8_t bits = 0;

  constexpr OpSet() = default;
  constexpr OpSet(std::initializer_list<OpKind> kinds) {
    for (auto k : kinds) bits |= static_cast<std::uint8_t>(k);
  }
  [[nodiscard]] constexpr bool has(OpKind k) const noexcept { return (bits & static_cast<std::uint8_t>(k)) != 0; }
  constexpr void add(OpKind k) noexcept { bits |= static_cast<std::uint8_t>(k); }
  [[nodiscard]] constexpr bool empty() const noexcept { return bits == 0; }
  /// One of the combinations an interface register may legally hold.
  [[nodiscard]] bool legal() const noexcept;
  [[nodiscard]] std::string to_string() const;

  friend constexpr bool operator==(OpSet, OpSet) = default;
};

/// Operation pair latched for one unit, with payloads.
struct UnitOps {
  std::optional<Element> enqueue;
  std::optional<Id> remove;
  std::optional<Element> push_first;
  std::optional<Id> dequeue;  // id of the head the upstream unit pulled
  bool highest = false;       // Highest_i: MSB of the global head at issue

  [[nodiscard]] OpSet kinds() const noexcept;
  [[nodiscard]] bool empty() const noexcept { return kinds().empty(); }
  [[nodiscard]] std::string to_string() const;

  friend bool operator==(const UnitOps&, const UnitOps&) = default;
};

/// Rows of the operation propagation table for a combined enqueue+remove.
enum class PropagationRow : std::uint8_t { BothFound = 0, IdOnly = 1, RankOnly = 2, Neither = 3 };

/// Overflow-control comparator for one shift block: true when an element
/// with `push_data` belongs at or before `slot`.
[[nodiscard]] bool compare_slot(const Element& slot, Data push_data, bool highest, unsigned width) noexcept;

/// compare_flag over the given slots; bit j set when compare_slot(slots[j]).
[[nodiscard]] std::uint64_t unit_compare(std::span<const Element> slots, Data push_data, bool highest,
                                         unsigned width) noexcept;

/// Operation kinds handed downstream. `spilled`: the unit overflowed its tail.
/// `downstream_nonempty`: the next unit (as it will be once its in-flight
/// work lands) holds at least one element. Throws HazardError for an illegal
/// input set.
[[nodiscard]] OpSet propagate(bool found_id, bool found_rank, OpSet in, bool spilled, bool downstream_nonempty);

/// Everything one unit decides in its search cycle.
struct UnitPlan {
  std::vector<Element> next_blocks;  // slot contents after shift/set
  UnitOps out;                       // latched into the interface register at finish
  std::uint64_t id_match = 0;        // M+1 bits, bit M = next unit's head
  std::uint64_t compare_flag = 0;    // M+1 bits, bit M = next unit's head
  std::optional<Element> removed;    // element dropped by an id match
  std::optional<PropagationRow> row;
  bool spilled = false;
  bool pulled = false;
};

/// Pure planning step for one unit. `next_head` is the head of the next unit
/// as it will stand after its in-flight operation; empty_slot() when there is
/// none. Requires at least two blocks. Throws HazardError on a datapath
/// inconsistency.
void plan_unit(std::span<const Element> blocks, const UnitOps& ops, const Element& next_head, unsigned width,
               UnitPlan& plan);

/// Head of a unit once `ops` has been applied; independent of the next unit
/// when the unit has at least two blocks.
[[nodiscard]] Element head_after(std::span<const Element> blocks, const UnitOps& ops, unsigned width) noexcept;

enum class Phase : std::uint8_t { Idle, Search, ShiftSet, Finish };
[[nodiscard]] const char* to_string(Phase p) noexcept;

struct SystolicUnit {
  Phase phase = Phase::Idle;  // phase executed in the most recent cycle
  UnitOps ops;                // pair under processing
  std::optional<UnitOps> inbox;
  UnitPlan plan;
};

struct ExternalOp {
  enum class Kind : std::uint8_t { Push, Pop, Remove };
  Kind kind = Kind::Pop;
  Id id = kNoId;
  Data data = 0;

  static ExternalOp push(Id id, Data data) { return {Kind::Push, id, data}; }
  static ExternalOp pop() { return {Kind::Pop, kNoId, 0}; }
  static ExternalOp remove(Id id) { return {Kind::Remove, id, 0}; }
};

struct IssueResult {
  bool accepted = false;
  std::optional<Element> popped;  // head returned by an accepted Pop

  explicit operator bool() const noexcept { return accepted; }
};

struct SystolicCounters {
  std::array<std::uint64_t, 4> rows{};  // indexed by PropagationRow
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t unit_ops = 0;  // search cycles across all units
};

/// Cycle-accurate model of N cascaded systolic units of M shift blocks.
///
/// An accepted operation enters unit 0, which spends one cycle searching,
/// one shifting/setting and one finishing; at finish the residual operation
/// pair is latched for the next unit, which starts its own search on the
/// following cycle. A new external operation can be accepted every
/// kOpCycles cycles.
class SystolicState {
 public:
  SystolicState(QueueConfig config, Geometry geometry);

  IssueResult issue(const ExternalOp& op);

  /// Advance one cycle; uses the OpenMP kernel when enabled and enough units
  /// are busy, otherwise the serial one. Both produce identical state.
  void step();
  void step_serial();
  void step_parallel();
  /// Step until quiescent.
  void drain();
  /// Let `cycles` cycles pass with nothing in flight. Throws std::logic_error
  /// unless quiescent.
  void skip_idle(std::uint64_t cycles);

  [[nodiscard]] bool quiescent() const noexcept { return active_.empty(); }
  [[nodiscard]] bool ready() const noexcept { return issue_gate_ == 0; }
  [[nodiscard]] unsigned issue_gate() const noexcept { return issue_gate_; }
  [[nodiscard]] std::uint64_t cycle() const noexcept { return cycle_; }

  /// Committed head of unit 0.
  [[nodiscard]] std::optional<Element> peek() const noexcept;
  /// Occupied slots head-first. Throws std::logic_error unless quiescent.
  [[nodiscard]] std::vector<Element> snapshot() const;
  /// Live elements, counting an element from acceptance until it is popped
  /// or its removal is resolved somewhere in the array.
  [[nodiscard]] std::size_t occupancy() const noexcept { return occupancy_; }
  /// Distinct ids physically held in slots or interface registers.
  [[nodiscard]] std::size_t count_live_slots() const;

  [[nodiscard]] std::span<const Element> blocks(std::size_t unit) const noexcept;
  [[nodiscard]] const SystolicUnit& unit(std::size_t i) const noexcept { return units_[i]; }
  [[nodiscard]] const Geometry& geometry() const noexcept { return geometry_; }
  [[nodiscard]] const QueueConfig& config() const noexcept { return config_; }
  [[nodiscard]] const SystolicCounters& counters() const noexcept { return counters_; }
  /// Elements dropped by external Remove operations, in resolution order.
  [[nodiscard]] const std::vector<Element>& removed() const noexcept { return removed_; }

  /// Per-cycle event log ("cycle=..,unit=..,phase=..,ops=.."), one line per
  /// busy unit per cycle, written in unit order.
  void set_event_log(std::ostream* out) noexcept { log_ = out; }
  void set_parallel(bool enabled) noexcept { parallel_ = enabled; }
  void set_parallel_threshold(std::size_t busy_units) noexcept { parallel_threshold_ = busy_units; }

  friend bool operator==(const SystolicState& a, const SystolicState& b);

 private:
  [[nodiscard]] Phase phase_now(std::size_t u) const noexcept;
  [[nodiscard]] Element projected_head(std::size_t u) const noexcept;
  void compute(std::size_t u);
  void commit(std::size_t u);
  void settle();

  QueueConfig config_;
  Geometry geometry_;
  std::vector<Element> slots_;  // units * blocks, head-first
  std::vector<SystolicUnit> units_;
  std::vector<Phase> now_;      // phase each unit executes in the current cycle
  std::vector<std::size_t> active_;
  std::vector<std::string> errors_;
  std::uint64_t cycle_ = 0;
  unsigned issue_gate_ = 0;
  std::size_t occupancy_ = 0;
  SystolicCounters counters_;
  std::vector<Element> removed_;
  std::ostream* log_ = nullptr;
  bool parallel_ = true;
  std::size_t parallel_threshold_ = 64;
};

}  // namespace gsq::systolic
