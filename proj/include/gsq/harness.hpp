#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gsq/config.hpp"
#include "gsq/script.hpp"
#include "gsq/systolic.hpp"
#include "gsq/trace.hpp"

namespace gsq {

enum class BackendKind : std::uint8_t { Behavioral, Systolic };

[[nodiscard]] const char* to_string(BackendKind kind) noexcept;
/// Accepts "behavioral" or "systolic"; throws ConfigError otherwise.
[[nodiscard]] BackendKind parse_backend(const std::string& name);

/// One flow-table simulation point. Defaults are the flow-table operating
/// point: 2 ns clock, a tick every 6 cycles, 1024 x 2 slots, 12-bit ids.
struct SimParams {
  std::uint64_t timeout = 127;  // TO, in ticks
  unsigned precision = 6;       // p, cycles per tick
  unsigned data_width = 12;     // W_r
  unsigned timeout_width = 10;  // W_o
  unsigned id_width = 12;       // W_id
  std::size_t units = 1024;     // N
  std::size_t blocks = 2;       // M
  double cycle_time_ns = 2.0;
  BackendKind backend = BackendKind::Behavioral;

  [[nodiscard]] QueueConfig queue_config() const;
  [[nodiscard]] systolic::Geometry geometry() const { return {units, blocks}; }
  /// Throws ConfigError for any violated constraint, TO range included.
  void validate() const;

  friend bool operator==(const SimParams&, const SimParams&) = default;
};

/// Applies "key=value" lines (keys: to, precision, wr, wo, wid, units,
/// blocks, cycle_ns, backend) on top of `base`. '#' starts a comment.
/// Throws ParseError for unknown keys or bad values.
SimParams read_params(std::istream& in, SimParams base = {});

struct DequeueEvent {
  Tick tick = 0;
  Id id = kNoId;

  friend bool operator==(const DequeueEvent&, const DequeueEvent&) = default;
};

struct SimStats {
  std::uint64_t pop_count = 0;
  std::uint64_t push_count = 0;
  std::uint64_t ops_issued = 0;
  std::uint64_t max_occupancy = 0;
  std::uint64_t total_cycles = 0;
  std::uint64_t flows = 0;
  double modeled_mpps = 0.0;
  std::vector<DequeueEvent> dequeue_log;

  friend bool operator==(const SimStats&, const SimStats&) = default;
};

/// Flow key to queue id, first-seen order from 1, never recycled, plus the
/// set of flows that currently hold a timer.
class FlowTable {
 public:
  explicit FlowTable(Id max_id) : max_id_(max_id) {}

  /// Throws ConfigError once more distinct flows appear than ids exist.
  Id assign(const std::string& key);
  [[nodiscard]] std::optional<Id> find(const std::string& key) const;
  /// Marks a flow as holding a timer; true if it was not already.
  bool activate(Id id);
  void deactivate(Id id);
  [[nodiscard]] bool active(Id id) const noexcept { return id < active_.size() && active_[id]; }
  [[nodiscard]] std::size_t active_count() const noexcept { return active_count_; }
  [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }

 private:
  Id max_id_;
  std::unordered_map<std::string, Id> ids_;
  std::vector<bool> active_;
  std::size_t active_count_ = 0;
};

/// A trace with flow ids resolved, ready to drive any number of runs.
struct PreparedTrace {
  std::vector<std::uint64_t> arrival_ns;
  std::vector<Id> flow_id;
  std::size_t flows = 0;
};

/// Throws ConfigError when the trace has more flows than `max_id`.
PreparedTrace prepare_trace(const Trace& trace, Id max_id);

/// Queue under simulation, seen only through its external ports.
class Backend {
 public:
  virtual ~Backend() = default;
  /// An operation may be issued this cycle.
  [[nodiscard]] virtual bool ready() const = 0;
  /// No work in flight anywhere; idle cycles may be skipped.
  [[nodiscard]] virtual bool quiescent() const = 0;
  [[nodiscard]] virtual std::optional<Element> peek() const = 0;
  virtual void push(Id id, Data data) = 0;
  virtual Element pop() = 0;
  virtual void remove(Id id) = 0;
  virtual void step() = 0;
  /// Advance `cycles` idle cycles; requires quiescent().
  virtual void skip(std::uint64_t cycles) = 0;
  /// Finish all in-flight work and return the contents head-first.
  [[nodiscard]] virtual std::vector<Element> settle_contents() = 0;
};

std::unique_ptr<Backend> make_backend(BackendKind kind, const QueueConfig& config, const systolic::Geometry& geometry);

struct RunOptions {
  /// When set, every issued operation is appended as a script op.
  OpScript* record = nullptr;
};

/// Cycle-driven flow-table timeout simulation. Throws CapacityError (naming
/// the cycle) when a new flow arrives while every slot holds a live timer.
SimStats run(const PreparedTrace& trace, const SimParams& params, const RunOptions& options = {});

struct SeriesRow {
  std::uint64_t timeout = 0;
  unsigned precision = 0;
  std::uint64_t pop_count = 0;
  std::uint64_t max_occupancy = 0;
  double modeled_mpps = 0.0;

  friend bool operator==(const SeriesRow&, const SeriesRow&) = default;
};

struct SeriesPoint {
  SimParams params;
  SimStats stats;
};

[[nodiscard]] std::vector<SeriesRow> stats_series(const std::vector<SeriesPoint>& points);

/// Runs every parameter point on the same trace, in parallel when OpenMP is
/// available. Results keep the input order.
std::vector<SeriesPoint> run_sweep(const PreparedTrace& trace, const std::vector<SimParams>& points);

/// Saturation drive of the systolic array: an operation is offered on every
/// cycle, alternating pushes and pops, so acceptance is limited only by the
/// issue cadence.
struct SaturationStats {
  std::uint64_t cycles = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t min_latency = 0;  // cycles from acceptance until unit 0 is ready again
  std::uint64_t max_latency = 0;
  double modeled_mpps = 0.0;
};

SaturationStats saturate(const QueueConfig& config, const systolic::Geometry& geometry, std::uint64_t cycles,
                         std::uint64_t seed);

/// Modeled throughput ceiling in Mops/s: one operation per kOpCycles cycles.
[[nodiscard]] inline double modeled_ceiling_mpps(double cycle_time_ns) noexcept {
  return 1000.0 / (systolic::kOpCycles * cycle_time_ns);
}

}  // namespace gsq
