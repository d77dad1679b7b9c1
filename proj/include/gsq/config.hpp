#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gsq {

/// Element identifier. Zero is reserved for "no element".
using Id = std::uint32_t;
/// Fixed-width expiration timestamp; only the low `data_width` bits are used.
using Data = std::uint32_t;
/// Unbounded tick counter (bookkeeping and oracles only).
using Tick = std::uint64_t;

inline constexpr Id kNoId = 0;

struct Element {
  Id id = kNoId;
  Data data = 0;

  friend bool operator==(const Element&, const Element&) = default;
};

/// Raised when a configuration or an argument violates a documented range.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a new element would not fit into the queue.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyQueueError : public std::runtime_error {
 public:
  EmptyQueueError() : std::runtime_error("queue is empty") {}
};

/// Widths, capacity and clocking of one timer queue instance.
///
/// Defaults mirror the flow-table operating point: 2 ns clock, a reference
/// timer tick every 6 cycles, 2048 slots and 12-bit ids.
struct QueueConfig {
  unsigned id_width = 12;
  unsigned data_width = 12;     // W_r
  unsigned timeout_width = 10;  // W_o
  std::size_t capacity = 2048;
  unsigned precision = 6;  // clock cycles per reference-timer tick
  double cycle_time_ns = 2.0;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;

  [[nodiscard]] Data data_mask() const noexcept {
    return data_width >= 32 ? ~Data{0} : (Data{1} << data_width) - 1;
  }
  /// P_l: the boundary between the two sorting groups, 2^(W_r-1).
  [[nodiscard]] Data boundary() const noexcept { return Data{1} << (data_width - 1); }
  [[nodiscard]] std::uint64_t max_timeout() const noexcept {
    return (std::uint64_t{1} << timeout_width) - 1;
  }
  [[nodiscard]] Id max_id() const noexcept {
    return id_width >= 32 ? ~Id{0} : (Id{1} << id_width) - 1;
  }
};

}  // namespace gsq
