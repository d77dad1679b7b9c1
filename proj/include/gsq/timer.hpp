#pragma once

#include <cstdint>

#include "gsq/config.hpp"

namespace gsq {

/// Most significant bit of a `width`-bit value; selects the sorting group.
[[nodiscard]] constexpr bool msb(Data value, unsigned width) noexcept {
  return ((value >> (width - 1)) & 1U) != 0;
}

/// Expiration timestamp for a timeout of `timeout` ticks started at `rt`,
/// wrapped to `data_width` bits. Throws ConfigError unless
/// 0 < timeout <= 2^W_o - 1.
[[nodiscard]] Data make_expiration(Data rt, std::uint64_t timeout, const QueueConfig& cfg);

/// True iff `data` lies strictly in the past of `rt` within half the
/// timestamp range: 0 < (rt - data) mod 2^W < 2^(W-1).
[[nodiscard]] bool is_expired(Data data, Data rt, unsigned width) noexcept;

/// Total order used for grouped sorting. With the head in the lower group
/// (MSB clear) keys are the raw values; with the head in the upper group the
/// range is rotated by half so that wrapped (MSB clear) values sort last.
[[nodiscard]] Data sort_key(Data data, bool head_msb, unsigned width) noexcept;

/// Wrapping W_r-bit counter advanced once per tick.
class ReferenceTimer {
 public:
  explicit ReferenceTimer(unsigned width, Tick start = 0) noexcept;

  void tick() noexcept { ++ticks_; }
  void advance(Tick n) noexcept { ticks_ += n; }

  [[nodiscard]] Data value() const noexcept { return static_cast<Data>(ticks_ & mask_); }
  [[nodiscard]] Tick tick_count() const noexcept { return ticks_; }

 private:
  std::uint64_t mask_;
  Tick ticks_;
};

}  // namespace gsq
