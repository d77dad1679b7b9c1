#include "gsq/timer.hpp"

#include <string>

namespace gsq {

namespace {

constexpr std::uint64_t width_mask(unsigned width) noexcept {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

}  // namespace

Data make_expiration(Data rt, std::uint64_t timeout, const QueueConfig& cfg) {
  if (timeout == 0 || timeout > cfg.max_timeout()) {
    throw ConfigError("timeout " + std::to_string(timeout) + " outside (0, " +
                      std::to_string(cfg.max_timeout()) + "]");
  }
  const auto mask = width_mask(cfg.data_width);
  return static_cast<Data>((static_cast<std::uint64_t>(rt) + timeout) & mask);
}

bool is_expired(Data data, Data rt, unsigned width) noexcept {
  const auto mask = width_mask(width);
  const auto behind = (static_cast<std::uint64_t>(rt) - data) & mask;
  return behind > 0 && behind < (std::uint64_t{1} << (width - 1));
}

Data sort_key(Data data, bool head_msb, unsigned width) noexcept {
  if (!head_msb) {
    return data;
  }
  const auto mask = width_mask(width);
  return static_cast<Data>((static_cast<std::uint64_t>(data) + (std::uint64_t{1} << (width - 1))) & mask);
}

ReferenceTimer::ReferenceTimer(unsigned width, Tick start) noexcept
    : mask_(width_mask(width)), ticks_(start) {}

}  // namespace gsq
