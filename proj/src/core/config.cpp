#include "gsq/config.hpp"

#include <bit>

namespace gsq {

void QueueConfig::validate() const {
  if (data_width < 3 || data_width > 32) {
    throw ConfigError("data_width must lie in [3, 32], got " + std::to_string(data_width));
  }
  if (timeout_width < 1) {
    throw ConfigError("timeout_width must be at least 1");
  }
  if (data_width <= timeout_width + 1) {
    throw ConfigError("data_width (" + std::to_string(data_width) +
                      ") must exceed timeout_width + 1 (" + std::to_string(timeout_width + 1) + ")");
  }
  if (id_width < 1 || id_width > 32) {
    throw ConfigError("id_width must lie in [1, 32], got " + std::to_string(id_width));
  }
  if (capacity < 2) {
    throw ConfigError("capacity must be at least 2");
  }
  // Every occupant needs a distinct nonzero id.
  const auto needed = static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(capacity)));
  if (id_width < needed) {
    throw ConfigError("id_width " + std::to_string(id_width) + " cannot address capacity " +
                      std::to_string(capacity) + " (needs " + std::to_string(needed) + " bits)");
  }
  if (precision < 1) {
    throw ConfigError("precision must be at least 1 cycle per tick");
  }
  if (!(cycle_time_ns > 0.0)) {
    throw ConfigError("cycle_time_ns must be positive");
  }
}

}  // namespace gsq
