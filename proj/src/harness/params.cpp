#include <charconv>
#include <istream>
#include <string_view>

#include "gsq/harness.hpp"

namespace gsq {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t to_unsigned(std::string_view key, std::string_view value, std::size_t line) {
  std::uint64_t v = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (value.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError(std::string(key) + " expects an unsigned integer, got '" + std::string(value) + "'", line);
  }
  return v;
}

unsigned to_width(std::string_view key, std::string_view value, std::size_t line) {
  const auto v = to_unsigned(key, value, line);
  if (v > 64) throw ParseError(std::string(key) + " is out of range: " + std::string(value), line);
  return static_cast<unsigned>(v);
}

}  // namespace

const char* to_string(BackendKind kind) noexcept {
  return kind == BackendKind::Systolic ? "systolic" : "behavioral";
}

BackendKind parse_backend(const std::string& name) {
  if (name == "behavioral") return BackendKind::Behavioral;
  if (name == "systolic") return BackendKind::Systolic;
  throw ConfigError("unknown backend '" + name + "' (expected behavioral or systolic)");
}

QueueConfig SimParams::queue_config() const {
  QueueConfig c;
  c.id_width = id_width;
  c.data_width = data_width;
  c.timeout_width = timeout_width;
  c.capacity = units * blocks;
  c.precision = precision;
  c.cycle_time_ns = cycle_time_ns;
  return c;
}

void SimParams::validate() const {
  geometry().validate();
  const auto c = queue_config();
  c.validate();
  if (timeout == 0 || timeout > c.max_timeout()) {
    throw ConfigError("timeout " + std::to_string(timeout) + " outside (0, " + std::to_string(c.max_timeout()) +
                      "] for timeout width " + std::to_string(timeout_width));
  }
}

SimParams read_params(std::istream& in, SimParams base) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    auto text = trim(raw);
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = trim(text.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key=value", line);
    const auto key = trim(text.substr(0, eq));
    const auto value = trim(text.substr(eq + 1));
    if (key == "to") {
      base.timeout = to_unsigned(key, value, line);
    } else if (key == "precision") {
      const auto v = to_unsigned(key, value, line);
      if (v > 1'000'000) throw ParseError("precision is out of range: " + std::string(value), line);
      base.precision = static_cast<unsigned>(v);
    } else if (key == "wr") {
      base.data_width = to_width(key, value, line);
    } else if (key == "wo") {
      base.timeout_width = to_width(key, value, line);
    } else if (key == "wid") {
      base.id_width = to_width(key, value, line);
    } else if (key == "units") {
      base.units = to_unsigned(key, value, line);
    } else if (key == "blocks") {
      base.blocks = to_unsigned(key, value, line);
    } else if (key == "cycle_ns") {
      const std::string v(value);
      std::size_t used = 0;
      double d = 0.0;
      try {
        d = std::stod(v, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != v.size() || v.empty()) throw ParseError("cycle_ns expects a number, got '" + v + "'", line);
      base.cycle_time_ns = d;
    } else if (key == "backend") {
      try {
        base.backend = parse_backend(std::string(value));
      } catch (const ConfigError& e) {
        throw ParseError(e.what(), line);
      }
    } else {
      throw ParseError("unknown parameter '" + std::string(key) + "'", line);
    }
  }
  return base;
}

}  // namespace gsq
