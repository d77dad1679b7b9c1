#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsq {

/// Malformed trace or script input; `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PacketRecord {
  std::uint64_t arrival_ns = 0;
  std::string src;
  std::string dst;
  std::uint16_t sport = 0;
  std::uint16_t dport = 0;
  std::uint8_t proto = 0;

  /// Canonical 5-tuple key. No direction folding: A->B and B->A differ.
  [[nodiscard]] std::string flow_key() const;

  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

struct Trace {
  std::vector<PacketRecord> records;  // sorted by arrival_ns, stable
  std::size_t reordered = 0;          // records that arrived out of order in the source

  [[nodiscard]] std::size_t distinct_flows() const;
};

inline constexpr const char* kTraceHeader = "arrival_ns,src,dst,sport,dport,proto";

/// Reads the CSV trace format (header line, then one packet per line).
/// Blank lines and lines starting with '#' are skipped. Throws ParseError.
Trace load_trace(std::istream& in);
/// Throws IoError when the file cannot be opened.
Trace load_trace_file(const std::string& path);

void write_trace(std::ostream& out, const std::vector<PacketRecord>& records);

/// Synthetic trace model: a superposition of per-flow Poisson processes
/// whose rates follow a Zipf law. Every flow sends at least one packet.
struct TraceGenParams {
  std::size_t flows = 2047;
  std::size_t packets = 119870;
  std::uint64_t seed = 42;
  double mean_gap_ns = 5.0;  // aggregate mean inter-arrival time
  double zipf_exponent = 1.0;
};

/// Deterministic for fixed parameters on every platform: uses only integer
/// RNG output and its own floating-point transforms. Throws ConfigError.
std::vector<PacketRecord> gen_trace(const TraceGenParams& params);

}  // namespace gsq
