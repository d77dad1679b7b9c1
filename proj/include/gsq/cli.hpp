#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gsq/equivalence.hpp"
#include "gsq/harness.hpp"

namespace gsq {

enum class ReportFormat : std::uint8_t { Text, Csv };

/// "text" or "csv"; throws ConfigError otherwise.
[[nodiscard]] ReportFormat parse_format(const std::string& name);

/// Fixed three-decimal rendering used for every rate in reports.
[[nodiscard]] std::string format_rate(double value);

/// Text: sorted key=value lines. CSV: one header row, one value row.
void emit_stats(std::ostream& out, const SimStats& stats, ReportFormat format);
/// CSV columns TO,p,pop_count,max_occupancy,modeled_mpps; text renders the
/// same fields as key=value pairs, one row per line.
void emit_series(std::ostream& out, const std::vector<SeriesRow>& rows, ReportFormat format);
/// CSV "tick,id".
void emit_dequeue_log(std::ostream& out, const std::vector<DequeueEvent>& log);

struct CheckRow {
  std::uint64_t seed = 0;
  EquivalenceConfig config;
  EquivalenceReport report;
};
void emit_checks(std::ostream& out, const std::vector<CheckRow>& rows, ReportFormat format);
void emit_saturation(std::ostream& out, const SaturationStats& stats, double cycle_time_ns, ReportFormat format);

/// Writes through a temporary file and renames it into place. Throws IoError.
void write_file_atomic(const std::string& path, const std::string& content);

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 2,
  kExitParse = 3,
  kExitCapacity = 4,
  kExitDivergence = 5,
  kExitIo = 6,
  kExitInternal = 7,
};

/// Entry point behind the `gsq` executable; `out` receives reports written
/// to standard output, `err` diagnostics ("error: <kind>: <message>").
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gsq
