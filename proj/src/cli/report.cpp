#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "gsq/cli.hpp"

namespace gsq {

ReportFormat parse_format(const std::string& name) {
  if (name == "text") return ReportFormat::Text;
  if (name == "csv") return ReportFormat::Csv;
  throw ConfigError("unknown format '" + name + "' (expected text or csv)");
}

std::string format_rate(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", value);
  return buf;
}

namespace {

void emit_pairs(std::ostream& out, const std::map<std::string, std::string>& kv, ReportFormat format) {
  if (format == ReportFormat::Text) {
    for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
    return;
  }
  bool first = true;
  for (const auto& [k, v] : kv) {
    out << (first ? "" : ",") << k;
    first = false;
  }
  out << '\n';
  first = true;
  for (const auto& [k, v] : kv) {
    out << (first ? "" : ",") << v;
    first = false;
  }
  out << '\n';
}

}  // namespace

void emit_stats(std::ostream& out, const SimStats& s, ReportFormat format) {
  emit_pairs(out,
             {{"flows", std::to_string(s.flows)},
              {"max_occupancy", std::to_string(s.max_occupancy)},
              {"modeled_mpps", format_rate(s.modeled_mpps)},
              {"ops_issued", std::to_string(s.ops_issued)},
              {"pop_count", std::to_string(s.pop_count)},
              {"push_count", std::to_string(s.push_count)},
              {"total_cycles", std::to_string(s.total_cycles)}},
             format);
}

void emit_series(std::ostream& out, const std::vector<SeriesRow>& rows, ReportFormat format) {
  if (format == ReportFormat::Csv) out << "TO,p,pop_count,max_occupancy,modeled_mpps\n";
  for (const auto& r : rows) {
    if (format == ReportFormat::Csv) {
      out << r.timeout << ',' << r.precision << ',' << r.pop_count << ',' << r.max_occupancy << ','
          << format_rate(r.modeled_mpps) << '\n';
    } else {
      out << "TO=" << r.timeout << " p=" << r.precision << " pop_count=" << r.pop_count
          << " max_occupancy=" << r.max_occupancy << " modeled_mpps=" << format_rate(r.modeled_mpps) << '\n';
    }
  }
}

void emit_dequeue_log(std::ostream& out, const std::vector<DequeueEvent>& log) {
  out << "tick,id\n";
  for (const auto& e : log) out << e.tick << ',' << e.id << '\n';
}

void emit_checks(std::ostream& out, const std::vector<CheckRow>& rows, ReportFormat format) {
  if (format == ReportFormat::Csv) {
    out << "seed,units,blocks,data_width,ops,equivalent,pops,oracle_max_tick,oracle_bits,queue_width\n";
  }
  for (const auto& row : rows) {
    const auto& r = row.report;
    const auto& c = row.config;
    if (format == ReportFormat::Csv) {
      out << row.seed << ',' << c.geometry.units << ',' << c.geometry.blocks << ',' << c.data_width << ','
          << r.ops_replayed << ',' << (r.equivalent ? 1 : 0) << ',' << r.stream.size() << ',' << r.oracle_max_tick
          << ',' << r.oracle_bits << ',' << r.queue_width << '\n';
    } else {
      out << "seed=" << row.seed << " units=" << c.geometry.units << " blocks=" << c.geometry.blocks
          << " data_width=" << c.data_width << " ops=" << r.ops_replayed
          << " equivalent=" << (r.equivalent ? "yes" : "no") << " pops=" << r.stream.size()
          << " oracle_max_tick=" << r.oracle_max_tick << " oracle_bits=" << r.oracle_bits
          << " queue_width=" << r.queue_width;
      if (r.divergence) out << " divergence=\"" << r.divergence->what << "\"";
      out << '\n';
    }
  }
}

void emit_saturation(std::ostream& out, const SaturationStats& s, double cycle_time_ns, ReportFormat format) {
  emit_pairs(out,
             {{"accepted", std::to_string(s.accepted)},
              {"ceiling_mpps", format_rate(modeled_ceiling_mpps(cycle_time_ns))},
              {"cycles", std::to_string(s.cycles)},
              {"max_latency_cycles", std::to_string(s.max_latency)},
              {"min_latency_cycles", std::to_string(s.min_latency)},
              {"modeled_mpps", format_rate(s.modeled_mpps)},
              {"rejected", std::to_string(s.rejected)}},
             format);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + path + "'");
    f << content;
    f.flush();
    if (!f) throw IoError("short write to '" + path + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at '" + path + "'");
  }
}

}  // namespace gsq
