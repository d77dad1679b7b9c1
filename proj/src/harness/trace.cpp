#include "gsq/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string_view>
#include <unordered_set>

#include "gsq/config.hpp"

namespace gsq {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

template <typename T>
T parse_unsigned(std::string_view field, const char* what, std::uint64_t max, std::size_t line) {
  std::uint64_t v = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError(std::string(what) + " is not an unsigned integer: '" + std::string(field) + "'", line);
  }
  if (v > max) throw ParseError(std::string(what) + " out of range: " + std::string(field), line);
  return static_cast<T>(v);
}

std::uint8_t parse_proto(std::string_view field, std::size_t line) {
  const auto name = lower(field);
  if (name == "tcp") return 6;
  if (name == "udp") return 17;
  if (name == "icmp") return 1;
  return parse_unsigned<std::uint8_t>(field, "proto", 255, line);
}

// Uniform double in (0, 1) from the top 53 bits; platform independent.
double unit_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::string PacketRecord::flow_key() const {
  return src + '|' + dst + '|' + std::to_string(sport) + '|' + std::to_string(dport) + '|' + std::to_string(proto);
}

std::size_t Trace::distinct_flows() const {
  std::unordered_set<std::string> keys;
  for (const auto& r : records) keys.insert(r.flow_key());
  return keys.size();
}

Trace load_trace(std::istream& in) {
  Trace trace;
  std::string raw;
  std::size_t line = 0;
  bool header_seen = false;
  std::uint64_t latest = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    if (!header_seen) {
      std::string compact;
      for (char c : lower(text)) {
        if (c != ' ' && c != '\t') compact += c;
      }
      if (compact != kTraceHeader) {
        throw ParseError(std::string("expected header '") + kTraceHeader + "'", line);
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      fields.push_back(trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 6) {
      throw ParseError("expected 6 fields, found " + std::to_string(fields.size()), line);
    }
    PacketRecord r;
    r.arrival_ns = parse_unsigned<std::uint64_t>(fields[0], "arrival_ns", ~std::uint64_t{0}, line);
    if (fields[1].empty() || fields[2].empty()) throw ParseError("empty address", line);
    r.src = lower(fields[1]);
    r.dst = lower(fields[2]);
    r.sport = parse_unsigned<std::uint16_t>(fields[3], "sport", 65535, line);
    r.dport = parse_unsigned<std::uint16_t>(fields[4], "dport", 65535, line);
    r.proto = parse_proto(fields[5], line);
    if (r.arrival_ns < latest) {
      ++trace.reordered;
    } else {
      latest = r.arrival_ns;
    }
    trace.records.push_back(std::move(r));
  }
  if (in.bad()) throw IoError("read failure while loading trace");
  std::stable_sort(trace.records.begin(), trace.records.end(),
                   [](const PacketRecord& a, const PacketRecord& b) { return a.arrival_ns < b.arrival_ns; });
  return trace;
}

Trace load_trace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace '" + path + "'");
  return load_trace(in);
}

void write_trace(std::ostream& out, const std::vector<PacketRecord>& records) {
  out << kTraceHeader << '\n';
  for (const auto& r : records) {
    out << r.arrival_ns << ',' << r.src << ',' << r.dst << ',' << r.sport << ',' << r.dport << ','
        << static_cast<unsigned>(r.proto) << '\n';
  }
}

std::vector<PacketRecord> gen_trace(const TraceGenParams& params) {
  if (params.flows == 0) throw ConfigError("trace generator needs at least one flow");
  if (params.packets < params.flows) {
    throw ConfigError("packets (" + std::to_string(params.packets) + ") must be at least flows (" +
                      std::to_string(params.flows) + ")");
  }
  if (!(params.mean_gap_ns > 0.0)) throw ConfigError("mean inter-arrival gap must be positive");
  if (!(params.zipf_exponent >= 0.0)) throw ConfigError("zipf exponent must be non-negative");

  std::mt19937_64 rng(params.seed);

  std::vector<double> cumulative(params.flows);
  double total = 0.0;
  for (std::size_t k = 0; k < params.flows; ++k) {
    total += 1.0 / std::pow(static_cast<double>(k + 1), params.zipf_exponent);
    cumulative[k] = total;
  }

  // One packet per flow guarantees every flow appears; the rest follow the
  // Zipf rates. Shuffling the labels over a single Poisson arrival stream
  // gives the superposition.
  std::vector<std::size_t> labels(params.packets);
  std::iota(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(params.flows), std::size_t{0});
  for (std::size_t i = params.flows; i < params.packets; ++i) {
    const double target = unit_open(rng) * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    labels[i] = std::min(static_cast<std::size_t>(it - cumulative.begin()), params.flows - 1);
  }
  for (std::size_t i = labels.size(); i > 1; --i) {
    std::swap(labels[i - 1], labels[rng() % i]);
  }

  static constexpr std::uint16_t kPorts[] = {80, 443, 53, 22, 8080, 3306, 6379, 123};
  std::vector<PacketRecord> tuples(params.flows);
  for (std::size_t k = 0; k < params.flows; ++k) {
    auto& t = tuples[k];
    t.src = "10." + std::to_string((k >> 16) & 255) + '.' + std::to_string((k >> 8) & 255) + '.' +
            std::to_string(k & 255);
    const auto host = rng();
    t.dst = "192.168." + std::to_string((host >> 8) & 255) + '.' + std::to_string(host & 255);
    t.sport = static_cast<std::uint16_t>(1024 + (host >> 16) % 64512);
    t.dport = kPorts[(host >> 40) % std::size(kPorts)];
    t.proto = ((host >> 48) & 3) == 0 ? 17 : 6;
  }

  std::vector<PacketRecord> out;
  out.reserve(params.packets);
  double now = 0.0;
  for (auto label : labels) {
    now += -params.mean_gap_ns * std::log(unit_open(rng));
    PacketRecord r = tuples[label];
    r.arrival_ns = static_cast<std::uint64_t>(now);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace gsq
