// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gsq/behavioral_queue.hpp"
#include "gsq/cli.hpp"
#include "gsq/equivalence.hpp"
#include "gsq/harness.hpp"
#include "gsq/oracle.hpp"
#include "gsq/script.hpp"
#include "gsq/systolic.hpp"
#include "gsq/timer.hpp"
#include "table_rule.hpp"

using namespace gsq;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::vector<std::string> g_notes;

const Trace& bundled_trace() {
  static const Trace t = load_trace_file(GSQ_DATA_DIR "/synthetic-2047.csv");
  return t;
}

const PreparedTrace& prepared() {
  static const PreparedTrace p = prepare_trace(bundled_trace(), 4095);
  return p;
}

// A stream of (start tick, TO) pairs at W_r = 9: segments of 512 ticks at
// push rates from sparse to dense, a fifth of pushes re-arm a live timer,
// every expired timer is popped as soon as it is due.
struct StreamResult {
  std::uint64_t pushes = 0;
  std::uint64_t pops = 0;
  std::uint64_t mistimed = 0;
  std::uint64_t inversions = 0;  // pushes that overtook the head across a boundary
  std::uint64_t adjusted = 0;    // timeouts raised to avoid one
  std::uint64_t oracle_mismatch = 0;
  Tick end_tick = 0;
};

StreamResult timer_stream(std::uint64_t seed, std::uint64_t target, bool avoid_inversions) {
  QueueConfig c;
  c.data_width = 9;
  c.timeout_width = 7;
  c.id_width = 10;
  c.capacity = 1023;
  BehavioralQueue q(c);
  WideOracleQueue oracle;
  std::mt19937_64 rng(seed);
  std::map<Id, Tick> due;
  std::vector<Id> free_ids;
  for (Id id = 1023; id >= 1; --id) free_ids.push_back(id);
  std::vector<Id> live;
  std::map<Id, std::size_t> where;
  const double rates[] = {0.05, 0.2, 1.0, 5.0};
  double rate = 1.0;
  StreamResult r;
  auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  for (Tick t = 0;; ++t) {
    if (t % 512 == 0) rate = rates[rng() % 4];
    const Data rt = static_cast<Data>(t & c.data_mask());
    while (auto h = q.peek()) {
      if (!is_expired(h->data, rt, 9)) break;
      const auto e = q.pop();
      ++r.pops;
      if (due.at(e.id) != t) ++r.mistimed;
      if (avoid_inversions) {
        const auto o = oracle.pop_if_expired(t);
        if (!o || o->id != e.id) ++r.oracle_mismatch;
      } else {
        oracle.remove(e.id);
      }
      due.erase(e.id);
      const auto k = where.at(e.id);
      where[live.back()] = k;
      live[k] = live.back();
      live.pop_back();
      where.erase(e.id);
      free_ids.push_back(e.id);
    }
    if (avoid_inversions && oracle.pop_if_expired(t)) ++r.oracle_mismatch;  // queue missed one
    if (r.pushes >= target) {
      if (q.empty()) {
        r.end_tick = t;
        break;
      }
      continue;
    }
    std::uint64_t n = static_cast<std::uint64_t>(rate);
    if (unit() < rate - std::floor(rate)) ++n;
    for (std::uint64_t k = 0; k < n && r.pushes < target; ++k) {
      Id id;
      if (!live.empty() && unit() < 0.2) {
        id = live[rng() % live.size()];
      } else {
        id = free_ids.back();
        free_ids.pop_back();
        where[id] = live.size();
        live.push_back(id);
      }
      std::uint64_t to = 1 + rng() % 127;
      if (const auto head = oracle.peek(); head && boundary_inversion(head->expiration, t + to, 9)) {
        if (avoid_inversions) {
          to = head->expiration - t;
          ++r.adjusted;
        } else {
          ++r.inversions;
        }
      }
      q.push(id, make_expiration(rt, to, c));
      oracle.push(id, t, to);
      due[id] = t + to + 1;
      ++r.pushes;
    }
  }
  return r;
}

Outcome wraparound_exactness() {
  const auto r = timer_stream(1, 100000, true);
  const auto wraps = r.end_tick / 512;
  Outcome o;
  o.pass = r.pushes == 100000 && wraps >= 20 && r.mistimed == 0 && r.oracle_mismatch == 0;
  o.detail = std::to_string(r.pushes) + " pairs over " + std::to_string(wraps) + " wraps, " +
             std::to_string(r.mistimed) + " mistimed pops, " + std::to_string(r.adjusted) +
             " timeouts raised to avoid a boundary inversion";
  // Same stream shape with no avoidance: how often the grouping limit bites.
  const auto raw = timer_stream(1, 100000, false);
  g_notes.push_back("unrestricted timeouts: " + std::to_string(raw.mistimed) + " of " + std::to_string(raw.pops) +
                    " pops mistimed after " + std::to_string(raw.inversions) +
                    " boundary inversions (late by design of head-MSB grouping)");
  if (raw.mistimed > raw.inversions) {
    o.pass = false;
    o.detail += "; unexplained mistimed pops without inversions";
  }
  return o;
}

Outcome width_parity() {
  ScriptParams p;
  p.seed = 2;
  p.ops = 20000;
  p.start_tick = 60000;
  p.wrap_straddle_rate = 0.5;
  p.max_id = 8;
  EquivalenceConfig c;
  const auto r = check_equivalence(make_script(p), c);
  Outcome o;
  o.pass = r.equivalent && r.queue_width == 9 && r.oracle_max_tick > (Tick{1} << 16) && r.stream.size() > 1000;
  o.detail = std::to_string(r.stream.size()) + " dequeues identical; queue " + std::to_string(r.queue_width) +
             " bits, oracle max tick " + std::to_string(r.oracle_max_tick) + " (" + std::to_string(r.oracle_bits) +
             " bits)";
  return o;
}

Outcome width_invariance() {
  std::vector<std::string> outs;
  std::vector<SimStats> stats;
  for (unsigned wr : {10U, 11U, 12U}) {
    SimParams p;
    p.timeout = 191;
    p.precision = 6;
    p.data_width = wr;
    p.timeout_width = 8;
    stats.push_back(run(prepared(), p));
    std::ostringstream s;
    emit_stats(s, stats.back(), ReportFormat::Text);
    outs.push_back(s.str());
  }
  Outcome o;
  o.pass = bundled_trace().distinct_flows() == 2047 && bundled_trace().records.size() == 119870 &&
           outs[0] == outs[1] && outs[1] == outs[2] && stats[0] == stats[1] && stats[1] == stats[2];
  o.detail = "W_r 10/11/12 reports byte-identical (pop_count " + std::to_string(stats[0].pop_count) +
             ", max_occupancy " + std::to_string(stats[0].max_occupancy) + ")";
  return o;
}

Outcome table_rule_equivalence() {
  std::uint64_t checks = 0, mismatches = 0;
  struct Width {
    unsigned w;
    std::size_t max_len;
  };
  for (auto [w, max_len] : {Width{4, 5}, Width{5, 4}}) {
    QueueConfig c;
    c.data_width = w;
    c.timeout_width = w - 2;
    c.capacity = 16;
    c.id_width = 8;
    testing::for_each_layout(w, max_len, [&](const std::vector<Data>& items) {
      BehavioralQueue q(c);
      Id id = 1;
      for (auto d : items) q.push(id++, d);
      bool same_layout = q.items().size() == items.size();
      for (std::size_t i = 0; same_layout && i < items.size(); ++i) same_layout = q.items()[i].data == items[i];
      if (!same_layout) ++mismatches;
      for (Data e = 0; e < (Data{1} << w); ++e) {
        ++checks;
        if (q.insert_position({99, e}) != testing::table_rule_position(items, e, w)) ++mismatches;
      }
    });
  }
  return {mismatches == 0, std::to_string(checks) + " (layout, value) pairs at W_r 4 and 5, " +
                               std::to_string(mismatches) + " mismatches"};
}

Outcome systolic_equivalence() {
  std::vector<std::pair<OpScript, EquivalenceConfig>> jobs;
  for (std::size_t n : {2U, 4U, 8U}) {
    for (std::size_t m : {2U, 3U, 4U}) {
      EquivalenceConfig c;
      c.geometry = {n, m};
      c.checkpoint_every = 8;
      for (std::uint64_t k = 0; k < 112; ++k) {
        ScriptParams p;
        p.seed = 1000 * n + 100 * m + k;
        p.ops = 600;
        p.max_id = static_cast<Id>(n * m);
        jobs.push_back({make_script(p), c});
      }
    }
  }
  std::vector<EquivalenceReport> reports(jobs.size());
  std::vector<std::string> errors(jobs.size());
  const auto count = static_cast<std::ptrdiff_t>(jobs.size());
#if defined(GSQ_HAVE_OPENMP)
#pragma omp parallel for schedule(dynamic, 4)
#endif
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      reports[k] = check_equivalence(jobs[k].first, jobs[k].second);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  std::size_t failed = 0;
  std::array<std::uint64_t, 4> rows{};
  std::string first;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const bool ok = errors[k].empty() && reports[k].equivalent;
    if (!ok) {
      ++failed;
      if (first.empty()) first = errors[k].empty() ? reports[k].divergence->what : errors[k];
    }
    for (std::size_t r = 0; r < 4; ++r) rows[r] += reports[k].propagation_rows[r];
  }
  const bool covered = rows[0] > 0 && rows[1] > 0 && rows[2] > 0 && rows[3] > 0;
  std::string detail = std::to_string(jobs.size()) + " scripts on 9 geometries, " + std::to_string(failed) +
                       " divergent; propagation rows " + std::to_string(rows[0]) + "/" + std::to_string(rows[1]) +
                       "/" + std::to_string(rows[2]) + "/" + std::to_string(rows[3]);
  if (!first.empty()) detail += "; first: " + first;
  return {failed == 0 && covered && jobs.size() >= 1000, detail};
}

Outcome latency_throughput() {
  QueueConfig c;
  c.data_width = 12;
  c.timeout_width = 10;
  c.id_width = 12;
  systolic::SystolicState s(c, {64, 2});
  std::mt19937_64 rng(6);
  std::uint64_t late = 0, ops = 0;
  for (int i = 0; i < 20000; ++i) {
    systolic::ExternalOp op = systolic::ExternalOp::push(1 + static_cast<Id>(rng() % 100), rng() % 4096);
    if (rng() % 2 == 0 && s.peek()) op = systolic::ExternalOp::pop();
    if (!s.issue(op).accepted) ++late;
    ++ops;
    unsigned cycles = 0;
    do {
      s.step();
      ++cycles;
    } while (!s.ready());
    if (cycles != systolic::kOpCycles) ++late;
  }
  const std::uint64_t horizon = 100000;
  const auto sat = saturate(c, {64, 2}, horizon, 1);
  const double ceiling = modeled_ceiling_mpps(2.0);
  SimParams p;
  p.timeout = 127;
  const auto flow = run(prepared(), p);
  const double gap = std::abs(flow.modeled_mpps - ceiling) / ceiling;
  Outcome o;
  o.pass = late == 0 && sat.accepted >= horizon / 3 && std::abs(ceiling - 166.6) < 0.1 && gap <= 0.02 &&
           flow.modeled_mpps <= ceiling;
  o.detail = std::to_string(ops) + " ops all done in 3 cycles; saturation " + std::to_string(sat.accepted) + " of " +
             std::to_string(horizon) + " cycles; ceiling " + format_rate(ceiling) + " Mops/s; flow run " +
             format_rate(flow.modeled_mpps) + " (" + format_rate(gap * 100.0) + "% below)";
  return o;
}

Outcome monotonic_trends() {
  std::vector<SimParams> points;
  auto add = [&](unsigned prec, std::uint64_t to) {
    SimParams p;
    p.precision = prec;
    p.timeout = to;
    points.push_back(p);
  };
  add(6, 127);
  add(6, 191);
  add(6, 255);
  add(6, 382);
  add(12, 191);
  add(6, 254);
  add(12, 127);
  const auto res = run_sweep(prepared(), points);
  bool ok = true;
  for (std::size_t i = 1; i < 3; ++i) {
    ok = ok && res[i].stats.pop_count < res[i - 1].stats.pop_count;
    ok = ok && res[i].stats.max_occupancy > res[i - 1].stats.max_occupancy;
  }
  auto close = [](std::uint64_t a, std::uint64_t b) {
    return std::abs(static_cast<double>(a) - static_cast<double>(b)) <= 0.05 * static_cast<double>(std::max(a, b));
  };
  ok = ok && close(res[3].stats.max_occupancy, res[4].stats.max_occupancy) &&
       close(res[5].stats.max_occupancy, res[6].stats.max_occupancy);
  std::string d = "p=6 TO 127/191/255: pops ";
  for (std::size_t i = 0; i < 3; ++i) d += std::to_string(res[i].stats.pop_count) + (i < 2 ? "/" : "");
  d += ", max_occ ";
  for (std::size_t i = 0; i < 3; ++i) d += std::to_string(res[i].stats.max_occupancy) + (i < 2 ? "/" : "");
  d += "; equal p*TO max_occ " + std::to_string(res[3].stats.max_occupancy) + " vs " +
       std::to_string(res[4].stats.max_occupancy) + ", " + std::to_string(res[5].stats.max_occupancy) + " vs " +
       std::to_string(res[6].stats.max_occupancy);
  return {ok, d};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria{
      {"wraparound exactness", wraparound_exactness},
      {"bit-width parity with wide oracle", width_parity},
      {"timestamp-width invariance", width_invariance},
      {"insertion rule equivalence", table_rule_equivalence},
      {"systolic/behavioral equivalence", systolic_equivalence},
      {"latency and throughput model", latency_throughput},
      {"monotonic trends", monotonic_trends},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %zu %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(), secs);
    if (!o.pass) ++failed;
  }
  for (const auto& n : g_notes) std::printf("note: %s\n", n.c_str());
  return failed == 0 ? 0 : 1;
}
