#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "gsq/cli.hpp"

namespace gsq {

namespace {

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  2  invalid arguments or parameters\n"
    "  3  malformed trace, script or parameter file\n"
    "  4  queue capacity exceeded during a run\n"
    "  5  equivalence divergence (counterexample written)\n"
    "  6  file I/O failure\n"
    "  7  internal simulator fault\n";

struct QueueFlags {
  unsigned wr = 12;
  unsigned wo = 10;
  unsigned wid = 12;
  std::size_t units = 1024;
  std::size_t blocks = 2;
  double cycle_ns = 2.0;
};

void add_trace_gen(CLI::App* cmd, TraceGenParams& p) {
  cmd->add_option("--flows", p.flows, "Distinct flows in a generated trace")->capture_default_str();
  cmd->add_option("--packets", p.packets, "Packets in a generated trace")->capture_default_str();
  cmd->add_option("--seed", p.seed, "Generator seed")->capture_default_str();
  cmd->add_option("--mean-gap-ns", p.mean_gap_ns, "Mean aggregate inter-arrival time")->capture_default_str();
  cmd->add_option("--zipf", p.zipf_exponent, "Zipf exponent of per-flow rates")->capture_default_str();
}

void add_script_gen(CLI::App* cmd, ScriptParams& p) {
  cmd->add_option("--ops", p.ops, "Operations per script")->capture_default_str();
  cmd->add_option("--max-id", p.max_id, "Largest id drawn (defaults to the queue capacity for check)");
  cmd->add_option("--min-to", p.min_timeout, "Smallest timeout")->capture_default_str();
  cmd->add_option("--max-to", p.max_timeout, "Largest timeout (0 = 2^wo - 1)")->capture_default_str();
  cmd->add_option("--start-tick", p.start_tick, "Absolute tick of the first operation")->capture_default_str();
  cmd->add_option("--push-weight", p.push_weight, "Relative weight of push ops")->capture_default_str();
  cmd->add_option("--pop-weight", p.pop_weight, "Relative weight of pop-if-expired ops")->capture_default_str();
  cmd->add_option("--remove-weight", p.remove_weight, "Relative weight of remove ops")->capture_default_str();
  cmd->add_option("--advance-rate", p.advance_rate, "Chance the tick moves before an op")->capture_default_str();
  cmd->add_option("--max-advance", p.max_advance, "Largest single tick step")->capture_default_str();
  cmd->add_option("--dup-rate", p.dup_id_rate, "Share of pushes that update a live id")->capture_default_str();
  cmd->add_option("--collision-rate", p.collision_rate, "Share of pushes that reuse a live expiration")
      ->capture_default_str();
  cmd->add_option("--wrap-rate", p.wrap_straddle_rate, "Share of pushes whose expiration crosses a wrap")
      ->capture_default_str();
  cmd->add_option("--max-pop-lag", p.max_pop_lag, "Ticks an expired element may wait (0 = 2^(wr-2))")
      ->capture_default_str();
  cmd->add_flag("--allow-inversions", p.allow_inversions,
                "Let pushes overtake the head across a group boundary (not exact under head-MSB grouping)");
}

void add_format(CLI::App* cmd, std::string& format) {
  cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "csv"}))->capture_default_str();
}

void deliver(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    write_file_atomic(path, content);
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grouped-sorting timer priority queue: flow-table simulation, trace and script generation, "
               "equivalence checking and throughput modeling."};
  app.footer(kExitCodes);
  app.require_subcommand(1);
  app.set_version_flag("--version", "gsq 1.0.0");

  // run
  auto* run_cmd = app.add_subcommand("run", "Simulate flow-table timeouts over a packet trace");
  std::string params_file, trace_file, out_path, format = "text", dequeue_path, record_path, backend = "behavioral";
  std::vector<std::uint64_t> tos{127};
  std::vector<unsigned> precisions{6};
  QueueFlags q;
  TraceGenParams tgen;
  bool series = false;
  run_cmd->add_option("--params", params_file, "key=value parameter file; explicit flags take precedence");
  run_cmd->add_option("--trace", trace_file, "Trace CSV; a synthetic trace is generated when omitted");
  add_trace_gen(run_cmd, tgen);
  auto* o_to = run_cmd->add_option("--to", tos, "Timeout(s) in ticks; a list runs a sweep")->delimiter(',');
  auto* o_p = run_cmd->add_option("--precision", precisions, "Cycles per tick; a list runs a sweep")->delimiter(',');
  auto* o_wr = run_cmd->add_option("--wr", q.wr, "Timestamp width W_r")->capture_default_str();
  auto* o_wo = run_cmd->add_option("--wo", q.wo, "Timeout width W_o")->capture_default_str();
  auto* o_wid = run_cmd->add_option("--wid", q.wid, "Id width")->capture_default_str();
  auto* o_units = run_cmd->add_option("--units", q.units, "Systolic units N")->capture_default_str();
  auto* o_blocks = run_cmd->add_option("--blocks", q.blocks, "Shift blocks per unit M")->capture_default_str();
  auto* o_cycle = run_cmd->add_option("--cycle-ns", q.cycle_ns, "Clock period in ns")->capture_default_str();
  auto* o_backend = run_cmd->add_option("--backend", backend, "Queue model")
                        ->check(CLI::IsMember({"behavioral", "systolic"}))
                        ->capture_default_str();
  run_cmd->add_option("--out", out_path, "Report path (default: stdout)");
  add_format(run_cmd, format);
  run_cmd->add_flag("--series", series, "Emit the TO/p series table even for a single point");
  run_cmd->add_option("--dequeue-log", dequeue_path, "Write the dequeue log (tick,id) here");
  run_cmd->add_option("--record-script", record_path, "Write the issued operations as a replayable script");

  // gen-trace
  auto* gt_cmd = app.add_subcommand("gen-trace", "Generate a synthetic packet trace");
  TraceGenParams gt;
  std::string gt_out;
  add_trace_gen(gt_cmd, gt);
  gt_cmd->add_option("--out", gt_out, "Trace path (default: stdout)");

  // gen-script
  auto* gs_cmd = app.add_subcommand("gen-script", "Generate a timed operation script");
  ScriptParams gs;
  std::string gs_out;
  gs_cmd->add_option("--seed", gs.seed, "Generator seed")->capture_default_str();
  gs_cmd->add_option("--wr", gs.data_width, "Timestamp width the script must respect")->capture_default_str();
  gs_cmd->add_option("--wo", gs.timeout_width, "Timeout width")->capture_default_str();
  add_script_gen(gs_cmd, gs);
  gs_cmd->add_option("--out", gs_out, "Script path (default: stdout)");

  // check
  auto* ck_cmd = app.add_subcommand("check", "Replay scripts on the behavioral, systolic and wide-oracle queues");
  ScriptParams cs;
  std::vector<std::string> scripts;
  std::uint64_t seed_from = 1, seed_to = 1;
  std::vector<std::size_t> ck_units{4}, ck_blocks{2};
  unsigned ck_wr = 9, ck_wo = 7, ck_wid = 8;
  std::size_t checkpoint = 16;
  bool no_systolic = false;
  std::string ck_out, ck_format = "text", cex_path = "gsq-counterexample.json";
  ck_cmd->add_option("--script", scripts, "Script file(s) to replay instead of generating");
  ck_cmd->add_option("--seed-from", seed_from, "First generator seed")->capture_default_str();
  ck_cmd->add_option("--seed-to", seed_to, "Last generator seed (inclusive)")->capture_default_str();
  add_script_gen(ck_cmd, cs);
  ck_cmd->add_option("--units", ck_units, "Systolic units N (list)")->delimiter(',');
  ck_cmd->add_option("--blocks", ck_blocks, "Shift blocks per unit M (list)")->delimiter(',');
  ck_cmd->add_option("--wr", ck_wr, "Timestamp width W_r")->capture_default_str();
  ck_cmd->add_option("--wo", ck_wo, "Timeout width W_o")->capture_default_str();
  ck_cmd->add_option("--wid", ck_wid, "Id width")->capture_default_str();
  ck_cmd->add_option("--checkpoint", checkpoint, "Compare full contents every this many ops")->capture_default_str();
  ck_cmd->add_flag("--no-systolic", no_systolic, "Compare the behavioral queue with the oracle only");
  ck_cmd->add_option("--out", ck_out, "Report path (default: stdout)");
  add_format(ck_cmd, ck_format);
  ck_cmd->add_option("--counterexample", cex_path, "Where a minimized divergence is written")->capture_default_str();

  // bench
  auto* bn_cmd = app.add_subcommand("bench", "Modeled throughput of the systolic array under saturation");
  std::uint64_t bn_cycles = 100000, bn_seed = 1;
  QueueFlags bq;
  std::string bn_out, bn_format = "text";
  bn_cmd->add_option("--cycles", bn_cycles, "Cycles of saturated offered load")->capture_default_str();
  bn_cmd->add_option("--seed", bn_seed, "Seed for the offered operations")->capture_default_str();
  bn_cmd->add_option("--wr", bq.wr, "Timestamp width W_r")->capture_default_str();
  bn_cmd->add_option("--wo", bq.wo, "Timeout width W_o")->capture_default_str();
  bn_cmd->add_option("--wid", bq.wid, "Id width")->capture_default_str();
  bn_cmd->add_option("--units", bq.units, "Systolic units N")->capture_default_str();
  bn_cmd->add_option("--blocks", bq.blocks, "Shift blocks per unit M")->capture_default_str();
  bn_cmd->add_option("--cycle-ns", bq.cycle_ns, "Clock period in ns")->capture_default_str();
  bn_cmd->add_option("--out", bn_out, "Report path (default: stdout)");
  add_format(bn_cmd, bn_format);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (run_cmd->parsed()) {
      SimParams base;
      if (!params_file.empty()) {
        std::ifstream in(params_file);
        if (!in) throw IoError("cannot open parameter file '" + params_file + "'");
        base = read_params(in, base);
      }
      if (o_wr->count()) base.data_width = q.wr;
      if (o_wo->count()) base.timeout_width = q.wo;
      if (o_wid->count()) base.id_width = q.wid;
      if (o_units->count()) base.units = q.units;
      if (o_blocks->count()) base.blocks = q.blocks;
      if (o_cycle->count()) base.cycle_time_ns = q.cycle_ns;
      if (o_backend->count()) base.backend = parse_backend(backend);
      if (!o_to->count()) tos = {base.timeout};
      if (!o_p->count()) precisions = {base.precision};
      const auto fmt = parse_format(format);

      std::vector<SimParams> points;
      for (auto p : precisions) {
        for (auto to : tos) {
          SimParams sp = base;
          sp.timeout = to;
          sp.precision = p;
          sp.validate();
          points.push_back(sp);
        }
      }
      const Trace trace = trace_file.empty() ? Trace{gen_trace(tgen), 0} : load_trace_file(trace_file);
      if (trace.reordered > 0) {
        err << "warning: " << trace.reordered << " trace records were out of order and have been sorted\n";
      }
      const auto prepared = prepare_trace(trace, base.queue_config().max_id());

      std::ostringstream report;
      if (points.size() > 1 || series) {
        if (!dequeue_path.empty() || !record_path.empty()) {
          throw ConfigError("--dequeue-log and --record-script need a single parameter point");
        }
        emit_series(report, stats_series(run_sweep(prepared, points)), fmt);
      } else {
        OpScript recorded;
        RunOptions opts;
        if (!record_path.empty()) opts.record = &recorded;
        const auto stats = run(prepared, points.front(), opts);
        emit_stats(report, stats, fmt);
        if (!dequeue_path.empty()) {
          std::ostringstream log;
          emit_dequeue_log(log, stats.dequeue_log);
          write_file_atomic(dequeue_path, log.str());
        }
        if (!record_path.empty()) {
          std::ostringstream s;
          write_script(s, recorded);
          write_file_atomic(record_path, s.str());
        }
      }
      deliver(out_path, report.str(), out);
    } else if (gt_cmd->parsed()) {
      std::ostringstream s;
      write_trace(s, gen_trace(gt));
      deliver(gt_out, s.str(), out);
    } else if (gs_cmd->parsed()) {
      std::ostringstream s;
      write_script(s, make_script(gs));
      deliver(gs_out, s.str(), out);
    } else if (ck_cmd->parsed()) {
      const auto fmt = parse_format(ck_format);
      std::vector<EquivalenceConfig> configs;
      std::size_t min_capacity = ~std::size_t{0};
      for (auto n : ck_units) {
        for (auto m : ck_blocks) {
          EquivalenceConfig c;
          c.data_width = ck_wr;
          c.timeout_width = ck_wo;
          c.id_width = ck_wid;
          c.geometry = {n, m};
          c.with_systolic = !no_systolic;
          c.checkpoint_every = checkpoint;
          (void)c.queue_config();
          configs.push_back(c);
          min_capacity = std::min(min_capacity, c.geometry.capacity());
        }
      }
      std::vector<OpScript> batch;
      std::vector<std::uint64_t> seeds;
      if (!scripts.empty()) {
        for (const auto& path : scripts) {
          batch.push_back(read_script_file(path));
          seeds.push_back(batch.back().params.seed);
        }
      } else {
        if (seed_to < seed_from) throw ConfigError("--seed-to must not be below --seed-from");
        cs.data_width = ck_wr;
        cs.timeout_width = ck_wo;
        if (ck_cmd->count("--max-id") == 0) cs.max_id = static_cast<Id>(min_capacity);
        for (auto s = seed_from; s <= seed_to; ++s) {
          cs.seed = s;
          batch.push_back(make_script(cs));
          seeds.push_back(s);
        }
      }
      for (const auto& s : batch) {
        if (s.params.allow_inversions) {
          for (auto& c : configs) c.allow_inversions = true;
        }
      }
      const auto reports = check_batch(batch, configs);
      std::vector<CheckRow> rows;
      std::optional<std::size_t> first_bad;
      for (std::size_t i = 0; i < reports.size(); ++i) {
        rows.push_back({seeds[i / configs.size()], configs[i % configs.size()], reports[i]});
        if (!reports[i].equivalent && !first_bad) first_bad = i;
      }
      std::ostringstream report;
      emit_checks(report, rows, fmt);
      deliver(ck_out, report.str(), out);
      if (first_bad) {
        const auto& cfg = configs[*first_bad % configs.size()];
        const auto minimal = shrink(batch[*first_bad / configs.size()], cfg);
        EquivalenceConfig exact = cfg;
        exact.checkpoint_every = 1;
        std::ostringstream doc;
        write_counterexample(doc, minimal, cfg, check_equivalence(minimal, exact));
        write_file_atomic(cex_path, doc.str());
        err << "error: divergence: " << reports[*first_bad].divergence->what << " (counterexample: " << cex_path
            << ")\n";
        return kExitDivergence;
      }
    } else if (bn_cmd->parsed()) {
      QueueConfig c;
      c.data_width = bq.wr;
      c.timeout_width = bq.wo;
      c.id_width = bq.wid;
      c.capacity = bq.units * bq.blocks;
      c.cycle_time_ns = bq.cycle_ns;
      c.validate();
      const systolic::Geometry g{bq.units, bq.blocks};
      g.validate();
      std::ostringstream report;
      emit_saturation(report, saturate(c, g, bn_cycles, bn_seed), bq.cycle_ns, parse_format(bn_format));
      deliver(bn_out, report.str(), out);
    }
  } catch (const ConfigError& e) {
    err << "error: validation: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "error: parse: " << e.what() << '\n';
    return kExitParse;
  } catch (const CapacityError& e) {
    err << "error: capacity: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const IoError& e) {
    err << "error: io: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}

}  // namespace gsq
