#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "gsq/harness.hpp"
#include "gsq/timer.hpp"

namespace gsq {

Id FlowTable::assign(const std::string& key) {
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  if (ids_.size() >= max_id_) {
    throw ConfigError("more than " + std::to_string(max_id_) + " flows; widen the id field");
  }
  const auto id = static_cast<Id>(ids_.size() + 1);
  ids_.emplace(key, id);
  return id;
}

std::optional<Id> FlowTable::find(const std::string& key) const {
  if (auto it = ids_.find(key); it != ids_.end()) return it->second;
  return std::nullopt;
}

bool FlowTable::activate(Id id) {
  if (id >= active_.size()) active_.resize(static_cast<std::size_t>(id) + 1, false);
  if (active_[id]) return false;
  active_[id] = true;
  ++active_count_;
  return true;
}

void FlowTable::deactivate(Id id) {
  if (id < active_.size() && active_[id]) {
    active_[id] = false;
    --active_count_;
  }
}

PreparedTrace prepare_trace(const Trace& trace, Id max_id) {
  FlowTable table(max_id);
  PreparedTrace out;
  out.arrival_ns.reserve(trace.records.size());
  out.flow_id.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    out.arrival_ns.push_back(r.arrival_ns);
    out.flow_id.push_back(table.assign(r.flow_key()));
  }
  out.flows = table.size();
  return out;
}

SimStats run(const PreparedTrace& trace, const SimParams& params, const RunOptions& options) {
  params.validate();
  const QueueConfig config = params.queue_config();
  if (trace.flows > config.max_id()) {
    throw ConfigError("trace has " + std::to_string(trace.flows) + " flows but ids are " +
                      std::to_string(params.id_width) + " bits wide");
  }
  auto backend = make_backend(params.backend, config, params.geometry());
  FlowTable table(config.max_id());
  const unsigned width = config.data_width;
  const Data mask = config.data_mask();
  const std::uint64_t p = params.precision;
  auto arrival_cycle = [&](std::size_t i) {
    return static_cast<std::uint64_t>(std::floor(static_cast<double>(trace.arrival_ns[i]) / params.cycle_time_ns));
  };

  SimStats stats;
  stats.flows = trace.flows;
  std::deque<Id> pending;
  std::size_t next = 0;
  const std::size_t n = trace.flow_id.size();
  std::uint64_t cycle = 0;
  std::uint64_t last_issue = 0;
  bool issued_any = false;
  bool last_was_pop = false;

  while (true) {
    while (next < n && arrival_cycle(next) <= cycle) pending.push_back(trace.flow_id[next++]);
    const Tick tick = cycle / p;
    const Data rt = static_cast<Data>(tick) & mask;
    std::optional<Element> head = backend->peek();

    if (backend->ready()) {
      const bool can_pop = head && is_expired(head->data, rt, width);
      const bool can_push = !pending.empty();
      // Alternate while both sides wait, so neither starves.
      const bool do_pop = can_pop && (!can_push || !last_was_pop);
      if (do_pop) {
        const Element e = backend->pop();
        table.deactivate(e.id);
        stats.dequeue_log.push_back({tick, e.id});
        ++stats.pop_count;
        if (options.record != nullptr) options.record->ops.push_back(ScriptOp::pop(tick));
      } else if (can_push) {
        const Id id = pending.front();
        if (!table.active(id) && table.active_count() >= config.capacity) {
          throw CapacityError("flow " + std::to_string(id) + " arrived with all " + std::to_string(config.capacity) +
                              " timers live at cycle " + std::to_string(cycle));
        }
        pending.pop_front();
        backend->push(id, make_expiration(rt, params.timeout, config));
        table.activate(id);
        ++stats.push_count;
        if (options.record != nullptr) options.record->ops.push_back(ScriptOp::push(tick, id, params.timeout));
      }
      if (do_pop || can_push) {
        last_was_pop = do_pop;
        last_issue = cycle;
        issued_any = true;
        ++stats.ops_issued;
        stats.max_occupancy = std::max<std::uint64_t>(stats.max_occupancy, table.active_count());
        head = backend->peek();
      }
    }

    if (next == n && pending.empty() && !head && backend->quiescent()) break;

    if (backend->quiescent() && pending.empty()) {
      // Nothing can happen before the next arrival or the head's expiry.
      std::uint64_t target = std::numeric_limits<std::uint64_t>::max();
      if (next < n) target = arrival_cycle(next);
      if (head) {
        const Tick ahead = (static_cast<Tick>(head->data) - rt) & mask;
        target = std::min(target, (tick + ahead + 1) * p);
      }
      target = std::max(target, cycle + 1);
      backend->skip(target - cycle);
      cycle = target;
    } else {
      backend->step();
      ++cycle;
    }
  }

  stats.total_cycles = issued_any ? last_issue + systolic::kOpCycles : 0;
  if (stats.total_cycles > 0) {
    stats.modeled_mpps = static_cast<double>(stats.ops_issued) * 1000.0 /
                         (static_cast<double>(stats.total_cycles) * params.cycle_time_ns);
  }
  if (options.record != nullptr) {
    options.record->params.data_width = params.data_width;
    options.record->params.timeout_width = params.timeout_width;
    options.record->params.max_id = static_cast<Id>(std::min<std::size_t>(config.max_id(), trace.flows));
    options.record->params.ops = options.record->ops.size();
  }
  return stats;
}

std::vector<SeriesPoint> run_sweep(const PreparedTrace& trace, const std::vector<SimParams>& points) {
  std::vector<SeriesPoint> out(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  const auto count = static_cast<std::ptrdiff_t>(points.size());
#if defined(GSQ_HAVE_OPENMP)
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k].params = points[k];
      out[k].stats = run(trace, points[k]);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace gsq
