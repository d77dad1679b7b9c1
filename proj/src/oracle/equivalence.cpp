#include "gsq/equivalence.hpp"

#include <algorithm>
#include <exception>
#include <memory>

#include "gsq/timer.hpp"

namespace gsq {

namespace {

std::string describe(const std::optional<Element>& e) {
  return e ? std::to_string(e->id) : std::string("none");
}

class Replay {
 public:
  Replay(const OpScript& script, const EquivalenceConfig& cfg)
      : script_(script), cfg_(cfg), qc_(cfg.queue_config()), core_(qc_) {
    if (cfg.with_systolic) sys_ = std::make_unique<systolic::SystolicState>(qc_, cfg.geometry);
    report_.queue_width = qc_.data_width;
  }

  EquivalenceReport run() {
    const auto& ops = script_.ops;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (!apply(i, ops[i])) return finish();
      report_.ops_replayed = i + 1;
      const bool last = i + 1 == ops.size();
      if (last || (cfg_.checkpoint_every != 0 && (i + 1) % cfg_.checkpoint_every == 0)) {
        if (!checkpoint(i)) return finish();
      }
    }
    return finish();
  }

 private:
  bool apply(std::size_t index, const ScriptOp& op) {
    const Data rt = static_cast<Data>(op.tick) & qc_.data_mask();
    if (op.id > qc_.max_id()) {
      throw ConfigError("script id " + std::to_string(op.id) + " does not fit " + std::to_string(qc_.id_width) +
                        " bits");
    }
    try {
      if (sys_) {
        while (!sys_->ready()) sys_->step();
      }
      switch (op.kind) {
        case ScriptOp::Kind::Push: {
          const Data data = make_expiration(rt, op.timeout, qc_);
          if (core_.full() && !core_.contains(op.id)) {
            throw ConfigError("script holds more than " + std::to_string(qc_.capacity) + " live ids");
          }
          core_.push(op.id, data);
          if (sys_) sys_->issue(systolic::ExternalOp::push(op.id, data));
          oracle_.push(op.id, op.tick, op.timeout);
          break;
        }
        case ScriptOp::Kind::PopIfExpired: {
          std::optional<Element> a;
          if (auto h = core_.peek(); h && is_expired(h->data, rt, qc_.data_width)) a = core_.pop();
          std::optional<Element> b = a;
          if (sys_) {
            b.reset();
            if (auto h = sys_->peek(); h && is_expired(h->data, rt, qc_.data_width)) {
              b = sys_->issue(systolic::ExternalOp::pop()).popped;
            }
          }
          const auto c = oracle_.pop_if_expired(op.tick);
          const auto a_id = a ? a->id : kNoId;
          const auto b_id = b ? b->id : kNoId;
          const auto c_id = c ? c->id : kNoId;
          if (a_id != c_id || b_id != c_id || (a && b && a->data != b->data)) {
            return diverge(index, "pop at tick " + std::to_string(op.tick) + ": behavioral " + describe(a) +
                                      ", systolic " + (sys_ ? describe(b) : std::string("n/a")) + ", oracle " +
                                      (c ? std::to_string(c->id) : std::string("none")));
          }
          if (c) report_.stream.push_back({op.tick, c->id});
          break;
        }
        case ScriptOp::Kind::Remove:
          core_.remove(op.id);
          if (sys_) sys_->issue(systolic::ExternalOp::remove(op.id));
          oracle_.remove(op.id);
          break;
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      return diverge(index, std::string("systolic fault: ") + e.what());
    }
    return true;
  }

  bool checkpoint(std::size_t index) {
    std::vector<Element> sys_state;
    if (sys_) {
      try {
        sys_->drain();
      } catch (const std::exception& e) {
        return diverge(index, std::string("systolic fault: ") + e.what());
      }
      sys_state = sys_->snapshot();
      const auto items = core_.items();
      if (!std::equal(sys_state.begin(), sys_state.end(), items.begin(), items.end())) {
        return diverge(index, "systolic contents differ from the behavioral queue");
      }
    }
    const auto entries = oracle_.entries();
    const auto items = core_.items();
    const bool same = std::equal(entries.begin(), entries.end(), items.begin(), items.end(),
                                 [&](const WideOracleQueue::Entry& o, const Element& e) {
                                   return o.id == e.id && (static_cast<Data>(o.expiration) & qc_.data_mask()) == e.data;
                                 });
    if (!same) return diverge(index, "behavioral order differs from the oracle");
    return true;
  }

  bool diverge(std::size_t index, std::string what) {
    Divergence d;
    d.op_index = index;
    d.what = std::move(what);
    d.core_state.assign(core_.items().begin(), core_.items().end());
    if (sys_) {
      try {
        sys_->drain();
        d.systolic_state = sys_->snapshot();
      } catch (const std::exception&) {
        for (std::size_t u = 0; u < sys_->geometry().units; ++u) {
          for (const auto& s : sys_->blocks(u)) {
            if (s.id != kNoId) d.systolic_state.push_back(s);
          }
        }
      }
    }
    d.oracle_state = oracle_.entries();
    report_.equivalent = false;
    report_.divergence = std::move(d);
    return false;
  }

  EquivalenceReport finish() {
    report_.oracle_max_tick = oracle_.max_expiration();
    report_.oracle_bits = bits_for_tick(report_.oracle_max_tick);
    report_.insertion_cases = core_.insertion_cases();
    if (sys_) report_.propagation_rows = sys_->counters().rows;
    return std::move(report_);
  }

  const OpScript& script_;
  const EquivalenceConfig& cfg_;
  QueueConfig qc_;
  BehavioralQueue core_;
  std::unique_ptr<systolic::SystolicState> sys_;
  WideOracleQueue oracle_;
  EquivalenceReport report_;
};

}  // namespace

QueueConfig EquivalenceConfig::queue_config() const {
  QueueConfig c;
  c.data_width = data_width;
  c.timeout_width = timeout_width;
  c.id_width = id_width;
  c.capacity = geometry.capacity();
  c.validate();
  geometry.validate();
  return c;
}

EquivalenceReport check_equivalence(const OpScript& script, const EquivalenceConfig& config) {
  if (auto why = domain_violation(script.ops, config.data_width, config.allow_inversions)) {
    throw ConfigError("script outside the " + std::to_string(config.data_width) + "-bit queue's exact domain: " + *why);
  }
  return Replay(script, config).run();
}

std::vector<EquivalenceReport> check_batch(const std::vector<OpScript>& scripts,
                                           const std::vector<EquivalenceConfig>& configs) {
  const std::size_t total = scripts.size() * configs.size();
  std::vector<EquivalenceReport> out(total);
  std::vector<std::exception_ptr> errors(total);
  const auto n = static_cast<std::ptrdiff_t>(total);
#if defined(GSQ_HAVE_OPENMP)
#pragma omp parallel for schedule(dynamic, 4)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = check_equivalence(scripts[k / configs.size()], configs[k % configs.size()]);
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
