#include "gsq/script.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <string_view>

#include "gsq/oracle.hpp"
#include "gsq/trace.hpp"

namespace gsq {

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t between(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + rng() % (hi - lo + 1);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::uint64_t parse_u64(std::string_view field, const char* what, std::size_t line) {
  std::uint64_t v = 0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError(std::string(what) + " is not an unsigned integer: '" + std::string(field) + "'", line);
  }
  return v;
}

double parse_double(std::string_view field, const char* what, std::size_t line) {
  double v = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError(std::string(what) + " is not a number: '" + std::string(field) + "'", line);
  }
  return v;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

std::vector<std::string_view> split(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

// Builds a script while tracking the oracle, so forced pops can keep every
// expired element within the lag bound.
class Generator {
 public:
  explicit Generator(const ScriptParams& p)
      : p_(p), rng_(p.seed), now_(p.start_tick), wrap_(std::uint64_t{1} << p.data_width) {}

  OpScript build() {
    OpScript script{p_, {}};
    ops_ = &script.ops;
    ops_->reserve(p_.ops);
    const double total = p_.push_weight + p_.pop_weight + p_.remove_weight;
    while (ops_->size() < p_.ops) {
      if (unit(rng_) < p_.advance_rate) advance(between(rng_, 1, p_.max_advance));
      const double pick = unit(rng_) * total;
      if (pick < p_.push_weight) {
        push();
      } else if (pick < p_.push_weight + p_.pop_weight) {
        ops_->push_back(ScriptOp::pop(now_));
        oracle_.pop_if_expired(now_);
      } else {
        const auto live = oracle_.ids();
        const Id id = !live.empty() && unit(rng_) < 0.5 ? live[rng_() % live.size()] : random_id();
        ops_->push_back(ScriptOp::remove(now_, id));
        oracle_.remove(id);
      }
    }
    ops_->resize(p_.ops);
    return script;
  }

 private:
  Id random_id() { return static_cast<Id>(between(rng_, 1, p_.max_id)); }

  void advance(std::uint64_t ticks) {
    const auto lag = p_.pop_lag_cap();
    for (std::uint64_t i = 0; i < ticks; ++i) {
      ++now_;
      while (true) {
        const auto head = oracle_.peek();
        if (!head || head->expiration + lag > now_) break;
        ops_->push_back(ScriptOp::pop(now_));
        oracle_.pop_if_expired(now_);
      }
    }
  }

  void push() {
    const auto cap = p_.timeout_cap();
    const auto live = oracle_.ids();
    Id id = random_id();
    if (!live.empty() && unit(rng_) < p_.dup_id_rate) id = live[rng_() % live.size()];

    std::uint64_t timeout = between(rng_, p_.min_timeout, cap);
    if (unit(rng_) < p_.wrap_straddle_rate) {
      // Expiration must cross the next multiple of 2^W.
      std::uint64_t gap = wrap_ - now_ % wrap_;
      if (gap > cap) {
        advance(gap - between(rng_, std::max<std::uint64_t>(p_.min_timeout, 1), cap));
        gap = wrap_ - now_ % wrap_;
      }
      timeout = between(rng_, std::max(gap, p_.min_timeout), cap);
    } else if (!live.empty() && unit(rng_) < p_.collision_rate) {
      const Id other = live[rng_() % live.size()];
      const Tick exp = *oracle_.expiration(other);
      if (exp > now_ && exp - now_ >= p_.min_timeout && exp - now_ <= cap) timeout = exp - now_;
    }
    if (!p_.allow_inversions) {
      // Meet the head instead of overtaking it across a boundary; raising
      // the timeout keeps a wrap-straddling push straddling.
      if (const auto head = oracle_.peek(); head && boundary_inversion(head->expiration, now_ + timeout, p_.data_width)) {
        timeout = head->expiration - now_;
      }
    }
    ops_->push_back(ScriptOp::push(now_, id, timeout));
    oracle_.push(id, now_, timeout);
  }

  const ScriptParams& p_;
  std::mt19937_64 rng_;
  Tick now_;
  std::uint64_t wrap_;
  WideOracleQueue oracle_;
  std::vector<ScriptOp>* ops_ = nullptr;
};

}  // namespace

void ScriptParams::validate() const {
  if (data_width < 3 || data_width > 32) throw ConfigError("script data width must lie in [3, 32]");
  if (timeout_width < 1 || data_width <= timeout_width + 1) {
    throw ConfigError("script needs data width > timeout width + 1");
  }
  if (max_id < 1) throw ConfigError("script needs at least one id");
  const auto cap = timeout_cap();
  if (min_timeout < 1 || min_timeout > cap || cap > (std::uint64_t{1} << timeout_width) - 1) {
    throw ConfigError("script timeout range must lie in (0, 2^timeout_width - 1]");
  }
  if (push_weight < 0 || pop_weight < 0 || remove_weight < 0 || push_weight + pop_weight + remove_weight <= 0) {
    throw ConfigError("operation weights must be non-negative with a positive sum");
  }
  for (double r : {advance_rate, dup_id_rate, collision_rate, wrap_straddle_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("script rates must lie in [0, 1]");
  }
  if (max_advance < 1) throw ConfigError("max_advance must be at least 1");
  if (cap + pop_lag_cap() >= (std::uint64_t{1} << (data_width - 1))) {
    throw ConfigError("timeout plus pop lag must stay below half the timestamp range");
  }
}

OpScript make_script(const ScriptParams& params) {
  params.validate();
  return Generator(params).build();
}

void write_script(std::ostream& out, const OpScript& script) {
  const auto& p = script.params;
  out << "# seed=" << p.seed << '\n'
      << "# ops=" << p.ops << '\n'
      << "# data_width=" << p.data_width << '\n'
      << "# timeout_width=" << p.timeout_width << '\n'
      << "# max_id=" << p.max_id << '\n'
      << "# min_timeout=" << p.min_timeout << '\n'
      << "# max_timeout=" << p.max_timeout << '\n'
      << "# start_tick=" << p.start_tick << '\n'
      << "# push_weight=" << fmt(p.push_weight) << '\n'
      << "# pop_weight=" << fmt(p.pop_weight) << '\n'
      << "# remove_weight=" << fmt(p.remove_weight) << '\n'
      << "# advance_rate=" << fmt(p.advance_rate) << '\n'
      << "# max_advance=" << p.max_advance << '\n'
      << "# dup_id_rate=" << fmt(p.dup_id_rate) << '\n'
      << "# collision_rate=" << fmt(p.collision_rate) << '\n'
      << "# wrap_straddle_rate=" << fmt(p.wrap_straddle_rate) << '\n'
      << "# max_pop_lag=" << p.max_pop_lag << '\n'
      << "# allow_inversions=" << (p.allow_inversions ? 1 : 0) << '\n';
  for (const auto& op : script.ops) {
    out << op.tick;
    switch (op.kind) {
      case ScriptOp::Kind::Push:
        out << ",push," << op.id << ',' << op.timeout;
        break;
      case ScriptOp::Kind::PopIfExpired:
        out << ",pop";
        break;
      case ScriptOp::Kind::Remove:
        out << ",remove," << op.id;
        break;
    }
    out << '\n';
  }
}

OpScript read_script(std::istream& in) {
  OpScript script;
  auto& p = script.params;
  std::string raw;
  std::size_t line = 0;
  Tick last = 0;
  bool explicit_ops = false;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = trim(raw);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const auto body = trim(text.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;  // free-form comment
      const auto key = trim(body.substr(0, eq));
      const auto value = trim(body.substr(eq + 1));
      auto u = [&] { return parse_u64(value, "parameter", line); };
      auto d = [&] { return parse_double(value, "parameter", line); };
      if (key == "seed") p.seed = u();
      else if (key == "ops") { p.ops = u(); explicit_ops = true; }
      else if (key == "data_width") p.data_width = static_cast<unsigned>(u());
      else if (key == "timeout_width") p.timeout_width = static_cast<unsigned>(u());
      else if (key == "max_id") p.max_id = static_cast<Id>(u());
      else if (key == "min_timeout") p.min_timeout = u();
      else if (key == "max_timeout") p.max_timeout = u();
      else if (key == "start_tick") p.start_tick = u();
      else if (key == "push_weight") p.push_weight = d();
      else if (key == "pop_weight") p.pop_weight = d();
      else if (key == "remove_weight") p.remove_weight = d();
      else if (key == "advance_rate") p.advance_rate = d();
      else if (key == "max_advance") p.max_advance = u();
      else if (key == "dup_id_rate") p.dup_id_rate = d();
      else if (key == "collision_rate") p.collision_rate = d();
      else if (key == "wrap_straddle_rate") p.wrap_straddle_rate = d();
      else if (key == "max_pop_lag") p.max_pop_lag = u();
      else if (key == "allow_inversions") p.allow_inversions = u() != 0;
      continue;
    }
    const auto f = split(text);
    ScriptOp op;
    op.tick = parse_u64(f[0], "tick", line);
    if (f.size() < 2) throw ParseError("missing operation", line);
    if (f[1] == "push") {
      if (f.size() != 4) throw ParseError("push expects tick,push,id,timeout", line);
      op.kind = ScriptOp::Kind::Push;
      op.id = static_cast<Id>(parse_u64(f[2], "id", line));
      op.timeout = parse_u64(f[3], "timeout", line);
      if (op.timeout == 0) throw ParseError("push timeout must be positive", line);
    } else if (f[1] == "pop") {
      if (f.size() != 2) throw ParseError("pop takes no arguments", line);
      op.kind = ScriptOp::Kind::PopIfExpired;
    } else if (f[1] == "remove") {
      if (f.size() != 3) throw ParseError("remove expects tick,remove,id", line);
      op.kind = ScriptOp::Kind::Remove;
      op.id = static_cast<Id>(parse_u64(f[2], "id", line));
    } else {
      throw ParseError("unknown operation '" + std::string(f[1]) + "'", line);
    }
    if (op.kind != ScriptOp::Kind::PopIfExpired && op.id == kNoId) throw ParseError("id 0 is reserved", line);
    if (op.tick < last) throw ParseError("ticks must not decrease", line);
    last = op.tick;
    script.ops.push_back(op);
  }
  if (in.bad()) throw IoError("read failure while loading script");
  if (!explicit_ops) p.ops = script.ops.size();
  return script;
}

OpScript read_script_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open script '" + path + "'");
  return read_script(in);
}

bool boundary_inversion(Tick head, Tick expiration, unsigned data_width) noexcept {
  const unsigned shift = data_width - 1;
  return expiration < head && (expiration >> shift) != (head >> shift);
}

std::optional<std::string> domain_violation(const std::vector<ScriptOp>& ops, unsigned data_width,
                                            bool allow_inversions) {
  const Tick half = Tick{1} << (data_width - 1);
  WideOracleQueue oracle;
  std::map<Tick, std::size_t> live;  // expiration -> count
  auto drop = [&](Tick exp) {
    auto it = live.find(exp);
    if (--it->second == 0) live.erase(it);
  };
  // Every live expiration and the current tick must fit in half the range,
  // both when the operation looks at the queue and after it has acted.
  auto fits = [&](Tick now) {
    if (live.empty()) return true;
    const Tick lo = std::min(live.begin()->first, now);
    const Tick hi = std::max(live.rbegin()->first, now);
    return hi - lo < half;
  };
  auto where = [](std::size_t i) { return "op " + std::to_string(i) + ": "; };
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const auto& op = ops[i];
    if (!fits(op.tick)) return where(i) + "live timestamps span half the range";
    switch (op.kind) {
      case ScriptOp::Kind::Push: {
        if (op.timeout >= half) return where(i) + "timeout reaches half the range";
        const Tick exp = op.tick + op.timeout;
        if (const auto head = oracle.peek();
            !allow_inversions && head && boundary_inversion(head->expiration, exp, data_width)) {
          return where(i) + "push expiring at " + std::to_string(exp) + " lands ahead of head " +
                 std::to_string(head->expiration) + " across a group boundary";
        }
        if (auto old = oracle.expiration(op.id)) drop(*old);
        oracle.push(op.id, op.tick, op.timeout);
        ++live[exp];
        break;
      }
      case ScriptOp::Kind::PopIfExpired:
        if (auto e = oracle.pop_if_expired(op.tick)) drop(e->expiration);
        break;
      case ScriptOp::Kind::Remove:
        if (auto old = oracle.expiration(op.id)) {
          drop(*old);
          oracle.remove(op.id);
        }
        break;
    }
    if (!fits(op.tick)) return where(i) + "live timestamps span half the range";
  }
  return std::nullopt;
}

}  // namespace gsq
