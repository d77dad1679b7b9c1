#include <algorithm>
#include <ostream>
#include <unordered_set>

#include "gsq/systolic.hpp"
#include "gsq/timer.hpp"

namespace gsq::systolic {

SystolicState::SystolicState(QueueConfig config, Geometry geometry) : config_(config), geometry_(geometry) {
  geometry_.validate();
  config_.capacity = geometry_.capacity();
  config_.validate();
  slots_.assign(geometry_.capacity(), empty_slot(config_.data_width));
  units_.resize(geometry_.units);
  for (auto& u : units_) u.plan.next_blocks.reserve(geometry_.blocks);
  now_.assign(geometry_.units, Phase::Idle);
  errors_.resize(geometry_.units);
}

std::span<const Element> SystolicState::blocks(std::size_t unit) const noexcept {
  return {slots_.data() + unit * geometry_.blocks, geometry_.blocks};
}

std::optional<Element> SystolicState::peek() const noexcept {
  if (slots_.front().id == kNoId) return std::nullopt;
  return slots_.front();
}

IssueResult SystolicState::issue(const ExternalOp& op) {
  if (issue_gate_ != 0) {
    ++counters_.rejected;
    return {};
  }
  UnitOps ops;
  IssueResult result{true, std::nullopt};
  const Element head = slots_.front();
  switch (op.kind) {
    case ExternalOp::Kind::Push:
      if (op.id == kNoId || op.id > config_.max_id()) {
        throw ConfigError("push id " + std::to_string(op.id) + " outside [1, " + std::to_string(config_.max_id()) + "]");
      }
      if (op.data > config_.data_mask()) {
        throw ConfigError("push data " + std::to_string(op.data) + " wider than data_width");
      }
      ops.enqueue = Element{op.id, op.data};
      ops.remove = op.id;
      ops.highest = head.id != kNoId && msb(head.data, config_.data_width);
      ++occupancy_;
      break;
    case ExternalOp::Kind::Pop:
      if (head.id == kNoId) {
        ++counters_.rejected;
        return {};
      }
      ops.dequeue = head.id;
      result.popped = head;
      --occupancy_;
      break;
    case ExternalOp::Kind::Remove:
      if (op.id == kNoId) throw ConfigError("remove id must be nonzero");
      ops.remove = op.id;
      break;
  }
  units_.front().inbox = ops;
  if (active_.empty() || active_.front() != 0) active_.insert(active_.begin(), 0);
  issue_gate_ = kOpCycles;
  ++counters_.accepted;
  return result;
}

Phase SystolicState::phase_now(std::size_t u) const noexcept {
  switch (units_[u].phase) {
    case Phase::Search:
      return Phase::ShiftSet;
    case Phase::ShiftSet:
      return Phase::Finish;
    default:
      return units_[u].inbox ? Phase::Search : Phase::Idle;
  }
}

Element SystolicState::projected_head(std::size_t u) const noexcept {
  if (u >= geometry_.units) return empty_slot(config_.data_width);
  switch (now_[u]) {
    case Phase::Search:
      return head_after(blocks(u), *units_[u].inbox, config_.data_width);
    case Phase::ShiftSet:
      return units_[u].plan.next_blocks.front();
    default:
      return blocks(u).front();
  }
}

void SystolicState::compute(std::size_t u) {
  try {
    plan_unit(blocks(u), *units_[u].inbox, projected_head(u + 1), config_.data_width, units_[u].plan);
  } catch (const std::exception& e) {
    errors_[u] = e.what();
  }
}

void SystolicState::commit(std::size_t u) {
  auto& unit = units_[u];
  switch (now_[u]) {
    case Phase::Search:
      unit.ops = *unit.inbox;
      unit.inbox.reset();
      break;
    case Phase::ShiftSet:
      std::copy(unit.plan.next_blocks.begin(), unit.plan.next_blocks.end(),
                slots_.begin() + static_cast<std::ptrdiff_t>(u * geometry_.blocks));
      break;
    case Phase::Finish:
      if (!unit.plan.out.empty()) {
        if (u + 1 < geometry_.units) {
          if (units_[u + 1].inbox) {
            errors_[u] = "interface register to unit " + std::to_string(u + 1) + " still occupied";
          } else {
            units_[u + 1].inbox = unit.plan.out;
          }
        } else if (unit.plan.out.push_first || unit.plan.out.enqueue) {
          errors_[u] = "capacity";
        }
      }
      break;
    case Phase::Idle:
      break;
  }
  unit.phase = now_[u];
}

void SystolicState::settle() {
  std::vector<std::size_t> next;
  next.reserve(active_.size() + 1);
  std::string failure;
  bool capacity = false;
  for (auto u : active_) {
    const auto& unit = units_[u];
    if (!errors_[u].empty() && failure.empty()) {
      capacity = errors_[u] == "capacity";
      failure = capacity ? "queue capacity " + std::to_string(geometry_.capacity()) + " exceeded at cycle " +
                               std::to_string(cycle_)
                         : "cycle " + std::to_string(cycle_) + ", unit " + std::to_string(u) + ": " + errors_[u];
    }
    errors_[u].clear();
    const Phase p = now_[u];
    if (p == Phase::Search) {
      ++counters_.unit_ops;
      if (unit.plan.row) ++counters_.rows[static_cast<std::size_t>(*unit.plan.row)];
    } else if (p == Phase::ShiftSet && unit.plan.removed) {
      --occupancy_;
      if (unit.ops.kinds() == OpSet{OpKind::Remove}) removed_.push_back(*unit.plan.removed);
    }
    if (log_ != nullptr && p != Phase::Idle) {
      *log_ << "cycle=" << cycle_ << ",unit=" << u << ",phase=" << to_string(p) << ",ops=" << unit.ops.to_string();
      if (p == Phase::Finish) *log_ << ",latched=" << unit.plan.out.to_string();
      *log_ << '\n';
    }
    if (p == Phase::Search || p == Phase::ShiftSet) {
      next.push_back(u);
    } else if (p == Phase::Finish && u + 1 < geometry_.units && units_[u + 1].inbox) {
      next.push_back(u + 1);
    }
    now_[u] = Phase::Idle;
  }
  std::sort(next.begin(), next.end());
  next.erase(std::unique(next.begin(), next.end()), next.end());
  active_ = std::move(next);
  ++cycle_;
  if (issue_gate_ > 0) --issue_gate_;
  if (!failure.empty()) {
    if (capacity) throw CapacityError(failure);
    throw HazardError(failure);
  }
}

void SystolicState::drain() {
  while (!quiescent()) step();
}

void SystolicState::skip_idle(std::uint64_t cycles) {
  if (!quiescent()) throw std::logic_error("cannot skip cycles while operations are in flight");
  cycle_ += cycles;
  issue_gate_ = cycles >= issue_gate_ ? 0 : issue_gate_ - static_cast<unsigned>(cycles);
}

std::vector<Element> SystolicState::snapshot() const {
  if (!quiescent()) {
    throw std::logic_error("snapshot requested while operations are in flight");
  }
  std::vector<Element> out;
  for (const auto& s : slots_) {
    if (s.id != kNoId) out.push_back(s);
  }
  return out;
}

std::size_t SystolicState::count_live_slots() const {
  std::unordered_set<Id> ids;
  for (const auto& s : slots_) {
    if (s.id != kNoId) ids.insert(s.id);
  }
  auto add = [&](const UnitOps& ops) {
    if (ops.enqueue) ids.insert(ops.enqueue->id);
    if (ops.push_first) ids.insert(ops.push_first->id);
  };
  for (const auto& u : units_) {
    if (u.inbox) add(*u.inbox);
    if (u.phase == Phase::Search) add(u.ops);
    if (u.phase == Phase::ShiftSet) add(u.plan.out);
  }
  return ids.size();
}

bool operator==(const SystolicState& a, const SystolicState& b) {
  if (a.slots_ != b.slots_ || a.cycle_ != b.cycle_ || a.issue_gate_ != b.issue_gate_ ||
      a.occupancy_ != b.occupancy_ || a.active_ != b.active_ || a.removed_ != b.removed_ ||
      a.counters_.rows != b.counters_.rows || a.counters_.unit_ops != b.counters_.unit_ops) {
    return false;
  }
  for (std::size_t u = 0; u < a.units_.size(); ++u) {
    const auto& x = a.units_[u];
    const auto& y = b.units_[u];
    if (x.phase != y.phase || x.ops != y.ops || x.inbox != y.inbox) return false;
  }
  return true;
}

}  // namespace gsq::systolic
