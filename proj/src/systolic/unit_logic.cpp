#include <bit>
#include <sstream>

#include "gsq/systolic.hpp"
#include "gsq/timer.hpp"

namespace gsq::systolic {

namespace {

constexpr std::uint64_t bit(std::size_t j) noexcept { return std::uint64_t{1} << j; }

// Bits [lo, hi).
constexpr std::uint64_t range(std::size_t lo, std::size_t hi) noexcept {
  if (hi <= lo) return 0;
  const std::uint64_t upto_hi = hi >= 64 ? ~std::uint64_t{0} : bit(hi) - 1;
  return upto_hi & ~(bit(lo) - 1);
}

constexpr OpSet kEnqueueRemove{OpKind::Enqueue, OpKind::Remove};
constexpr OpSet kEnqueueDequeue{OpKind::Enqueue, OpKind::Dequeue};
constexpr OpSet kRemovePushFirst{OpKind::Remove, OpKind::PushFirst};

[[noreturn]] void hazard(const std::string& what) { throw HazardError(what); }

std::string element_str(const Element& e) {
  return std::to_string(e.id) + ":" + std::to_string(e.data);
}

}  // namespace

void Geometry::validate() const {
  if (units < 1) {
    throw ConfigError("geometry needs at least one systolic unit");
  }
  if (blocks < 2 || blocks > 63) {
    throw ConfigError("shift blocks per unit must lie in [2, 63], got " + std::to_string(blocks));
  }
}

bool OpSet::legal() const noexcept {
  switch (bits) {
    case 0:
    case static_cast<std::uint8_t>(OpKind::Enqueue):
    case static_cast<std::uint8_t>(OpKind::Remove):
    case static_cast<std::uint8_t>(OpKind::Dequeue):
    case static_cast<std::uint8_t>(OpKind::PushFirst):
      return true;
    default:
      return *this == kEnqueueRemove || *this == kEnqueueDequeue || *this == kRemovePushFirst;
  }
}

std::string OpSet::to_string() const {
  std::string out;
  auto add = [&](OpKind k, const char* name) {
    if (!has(k)) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  add(OpKind::Enqueue, "Enqueue");
  add(OpKind::Remove, "Remove");
  add(OpKind::Dequeue, "Dequeue");
  add(OpKind::PushFirst, "PushFirst");
  return out.empty() ? "-" : out;
}

OpSet UnitOps::kinds() const noexcept {
  OpSet s;
  if (enqueue) s.add(OpKind::Enqueue);
  if (remove) s.add(OpKind::Remove);
  if (dequeue) s.add(OpKind::Dequeue);
  if (push_first) s.add(OpKind::PushFirst);
  return s;
}

std::string UnitOps::to_string() const {
  std::string out;
  auto sep = [&] {
    if (!out.empty()) out += '+';
  };
  if (enqueue) {
    sep();
    out += "E(" + element_str(*enqueue) + ")";
  }
  if (remove) {
    sep();
    out += "R(" + std::to_string(*remove) + ")";
  }
  if (dequeue) {
    sep();
    out += "D(" + std::to_string(*dequeue) + ")";
  }
  if (push_first) {
    sep();
    out += "PF(" + element_str(*push_first) + ")";
  }
  return out.empty() ? "-" : out;
}

bool compare_slot(const Element& slot, Data push_data, bool highest, unsigned width) noexcept {
  if (slot.id == kNoId) {
    return true;
  }
  if (!highest) {
    return slot.data > push_data;
  }
  const bool slot_msb = msb(slot.data, width);
  const bool push_msb = msb(push_data, width);
  if (slot_msb == push_msb) {
    return slot.data > push_data;
  }
  // Head in the upper group: lower-group slots hold wrapped values and sort
  // after every upper-group value.
  return !slot_msb && push_msb;
}

std::uint64_t unit_compare(std::span<const Element> slots, Data push_data, bool highest, unsigned width) noexcept {
  std::uint64_t flags = 0;
  for (std::size_t j = 0; j < slots.size(); ++j) {
    if (compare_slot(slots[j], push_data, highest, width)) flags |= bit(j);
  }
  return flags;
}

OpSet propagate(bool found_id, bool found_rank, OpSet in, bool spilled, bool downstream_nonempty) {
  if (in.empty() || !in.legal()) {
    throw HazardError("illegal operation set " + in.to_string());
  }
  OpSet out;
  if (in == kEnqueueRemove) {
    if (found_id && found_rank) return out;
    if (found_id) return kEnqueueDequeue;
    if (found_rank) {
      if (downstream_nonempty) out.add(OpKind::Remove);
      if (spilled) out.add(OpKind::PushFirst);
      return out;
    }
    return kEnqueueRemove;
  }
  if (in == kEnqueueDequeue) {
    return found_rank ? out : kEnqueueDequeue;
  }
  if (in == kRemovePushFirst) {
    if (found_id) return out;
    if (downstream_nonempty) out.add(OpKind::Remove);
    if (spilled) out.add(OpKind::PushFirst);
    return out;
  }
  if (in.has(OpKind::Enqueue)) {
    if (!found_rank) return OpSet{OpKind::Enqueue};
    if (spilled) out.add(OpKind::PushFirst);
    return out;
  }
  if (in.has(OpKind::Remove)) {
    if (downstream_nonempty) out.add(found_id ? OpKind::Dequeue : OpKind::Remove);
    return out;
  }
  if (in.has(OpKind::Dequeue)) {
    if (downstream_nonempty) out.add(OpKind::Dequeue);
    return out;
  }
  if (spilled) out.add(OpKind::PushFirst);
  return out;
}

void plan_unit(std::span<const Element> blocks, const UnitOps& ops, const Element& next_head, unsigned width,
               UnitPlan& plan) {
  const std::size_t m = blocks.size();
  if (m < 2) hazard("a systolic unit needs at least two shift blocks");
  const OpSet in = ops.kinds();
  if (in.empty() || !in.legal()) hazard("illegal operation set " + in.to_string());

  plan.next_blocks.assign(blocks.begin(), blocks.end());
  plan.out = UnitOps{};
  plan.id_match = 0;
  plan.compare_flag = 0;
  plan.removed.reset();
  plan.row.reset();
  plan.spilled = false;
  plan.pulled = false;

  bool seen_empty = false;
  for (const auto& s : blocks) {
    if (s.id == kNoId) {
      seen_empty = true;
    } else if (seen_empty) {
      hazard("live slot behind an empty slot");
    }
  }
  const bool next_live = next_head.id != kNoId;

  // Search: one-hot id match over the M local slots plus the next head.
  int r = -1;
  if (ops.remove) {
    for (std::size_t j = 0; j < m; ++j) {
      if (blocks[j].id == *ops.remove) plan.id_match |= bit(j);
    }
    if (next_live && next_head.id == *ops.remove) plan.id_match |= bit(m);
    if (std::popcount(plan.id_match) > 1) hazard("id match is not one-hot for id " + std::to_string(*ops.remove));
    const std::uint64_t local = plan.id_match & range(0, m);
    if (local != 0) r = std::countr_zero(local);
  }
  if (ops.dequeue) {
    if (blocks[0].id != *ops.dequeue) {
      hazard("dequeue expected head " + std::to_string(*ops.dequeue) + " but found " + std::to_string(blocks[0].id));
    }
    plan.id_match = 1;
    r = 0;
  }

  // Search: rank position from the overflow-control comparators, M local
  // flags plus the lookahead flag for the next unit's head. The matched slot
  // is masked out of the rank search.
  std::optional<Element> x;
  bool found_rank = false;
  std::size_t f = 0;  // final index of x
  if (ops.enqueue) {
    x = ops.enqueue;
    plan.compare_flag = unit_compare(blocks, x->data, ops.highest, width);
    if (compare_slot(next_head, x->data, ops.highest, width)) plan.compare_flag |= bit(m);
    int p = -1;
    for (std::size_t j = 0; j < m; ++j) {
      if (static_cast<int>(j) == r) continue;
      const bool flag = (plan.compare_flag & bit(j)) != 0;
      if (flag && p < 0) {
        p = static_cast<int>(j);
      } else if (!flag && p >= 0) {
        hazard("compare_flag is not a 0..01..1 pattern");
      }
    }
    const bool look = (plan.compare_flag & bit(m)) != 0;
    if (p >= 0 && !look) hazard("next head sorts before a local slot");
    if (p < 0 && look) p = static_cast<int>(m);
    if (p >= 0) {
      found_rank = true;
      f = static_cast<std::size_t>(p) - ((r >= 0 && p > r) ? 1 : 0);
    }
  }
  if (ops.push_first) {
    x = ops.push_first;
    found_rank = true;
    f = 0;
  }

  // Shift/set control from the search results.
  std::uint64_t set = 0, shl = 0, shr = 0, pull = 0, clear = 0;
  bool spill_x = false;
  if (x && found_rank) {
    if (r < 0) {
      if (f < m) {
        set = bit(f);
        shr = range(f + 1, m);
      } else {
        spill_x = true;
      }
    } else if (f >= static_cast<std::size_t>(r)) {
      shl = range(static_cast<std::size_t>(r), f);
      set = bit(f);
    } else {
      set = bit(f);
      shr = range(f + 1, static_cast<std::size_t>(r) + 1);
    }
  } else if (r >= 0) {
    shl = range(static_cast<std::size_t>(r), m - 1);
    (next_live ? pull : clear) = bit(m - 1);
  }
  const std::uint64_t sources[] = {set, shl, shr, pull, clear};
  std::uint64_t seen = 0;
  for (auto s : sources) {
    if ((seen & s) != 0) hazard("two writes to one shift block in a single cycle");
    seen |= s;
  }

  std::optional<Element> spill;
  if (spill_x) {
    spill = x;
  } else if (x && found_rank && r < 0 && blocks[m - 1].id != kNoId) {
    // Shifting right with nothing removed pushes the tail out.
    spill = blocks[m - 1];
  }
  const Element empty = empty_slot(width);
  for (std::size_t j = 0; j < m; ++j) {
    const std::uint64_t b = bit(j);
    if (set & b) {
      plan.next_blocks[j] = *x;
    } else if (shl & b) {
      plan.next_blocks[j] = blocks[j + 1];
    } else if (shr & b) {
      plan.next_blocks[j] = blocks[j - 1];
    } else if (pull & b) {
      plan.next_blocks[j] = next_head;
    } else if (clear & b) {
      plan.next_blocks[j] = empty;
    }
  }
  // Slots vacated behind the occupied run hold the empty encoding.
  for (std::size_t j = 0; j < m; ++j) {
    if (plan.next_blocks[j].id == kNoId) plan.next_blocks[j] = empty;
  }

  const bool found_id = r >= 0;
  if (ops.remove && found_id) plan.removed = blocks[static_cast<std::size_t>(r)];
  plan.spilled = spill.has_value();
  plan.pulled = pull != 0;
  if (in == kEnqueueRemove) {
    plan.row = found_id ? (found_rank ? PropagationRow::BothFound : PropagationRow::IdOnly)
                        : (found_rank ? PropagationRow::RankOnly : PropagationRow::Neither);
  }

  const OpSet out = propagate(found_id, found_rank, in, plan.spilled, next_live);
  if (out.has(OpKind::Enqueue)) plan.out.enqueue = ops.enqueue;
  if (out.has(OpKind::Remove)) plan.out.remove = ops.remove;
  if (out.has(OpKind::Dequeue) != plan.pulled) hazard("dequeue propagation disagrees with the tail pull");
  if (plan.pulled) plan.out.dequeue = next_head.id;
  if (out.has(OpKind::PushFirst) != plan.spilled) hazard("push_first propagation disagrees with the tail spill");
  if (plan.spilled) plan.out.push_first = spill;
  plan.out.highest = ops.highest;
}

Element head_after(std::span<const Element> blocks, const UnitOps& ops, unsigned width) noexcept {
  std::size_t skip = blocks.size();
  if (ops.dequeue) {
    skip = 0;
  } else if (ops.remove) {
    for (std::size_t j = 0; j < blocks.size(); ++j) {
      if (blocks[j].id == *ops.remove) {
        skip = j;
        break;
      }
    }
  }
  if (ops.push_first) return *ops.push_first;
  const Element* first = nullptr;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    if (j == skip) continue;
    if (blocks[j].id != kNoId) first = &blocks[j];
    break;
  }
  if (ops.enqueue && (first == nullptr || compare_slot(*first, ops.enqueue->data, ops.highest, width))) {
    return *ops.enqueue;
  }
  return first != nullptr ? *first : empty_slot(width);
}

const char* to_string(Phase p) noexcept {
  switch (p) {
    case Phase::Idle:
      return "idle";
    case Phase::Search:
      return "search";
    case Phase::ShiftSet:
      return "shift_set";
    case Phase::Finish:
      return "finish";
  }
  return "?";
}

}  // namespace gsq::systolic
