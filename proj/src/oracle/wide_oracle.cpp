#include <algorithm>
#include <bit>

#include "gsq/oracle.hpp"

namespace gsq {

void WideOracleQueue::push(Id id, Tick now, std::uint64_t timeout) {
  remove(id);
  const Key key{now + timeout, seq_++, id};
  by_id_.emplace(id, key);
  order_.insert(key);
  max_expiration_ = std::max(max_expiration_, now + timeout);
}

bool WideOracleQueue::remove(Id id) {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) return false;
  order_.erase(it->second);
  by_id_.erase(it);
  return true;
}

std::vector<Id> WideOracleQueue::expired(Tick now) {
  std::vector<Id> out;
  while (auto e = pop_if_expired(now)) out.push_back(e->id);
  return out;
}

std::optional<WideOracleQueue::Entry> WideOracleQueue::pop_if_expired(Tick now) {
  if (order_.empty()) return std::nullopt;
  const auto [exp, seq, id] = *order_.begin();
  if (exp >= now) return std::nullopt;
  order_.erase(order_.begin());
  by_id_.erase(id);
  return Entry{id, exp};
}

std::optional<WideOracleQueue::Entry> WideOracleQueue::peek() const {
  if (order_.empty()) return std::nullopt;
  const auto& [exp, seq, id] = *order_.begin();
  return Entry{id, exp};
}

std::optional<Tick> WideOracleQueue::expiration(Id id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) return std::nullopt;
  return std::get<0>(it->second);
}

std::vector<WideOracleQueue::Entry> WideOracleQueue::entries() const {
  std::vector<Entry> out;
  out.reserve(order_.size());
  for (const auto& [exp, seq, id] : order_) out.push_back({id, exp});
  return out;
}

std::vector<Id> WideOracleQueue::ids() const {
  std::vector<Id> out;
  out.reserve(by_id_.size());
  for (const auto& kv : by_id_) out.push_back(kv.first);
  std::sort(out.begin(), out.end());
  return out;
}

unsigned bits_for_tick(Tick max_tick) noexcept {
  return std::max(1U, static_cast<unsigned>(std::bit_width(max_tick)));
}

}  // namespace gsq
