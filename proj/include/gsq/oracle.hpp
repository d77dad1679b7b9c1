#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "gsq/config.hpp"

namespace gsq {

/// Reference timer queue on unbounded ticks: nothing ever wraps, so it is
/// correct by construction. Ties on expiration break by push order.
class WideOracleQueue {
 public:
  struct Entry {
    Id id = kNoId;
    Tick expiration = 0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  /// Upsert: the id expires at now + timeout and moves behind earlier pushes
  /// with the same expiration.
  void push(Id id, Tick now, std::uint64_t timeout);
  bool remove(Id id);
  /// Removes and returns every entry with expiration < now, earliest first.
  std::vector<Id> expired(Tick now);
  /// Removes and returns the earliest entry if it has expired by `now`.
  std::optional<Entry> pop_if_expired(Tick now);

  [[nodiscard]] std::optional<Entry> peek() const;
  [[nodiscard]] std::optional<Tick> expiration(Id id) const;
  [[nodiscard]] std::size_t size() const noexcept { return by_id_.size(); }
  [[nodiscard]] bool empty() const noexcept { return by_id_.empty(); }
  /// Entries in dequeue order.
  [[nodiscard]] std::vector<Entry> entries() const;
  /// Live ids, ascending.
  [[nodiscard]] std::vector<Id> ids() const;
  /// Largest expiration ever stored; drives the bit-width comparison.
  [[nodiscard]] Tick max_expiration() const noexcept { return max_expiration_; }

 private:
  using Key = std::tuple<Tick, std::uint64_t, Id>;

  std::unordered_map<Id, Key> by_id_;
  std::set<Key> order_;
  std::uint64_t seq_ = 0;
  Tick max_expiration_ = 0;
};

/// Bits a plain non-wrapping timestamp needs to represent `max_tick`.
[[nodiscard]] unsigned bits_for_tick(Tick max_tick) noexcept;

}  // namespace gsq
