#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gsq/config.hpp"

namespace gsq {

/// Outcome of a push: whether it updated an existing element and where the
/// element now sits (0 = head).
struct PushReport {
  bool was_update = false;
  std::size_t position = 0;

  friend bool operator==(const PushReport&, const PushReport&) = default;
};

/// Which of the four grouped-insertion layouts a push hit, indexed by
/// (head MSB, incoming MSB): [0]=lower/lower, [1]=lower/upper,
/// [2]=upper/lower (the post-overflow "skip the upper group" case), [3]=upper/upper.
using InsertionCaseCounts = std::array<std::uint64_t, 4>;

/// Behavioral model of the grouped-sorting timer queue.
///
/// Items are kept head-first, sorted by sort_key() relative to the MSB of the
/// current head, FIFO among equal timestamps. Push is an upsert: an existing
/// id is removed and re-inserted with its new timestamp. The grouping of an
/// update is decided by the head as it was before the old copy was removed,
/// which is the head the hardware's comparator sees.
class BehavioralQueue {
 public:
  explicit BehavioralQueue(QueueConfig config);

  PushReport push(Id id, Data data);
  Element pop();
  std::optional<Element> remove(Id id);
  [[nodiscard]] std::optional<Element> peek() const noexcept;

  /// Index where `e` would be inserted, judged against the current head.
  [[nodiscard]] std::size_t insert_position(const Element& e) const noexcept;

  [[nodiscard]] std::span<const Element> items() const noexcept { return items_; }
  [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
  [[nodiscard]] bool empty() const noexcept { return items_.empty(); }
  [[nodiscard]] bool full() const noexcept { return items_.size() >= config_.capacity; }
  [[nodiscard]] bool contains(Id id) const noexcept;
  [[nodiscard]] const QueueConfig& config() const noexcept { return config_; }
  [[nodiscard]] const InsertionCaseCounts& insertion_cases() const noexcept { return cases_; }

  /// True iff the items satisfy the grouped ordering relative to their head.
  [[nodiscard]] bool is_sorted() const noexcept;

 private:
  [[nodiscard]] std::size_t position_for(Data data, bool head_msb) const noexcept;
  [[nodiscard]] std::vector<Element>::iterator find(Id id) noexcept;

  QueueConfig config_;
  std::vector<Element> items_;
  InsertionCaseCounts cases_{};
};

}  // namespace gsq
