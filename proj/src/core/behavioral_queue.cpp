#include "gsq/behavioral_queue.hpp"

#include <algorithm>
#include <string>

#include "gsq/timer.hpp"

namespace gsq {

BehavioralQueue::BehavioralQueue(QueueConfig config) : config_(config) {
  config_.validate();
  items_.reserve(config_.capacity);
}

std::vector<Element>::iterator BehavioralQueue::find(Id id) noexcept {
  return std::find_if(items_.begin(), items_.end(), [id](const Element& e) { return e.id == id; });
}

bool BehavioralQueue::contains(Id id) const noexcept {
  return std::any_of(items_.begin(), items_.end(), [id](const Element& e) { return e.id == id; });
}

std::size_t BehavioralQueue::position_for(Data data, bool head_msb) const noexcept {
  const unsigned w = config_.data_width;
  const Data key = sort_key(data, head_msb, w);
  // First slot whose key is strictly greater: equal timestamps stay FIFO.
  auto it = std::upper_bound(items_.begin(), items_.end(), key, [&](Data k, const Element& e) {
    return k < sort_key(e.data, head_msb, w);
  });
  return static_cast<std::size_t>(it - items_.begin());
}

std::size_t BehavioralQueue::insert_position(const Element& e) const noexcept {
  if (items_.empty()) {
    return 0;
  }
  return position_for(e.data, msb(items_.front().data, config_.data_width));
}

PushReport BehavioralQueue::push(Id id, Data data) {
  if (id == kNoId || id > config_.max_id()) {
    throw ConfigError("push id " + std::to_string(id) + " outside [1, " + std::to_string(config_.max_id()) + "]");
  }
  if (data > config_.data_mask()) {
    throw ConfigError("push data " + std::to_string(data) + " wider than data_width");
  }
  const unsigned w = config_.data_width;
  const bool head_msb = !items_.empty() && msb(items_.front().data, w);

  auto existing = find(id);
  const bool was_update = existing != items_.end();
  if (!was_update && full()) {
    throw CapacityError("queue full (" + std::to_string(config_.capacity) + ") on push of new id " +
                        std::to_string(id));
  }
  if (was_update) {
    items_.erase(existing);
  }
  if (!items_.empty() || was_update) {
    ++cases_[(head_msb ? 2U : 0U) + (msb(data, w) ? 1U : 0U)];
  }
  const std::size_t pos = position_for(data, head_msb);
  items_.insert(items_.begin() + static_cast<std::ptrdiff_t>(pos), Element{id, data});
  return {was_update, pos};
}

Element BehavioralQueue::pop() {
  if (items_.empty()) {
    throw EmptyQueueError();
  }
  Element head = items_.front();
  items_.erase(items_.begin());
  return head;
}

std::optional<Element> BehavioralQueue::remove(Id id) {
  auto it = find(id);
  if (it == items_.end()) {
    return std::nullopt;
  }
  Element e = *it;
  items_.erase(it);
  return e;
}

std::optional<Element> BehavioralQueue::peek() const noexcept {
  if (items_.empty()) {
    return std::nullopt;
  }
  return items_.front();
}

bool BehavioralQueue::is_sorted() const noexcept {
  if (items_.empty()) {
    return true;
  }
  const unsigned w = config_.data_width;
  const bool head_msb = msb(items_.front().data, w);
  return std::is_sorted(items_.begin(), items_.end(), [&](const Element& a, const Element& b) {
    return sort_key(a.data, head_msb, w) < sort_key(b.data, head_msb, w);
  });
}

}  // namespace gsq
