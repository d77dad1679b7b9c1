#pragma once

#include <cstddef>
#include <vector>

#include "gsq/timer.hpp"

namespace gsq::testing {

// Insertion point read straight off the four rows of the enqueue rule table:
// find the region of the incoming element's group, then the first strictly
// larger value inside it. No key rotation involved.
inline std::size_t table_rule_position(const std::vector<Data>& items, Data e, unsigned w) {
  if (items.empty()) return 0;
  const bool head_low = !msb(items[0], w);  // head priority above the boundary
  const bool e_low = !msb(e, w);
  auto in_group = [&](Data d, bool low) { return msb(d, w) != low; };
  std::size_t i = 0;
  const std::size_t n = items.size();
  if (head_low == e_low) {
    // Incoming element belongs to the head-side group: sorted walk from the head.
    while (i < n && in_group(items[i], e_low) && items[i] <= e) ++i;
  } else {
    // Skip every element of the head-side group, then sorted walk.
    while (i < n && in_group(items[i], head_low)) ++i;
    while (i < n && in_group(items[i], e_low) && items[i] <= e) ++i;
  }
  return i;
}

// Every legal queue layout of up to max_len values at width w: contents are
// any multiset, arranged head-first as the grouped order for whichever head
// group is consistent with the arrangement.
template <typename F>
void for_each_layout(unsigned w, std::size_t max_len, F&& f) {
  const Data range = Data{1} << w;
  std::vector<Data> keys;
  auto rec = [&](auto&& self, Data from) -> void {
    for (int rot = 0; rot < 2; ++rot) {
      const bool head_msb = rot == 1;
      std::vector<Data> items;
      for (auto k : keys) items.push_back(head_msb ? (k + (range >> 1)) & (range - 1) : k);
      if (!items.empty() && msb(items[0], w) != head_msb) continue;
      if (items.empty() && head_msb) continue;
      f(items);
    }
    if (keys.size() == max_len) return;
    for (Data k = from; k < range; ++k) {
      keys.push_back(k);
      self(self, k);
      keys.pop_back();
    }
  };
  rec(rec, 0);
}

}  // namespace gsq::testing
