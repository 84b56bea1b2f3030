#pragma once

#include <initializer_list>
#include <vector>

#include "csetlab/consistent_set.hpp"
#include "csetlab/solo_trace.hpp"

namespace csetlab::test {

inline std::vector<Item> initial_items(std::initializer_list<std::int64_t> payloads,
                                       UidAllocator& uids) {
  std::vector<Item> items;
  for (std::int64_t p : payloads) items.push_back(initial_item(p, uids));
  return items;
}

inline ConsistentSet make_set(const Selector& selector,
                              std::initializer_list<std::int64_t> payloads, UidAllocator& uids) {
  return ConsistentSet(selector, initial_items(payloads, uids));
}

// Uid of the item a remove on `state` would return, 0 for null.
inline std::uint64_t removed_uid(const ConsistentSet& state) {
  auto [next, item] = state.remove();
  (void)next;
  return item ? item->uid : 0;
}

}  // namespace csetlab::test
