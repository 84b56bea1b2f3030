#include "csetlab/consistent_set.hpp"

#include <algorithm>

#include "csetlab/errors.hpp"

namespace csetlab {

ConsistentSet::ConsistentSet(Selector selector, std::vector<Item> initial)
    : selector_(std::make_shared<const Selector>(std::move(selector))),
      contents_(std::move(initial)) {
  for (std::size_t i = 0; i < contents_.size(); ++i) {
    for (std::size_t j = i + 1; j < contents_.size(); ++j) {
      if (contents_[i].uid == contents_[j].uid) {
        throw contract_error("duplicate uid in initial contents: " + describe(contents_[i]));
      }
    }
  }
}

bool ConsistentSet::contains_uid(std::uint64_t uid) const {
  return std::any_of(contents_.begin(), contents_.end(),
                     [uid](const Item& it) { return it.uid == uid; });
}

ConsistentSet ConsistentSet::insert(const Item& item) const {
  if (contains_uid(item.uid)) {
    throw contract_error("insert of an already-contained uid: " + describe(item));
  }
  ConsistentSet next = *this;
  next.contents_.push_back(item);
  return next;
}

std::pair<ConsistentSet, std::optional<Item>> ConsistentSet::remove() const {
  if (contents_.empty()) return {*this, std::nullopt};
  std::size_t idx = selector_->select_index(contents());
  ConsistentSet next = *this;
  Item removed = next.contents_[idx];
  next.contents_.erase(next.contents_.begin() + static_cast<std::ptrdiff_t>(idx));
  next.removed_items_.push_back(removed);
  return {std::move(next), removed};
}

bool ConsistentSet::marker_sibling_consumed(const Item& marker) const {
  return std::any_of(removed_items_.begin(), removed_items_.end(), [&marker](const Item& it) {
    return it.uid != marker.uid && it.tag == ItemTag::Marker &&
           it.inserter == marker.inserter && it.payload == marker.payload;
  });
}

}  // namespace csetlab
