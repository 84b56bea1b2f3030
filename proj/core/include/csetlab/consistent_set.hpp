#pragma once

#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "csetlab/item.hpp"
#include "csetlab/selector.hpp"

namespace csetlab {

/// A simulated linearizable insert/remove container whose remove() is
/// governed by a selection function. Immutable value: operations return new
/// states, which keeps branching and replay cheap in the model checker.
///
/// Besides the abstract contents the simulation keeps the items it has
/// removed. Protocol-level marker classification is a statement about
/// removal order ("was the sibling taken out before me?"), so the object is
/// the one place that can answer it.
class ConsistentSet {
 public:
  ConsistentSet(Selector selector, std::vector<Item> initial = {});

  /// Appends the item. Throws contract_error if an item with the same uid is
  /// currently contained.
  ConsistentSet insert(const Item& item) const;

  /// Removes and returns the selected item, or nullopt on an empty set (null
  /// is a value here, not an error).
  std::pair<ConsistentSet, std::optional<Item>> remove() const;

  std::span<const Item> contents() const { return {contents_.data(), contents_.size()}; }
  bool empty() const { return contents_.empty(); }
  std::size_t size() const { return contents_.size(); }
  const Selector& selector() const { return *selector_; }

  bool contains_uid(std::uint64_t uid) const;

  /// True iff the sibling of `marker` (another Marker item with the same
  /// inserter and value) has already been removed from this object. False
  /// when the sibling is still contained or was never inserted.
  bool marker_sibling_consumed(const Item& marker) const;

  std::span<const Item> removed_items() const {
    return {removed_items_.data(), removed_items_.size()};
  }

 private:
  std::shared_ptr<const Selector> selector_;
  std::vector<Item> contents_;
  std::vector<Item> removed_items_;
};

}  // namespace csetlab
