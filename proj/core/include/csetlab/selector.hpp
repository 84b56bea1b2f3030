#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csetlab/item.hpp"

namespace csetlab {

/// The selection function of a consistent set: maps the insertion-ordered
/// contents to the index of the item a remove() returns.
///
/// A well-behaved selector obeys two pairwise consistency properties: for any
/// two items x inserted before y, across all sequences containing x before y
/// in which the selector picks one of the two, it always picks the same one.
/// validate_selector checks this exhaustively up to a length bound.
class Selector {
 public:
  using SelectFn = std::function<std::size_t(std::span<const Item>)>;

  // A default-constructed selector is a placeholder; using it throws.
  Selector() : name_("unset") {}
  Selector(std::string name, SelectFn fn);

  const std::string& name() const { return name_; }

  // Throws contract_error on an empty sequence or an out-of-range pick.
  std::size_t select_index(std::span<const Item> seq) const;
  const Item& select(std::span<const Item> seq) const;

  static Selector fifo_queue();      // picks the first item
  static Selector lifo_stack();      // picks the last item
  static Selector priority_queue();  // max payload, earlier insertion wins ties
  static Selector second_or_first(); // deliberately inconsistent, for tests

  // queue | stack | priority | second-or-first
  static std::optional<Selector> by_name(std::string_view name);
  static const std::vector<std::string>& consistent_builtin_names();

 private:
  std::string name_;
  SelectFn fn_;
};

/// A concrete witness that a selector breaks pairwise consistency: two
/// sequences, both containing the pair in the same relative order, in which
/// different members of the pair win.
struct SelectorViolation {
  Item pair_earlier;
  Item pair_later;
  std::vector<Item> first_sequence;
  Item first_winner;
  std::vector<Item> second_sequence;
  Item second_winner;
  std::string detail;
};

struct SelectorVerdict {
  bool pass = false;
  std::optional<SelectorViolation> violation;
  std::uint64_t sequences_checked = 0;
};

/// Brute-force consistency validation over all sequences of distinct items
/// drawn from `universe`, lengths 1..max_len. max_len is capped at 6 to keep
/// the enumeration exhaustive yet fast. Throws contract_error if the selector
/// is partial (throws or returns an out-of-range index) on some sequence.
SelectorVerdict validate_selector(const Selector& selector, std::span<const Item> universe,
                                  int max_len);

}  // namespace csetlab
