#include "csetlab/selector.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <utility>

#include "csetlab/errors.hpp"

namespace csetlab {

std::string describe(const Item& item) {
  std::ostringstream os;
  switch (item.tag) {
    case ItemTag::Initial:
      os << "init";
      break;
    case ItemTag::Marker:
      os << "marker#" << item.marker_prefix;
      break;
    case ItemTag::Value:
      os << "value";
      break;
  }
  os << "(payload=" << item.payload << ",uid=" << item.uid << ")";
  return os.str();
}

Selector::Selector(std::string name, SelectFn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

std::size_t Selector::select_index(std::span<const Item> seq) const {
  if (!fn_) throw contract_error("placeholder selector used");
  if (seq.empty()) throw contract_error("selector applied to an empty sequence");
  std::size_t idx;
  try {
    idx = fn_(seq);
  } catch (const std::exception& e) {
    throw contract_error(std::string("selector '") + name_ + "' is partial: " + e.what());
  }
  if (idx >= seq.size()) {
    throw contract_error("selector '" + name_ + "' returned out-of-range index");
  }
  return idx;
}

const Item& Selector::select(std::span<const Item> seq) const { return seq[select_index(seq)]; }

Selector Selector::fifo_queue() {
  return Selector("queue", [](std::span<const Item>) -> std::size_t { return 0; });
}

Selector Selector::lifo_stack() {
  return Selector("stack", [](std::span<const Item> seq) { return seq.size() - 1; });
}

Selector Selector::priority_queue() {
  return Selector("priority", [](std::span<const Item> seq) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < seq.size(); ++i) {
      if (seq[i].payload > seq[best].payload) best = i;  // ties keep the earlier insertion
    }
    return best;
  });
}

Selector Selector::second_or_first() {
  return Selector("second-or-first",
                  [](std::span<const Item> seq) -> std::size_t { return seq.size() >= 2 ? 1 : 0; });
}

std::optional<Selector> Selector::by_name(std::string_view name) {
  if (name == "queue") return fifo_queue();
  if (name == "stack") return lifo_stack();
  if (name == "priority") return priority_queue();
  if (name == "second-or-first") return second_or_first();
  return std::nullopt;
}

const std::vector<std::string>& Selector::consistent_builtin_names() {
  static const std::vector<std::string> names{"queue", "stack", "priority"};
  return names;
}

namespace {

// Winner bookkeeping per ordered pair (earlier uid, later uid): which of the
// two won, plus the witness sequence.
struct PairRecord {
  bool earlier_won = false;
  std::vector<Item> witness;
};

}  // namespace

SelectorVerdict validate_selector(const Selector& selector, std::span<const Item> universe,
                                  int max_len) {
  if (max_len < 1 || max_len > 6) {
    throw contract_error("validate_selector requires 1 <= max_len <= 6");
  }
  SelectorVerdict verdict;
  std::map<std::pair<std::uint64_t, std::uint64_t>, PairRecord> records;

  std::vector<Item> seq;
  std::vector<bool> used(universe.size(), false);

  // Enumerates every sequence of distinct universe items up to max_len,
  // depth-first; checks the pairwise consistency bookkeeping at each one.
  auto visit = [&](auto&& self) -> std::optional<SelectorViolation> {
    if (!seq.empty()) {
      ++verdict.sequences_checked;
      const Item& winner = selector.select(seq);
      std::size_t widx = selector.select_index(seq);
      for (std::size_t i = 0; i < seq.size(); ++i) {
        if (i == widx) continue;
        const Item& other = seq[i];
        const Item& earlier = i < widx ? other : winner;
        const Item& later = i < widx ? winner : other;
        auto key = std::make_pair(earlier.uid, later.uid);
        bool earlier_won = earlier.uid == winner.uid;
        auto [it, inserted] = records.try_emplace(key, PairRecord{earlier_won, seq});
        if (!inserted && it->second.earlier_won != earlier_won) {
          SelectorViolation v;
          v.pair_earlier = earlier;
          v.pair_later = later;
          v.first_sequence = it->second.witness;
          v.first_winner = it->second.earlier_won ? earlier : later;
          v.second_sequence = seq;
          v.second_winner = winner;
          v.detail = "pair (" + describe(earlier) + " before " + describe(later) +
                     "): both items win in sequences preserving that order";
          return v;
        }
      }
    }
    if (seq.size() >= static_cast<std::size_t>(max_len)) return std::nullopt;
    for (std::size_t i = 0; i < universe.size(); ++i) {
      if (used[i]) continue;
      used[i] = true;
      seq.push_back(universe[i]);
      if (auto v = self(self)) return v;
      seq.pop_back();
      used[i] = false;
    }
    return std::nullopt;
  };

  verdict.violation = visit(visit);
  verdict.pass = !verdict.violation.has_value();
  return verdict;
}

}  // namespace csetlab
