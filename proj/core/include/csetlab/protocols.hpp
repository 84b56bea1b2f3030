#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "csetlab/protocol.hpp"

namespace csetlab {

/// Sibling registry for remLW: every marker has exactly one sibling carrying
/// the same value; the dominant one of the pair is the one the object's
/// selector would remove first, fixed at program construction.
class MarkerRegistry {
 public:
  struct Entry {
    std::uint64_t sibling_uid = 0;
    bool dominant = false;
    std::int64_t value = 0;
  };

  void register_pair(const Selector& selector, const Item& first_inserted,
                     const Item& second_inserted);

  bool is_marker(std::uint64_t uid) const { return entries_.contains(uid); }
  const Entry& entry(std::uint64_t uid) const;  // throws contract_error if unregistered
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::uint64_t, Entry> entries_;
};

/// Evaluates the selector on the two-element sequence (first, second) in
/// insertion order: the winner is the item a remove would pick when exactly
/// these two are present. Consistency makes this winner stable in any context
/// where one of the two is selected with the same relative order.
const Item& marker_dominance(const Selector& selector, const Item& first, const Item& second);

struct RemLWResult {
  enum class Class { Win, Lose, Null };
  Class cls = Class::Null;
  std::optional<std::int64_t> value;  // marker value; absent for Null
};

/// Drains the set until a registered marker or null emerges; non-marker items
/// are discarded. Classifies the marker Win if it is the dominant one of its
/// sibling pair, Lose otherwise. Throws contract_error on a marker with no
/// registered sibling. This is the serial form; the two-object consensus
/// program embeds the same loop as per-step actions.
std::pair<ConsistentSet, RemLWResult> remlw(const ConsistentSet& state,
                                            const MarkerRegistry& markers);

// ---------------------------------------------------------------------------
// Protocol program factories. Object and register names are prefixed with
// `ns` so programs can be nested (the tournament instantiates one block per
// tree node).
// ---------------------------------------------------------------------------

/// Two-process consensus from one consistent set (any initial contents) plus
/// two single-writer registers. Process 1 inserts a fresh marker W before
/// publishing its value; both processes fall back to draining the set.
ProtocolProgram consensus2_registers(std::int64_t v0, std::int64_t v1, ConsistentSet initial,
                                     UidAllocator& uids, const std::string& ns = "");

/// Negative control: identical to consensus2_registers except process 1
/// publishes its value before inserting W. The checker must refute it.
ProtocolProgram consensus2_registers_broken(std::int64_t v0, std::int64_t v1,
                                            ConsistentSet initial, UidAllocator& uids,
                                            const std::string& ns = "");

/// Two-process consensus from two consistent sets and no registers. Process i
/// inserts a sibling marker pair into object i, then classifies the other
/// object's drain result before its own.
ProtocolProgram consensus2_two_objects(std::int64_t v0, std::int64_t v1, ConsistentSet o0,
                                       ConsistentSet o1, UidAllocator& uids,
                                       const std::string& ns = "");

/// Throws config_error unless exactly one current item carries `payload`;
/// returns that item's uid. Used to designate the lucky item W.
std::uint64_t find_unique_payload(const ConsistentSet& state, std::int64_t payload);

/// n-process test-and-set from a single consistent set in a lucky state
/// (exactly one copy of the designated item W). Each process drains until W
/// (decide 1) or null (decide 0).
ProtocolProgram tas_lucky(int n, ConsistentSet lucky, std::uint64_t w_uid,
                          const std::string& ns = "");

/// Two-process consensus from a single lucky queue and nothing else. Each
/// process enqueues its own value item, then dequeues until W (decide own
/// value) or null (decide the other input, recovered from the last two
/// dequeued items). Queue selector only: throws config_error otherwise.
ProtocolProgram consensus2_queue_lucky(std::int64_t v0, std::int64_t v1, ConsistentSet lucky,
                                       std::uint64_t w_uid, UidAllocator& uids,
                                       const std::string& ns = "");

enum class TournamentBuilder { TwoObjects, SetPlusRegisters };

/// Bounded-n test-and-set: a binary tournament of two-process blocks (each a
/// consensus program wrapped to win iff it decides its own role) plus a
/// doorway register that late arrivals read to concede, which keeps the
/// winner linearizable as the first caller. Blocks play over empty objects
/// with the given selector. Declares an isolation bound.
ProtocolProgram tournament_tas(int n, TournamentBuilder builder, const Selector& block_selector,
                               UidAllocator& uids, int max_n = 16);

}  // namespace csetlab
