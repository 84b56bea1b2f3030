#include "csetlab/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include "csetlab/errors.hpp"
#include "csetlab/executor.hpp"

namespace csetlab {

namespace {

const RemovedResponse& as_removed(const Response& r) {
  if (const auto* rr = std::get_if<RemovedResponse>(&r)) return *rr;
  throw contract_error("protocol expected a remove response, got: " + describe(r));
}

const ReadResponse& as_read(const Response& r) {
  if (const auto* rr = std::get_if<ReadResponse>(&r)) return *rr;
  throw contract_error("protocol expected a read response, got: " + describe(r));
}

StepOutcome act(Action action, LocalState next) { return {std::move(action), std::move(next)}; }

LocalState at_phase(LocalState local, std::int32_t phase) {
  local.phase = phase;
  return local;
}

}  // namespace

void MarkerRegistry::register_pair(const Selector& selector, const Item& first_inserted,
                                   const Item& second_inserted) {
  const Item& dom = marker_dominance(selector, first_inserted, second_inserted);
  entries_[first_inserted.uid] =
      Entry{second_inserted.uid, dom.uid == first_inserted.uid, first_inserted.payload};
  entries_[second_inserted.uid] =
      Entry{first_inserted.uid, dom.uid == second_inserted.uid, second_inserted.payload};
}

const MarkerRegistry::Entry& MarkerRegistry::entry(std::uint64_t uid) const {
  auto it = entries_.find(uid);
  if (it == entries_.end()) {
    throw contract_error("marker without a registered sibling, uid=" + std::to_string(uid));
  }
  return it->second;
}

const Item& marker_dominance(const Selector& selector, const Item& first, const Item& second) {
  if (first.uid == second.uid) throw contract_error("marker_dominance on identical items");
  const Item pair[2] = {first, second};
  return selector.select_index({pair, 2}) == 0 ? first : second;
}

std::pair<ConsistentSet, RemLWResult> remlw(const ConsistentSet& state,
                                            const MarkerRegistry& markers) {
  ConsistentSet current = state;
  for (;;) {
    auto [next, removed] = current.remove();
    if (!removed) return {std::move(next), RemLWResult{RemLWResult::Class::Null, std::nullopt}};
    if (removed->tag == ItemTag::Marker || markers.is_marker(removed->uid)) {
      const auto& entry = markers.entry(removed->uid);  // contract: sibling registered
      // The winner of a pair is whichever marker leaves the object first.
      const bool lost = next.marker_sibling_consumed(*removed);
      return {std::move(next),
              RemLWResult{lost ? RemLWResult::Class::Lose : RemLWResult::Class::Win,
                          entry.value}};
    }
    current = std::move(next);
  }
}

// ---------------------------------------------------------------------------
// Single set + two registers.
// ---------------------------------------------------------------------------

namespace {

ProtocolProgram make_consensus2_registers(std::int64_t v0, std::int64_t v1, ConsistentSet initial,
                                          UidAllocator& uids, const std::string& ns,
                                          bool broken_write_first) {
  const std::string obj = ns + "O";
  const std::string prop0 = ns + "Proposed0";
  const std::string prop1 = ns + "Proposed1";
  const Item w = marker_item(/*prefix=*/1, v1, /*inserter=*/1, uids);
  const std::uint64_t w_uid = w.uid;

  // Phases, process 0: 0 write own, 1 read other, 2 branch, 3 drain loop,
  // 4 fallback read. Process 1: 0/1 insert W and publish (order depends on
  // the broken flag), 2 read other, 3 branch, 4 drain loop, 5 fallback read.
  auto step = [=](int pid, const LocalState& local, const Response& resp) -> StepOutcome {
    if (pid == 0) {
      switch (local.phase) {
        case 0:
          return act(WriteAction{prop0, v0}, at_phase(local, 1));
        case 1:
          return act(ReadAction{prop1}, at_phase(local, 2));
        case 2: {
          const auto& read = as_read(resp);
          if (!read.value) return act(DecideAction{v0}, at_phase(local, 9));
          return act(RemoveAction{obj}, at_phase(local, 3));
        }
        case 3: {
          const auto& rem = as_removed(resp);
          if (rem.item && rem.item->uid == w_uid) return act(DecideAction{v0}, at_phase(local, 9));
          if (!rem.item) return act(ReadAction{prop1}, at_phase(local, 4));
          return act(RemoveAction{obj}, at_phase(local, 3));
        }
        case 4: {
          const auto& read = as_read(resp);
          if (!read.value) throw contract_error("consensus fallback read returned unset register");
          return act(DecideAction{*read.value}, at_phase(local, 9));
        }
        default:
          throw contract_error("process 0 stepped past its final phase");
      }
    }
    switch (local.phase) {
      case 0:
        if (broken_write_first) return act(WriteAction{prop1, v1}, at_phase(local, 1));
        return act(InsertAction{obj, w}, at_phase(local, 1));
      case 1:
        if (broken_write_first) return act(InsertAction{obj, w}, at_phase(local, 2));
        return act(WriteAction{prop1, v1}, at_phase(local, 2));
      case 2:
        return act(ReadAction{prop0}, at_phase(local, 3));
      case 3: {
        const auto& read = as_read(resp);
        if (read.value) return act(DecideAction{*read.value}, at_phase(local, 9));
        return act(RemoveAction{obj}, at_phase(local, 4));
      }
      case 4: {
        const auto& rem = as_removed(resp);
        if (rem.item && rem.item->uid == w_uid) return act(DecideAction{v1}, at_phase(local, 9));
        if (!rem.item) return act(ReadAction{prop0}, at_phase(local, 5));
        return act(RemoveAction{obj}, at_phase(local, 4));
      }
      case 5: {
        const auto& read = as_read(resp);
        if (!read.value) throw contract_error("consensus fallback read returned unset register");
        return act(DecideAction{*read.value}, at_phase(local, 9));
      }
      default:
        throw contract_error("process 1 stepped past its final phase");
    }
  };

  std::map<std::string, ConsistentSet> objects;
  objects.emplace(obj, std::move(initial));
  return ProtocolProgram(broken_write_first ? "consensus2-registers-broken"
                                            : "consensus2-registers",
                         ProtocolProgram::Kind::Consensus, 2, std::move(objects), RegisterBank{},
                         {v0, v1}, step);
}

}  // namespace

ProtocolProgram consensus2_registers(std::int64_t v0, std::int64_t v1, ConsistentSet initial,
                                     UidAllocator& uids, const std::string& ns) {
  return make_consensus2_registers(v0, v1, std::move(initial), uids, ns, false);
}

ProtocolProgram consensus2_registers_broken(std::int64_t v0, std::int64_t v1,
                                            ConsistentSet initial, UidAllocator& uids,
                                            const std::string& ns) {
  return make_consensus2_registers(v0, v1, std::move(initial), uids, ns, true);
}

// ---------------------------------------------------------------------------
// Two sets, no registers.
// ---------------------------------------------------------------------------

ProtocolProgram consensus2_two_objects(std::int64_t v0, std::int64_t v1, ConsistentSet o0,
                                       ConsistentSet o1, UidAllocator& uids,
                                       const std::string& ns) {
  const std::string names[2] = {ns + "O0", ns + "O1"};

  // Process i inserts its sibling pair into object i; prefixes are fresh by
  // tag, uids by allocation.
  const Item pair0_first = marker_item(0, v0, 0, uids);
  const Item pair0_second = marker_item(1, v0, 0, uids);
  const Item pair1_first = marker_item(2, v1, 1, uids);
  const Item pair1_second = marker_item(3, v1, 1, uids);

  auto registry = std::make_shared<MarkerRegistry>();
  registry->register_pair(o0.selector(), pair0_first, pair0_second);
  registry->register_pair(o1.selector(), pair1_first, pair1_second);

  const std::int64_t inputs[2] = {v0, v1};
  const Item firsts[2] = {pair0_first, pair1_first};
  const Item seconds[2] = {pair0_second, pair1_second};

  // Scan result classes: 0 null, 1 win, 2 lose. ints grows to
  // [class_other, value_other, class_own, value_own].
  static constexpr std::int64_t kNull = 0, kWin = 1, kLose = 2;

  auto classify = [registry](const RemovedResponse& rem,
                             LocalState& local) -> bool {  // true when scan finished
    if (!rem.item) {
      local.ints.push_back(kNull);
      local.ints.push_back(0);
      return true;
    }
    if (rem.item->tag == ItemTag::Marker || registry->is_marker(rem.item->uid)) {
      const auto& entry = registry->entry(rem.item->uid);  // contract: sibling registered
      local.ints.push_back(rem.marker_sibling_consumed ? kLose : kWin);
      local.ints.push_back(entry.value);
      return true;
    }
    return false;
  };

  auto step = [=](int pid, const LocalState& local, const Response& resp) -> StepOutcome {
    const std::string& own = names[pid];
    const std::string& other = names[1 - pid];
    switch (local.phase) {
      case 0:
        return act(InsertAction{own, firsts[pid]}, at_phase(local, 1));
      case 1:
        return act(InsertAction{own, seconds[pid]}, at_phase(local, 2));
      case 2:  // start scanning the other process's object
        return act(RemoveAction{other}, at_phase(local, 3));
      case 3: {
        LocalState next = local;
        if (classify(as_removed(resp), next)) return act(RemoveAction{own}, at_phase(next, 4));
        return act(RemoveAction{other}, at_phase(next, 3));
      }
      case 4: {
        LocalState next = local;
        if (!classify(as_removed(resp), next)) return act(RemoveAction{own}, at_phase(next, 4));
        const std::int64_t other_class = next.ints[0];
        const std::int64_t own_class = next.ints[2];
        bool decide_v0;
        if (pid == 0) {
          decide_v0 = own_class == kWin && other_class == kNull;
        } else {
          decide_v0 = other_class == kLose && own_class == kWin;
        }
        return act(DecideAction{decide_v0 ? inputs[0] : inputs[1]}, at_phase(next, 9));
      }
      default:
        throw contract_error("two-object consensus stepped past its final phase");
    }
  };

  std::map<std::string, ConsistentSet> objects;
  objects.emplace(names[0], std::move(o0));
  objects.emplace(names[1], std::move(o1));
  return ProtocolProgram("consensus2-two-objects", ProtocolProgram::Kind::Consensus, 2,
                         std::move(objects), RegisterBank{}, {v0, v1}, step);
}

// ---------------------------------------------------------------------------
// Lucky-state protocols.
// ---------------------------------------------------------------------------

std::uint64_t find_unique_payload(const ConsistentSet& state, std::int64_t payload) {
  std::optional<std::uint64_t> found;
  for (const Item& it : state.contents()) {
    if (it.payload != payload) continue;
    if (found) {
      throw config_error("lucky state needs a single copy of the designated item, found several");
    }
    found = it.uid;
  }
  if (!found) throw config_error("no item with the designated lucky payload");
  return *found;
}

ProtocolProgram tas_lucky(int n, ConsistentSet lucky, std::uint64_t w_uid, const std::string& ns) {
  if (n < 1) throw config_error("tas_lucky needs at least one process");
  if (!lucky.contains_uid(w_uid)) {
    throw config_error("lucky state does not contain the designated item");
  }
  const std::string obj = ns + "O";

  auto step = [=](int, const LocalState& local, const Response& resp) -> StepOutcome {
    switch (local.phase) {
      case 0:
        return act(RemoveAction{obj}, at_phase(local, 1));
      case 1: {
        const auto& rem = as_removed(resp);
        if (rem.item && rem.item->uid == w_uid) return act(DecideAction{1}, at_phase(local, 9));
        if (!rem.item) return act(DecideAction{0}, at_phase(local, 9));
        return act(RemoveAction{obj}, at_phase(local, 1));
      }
      default:
        throw contract_error("tas_lucky stepped past its final phase");
    }
  };

  // A solo run drains until it hits W: at most |contents| removes plus the
  // deciding step.
  const auto isolation_bound = static_cast<std::int64_t>(lucky.size()) + 1;

  std::map<std::string, ConsistentSet> objects;
  objects.emplace(obj, std::move(lucky));
  return ProtocolProgram("tas-lucky", ProtocolProgram::Kind::TestAndSet, n, std::move(objects),
                         RegisterBank{}, {}, step, isolation_bound);
}

ProtocolProgram consensus2_queue_lucky(std::int64_t v0, std::int64_t v1, ConsistentSet lucky,
                                       std::uint64_t w_uid, UidAllocator& uids,
                                       const std::string& ns) {
  if (lucky.selector().name() != "queue") {
    throw config_error("the lucky-queue consensus protocol requires the queue selector");
  }
  if (!lucky.contains_uid(w_uid)) {
    throw config_error("lucky state does not contain the designated item");
  }
  const std::string obj = ns + "O";
  const Item own_items[2] = {value_item(v0, 0, uids), value_item(v1, 1, uids)};
  const std::int64_t inputs[2] = {v0, v1};

  auto step = [=](int pid, const LocalState& local, const Response& resp) -> StepOutcome {
    switch (local.phase) {
      case 0:
        return act(InsertAction{obj, own_items[pid]}, at_phase(local, 1));
      case 1:
        return act(RemoveAction{obj}, at_phase(local, 2));
      case 2: {
        const auto& rem = as_removed(resp);
        if (rem.item && rem.item->uid == w_uid) {
          return act(DecideAction{inputs[pid]}, at_phase(local, 9));
        }
        if (!rem.item) {
          // The two most recent dequeues must be the two input items; decide
          // the one that is not ours.
          if (local.items.size() < 2) {
            throw contract_error("drained to null with fewer than two dequeued items");
          }
          const Item& a = local.items[local.items.size() - 2];
          const Item& b = local.items[local.items.size() - 1];
          if (a.tag != ItemTag::Value || b.tag != ItemTag::Value) {
            throw contract_error("last two dequeued items are not both input values");
          }
          const bool a_mine = a.uid == own_items[pid].uid;
          const bool b_mine = b.uid == own_items[pid].uid;
          if (a_mine == b_mine) {
            throw contract_error("last two dequeued items do not split into own and other input");
          }
          return act(DecideAction{a_mine ? b.payload : a.payload}, at_phase(local, 9));
        }
        LocalState next = local;
        next.items.push_back(*rem.item);
        if (next.items.size() > 2) next.items.erase(next.items.begin());
        return act(RemoveAction{obj}, at_phase(next, 2));
      }
      default:
        throw contract_error("lucky-queue consensus stepped past its final phase");
    }
  };

  std::map<std::string, ConsistentSet> objects;
  objects.emplace(obj, std::move(lucky));
  return ProtocolProgram("consensus2-queue-lucky", ProtocolProgram::Kind::Consensus, 2,
                         std::move(objects), RegisterBank{}, {v0, v1}, step);
}

// ---------------------------------------------------------------------------
// Bounded tournament test-and-set.
// ---------------------------------------------------------------------------

namespace {

struct TournamentLayout {
  int levels = 0;
  int group(int pid, int level) const { return pid >> (level + 1); }
  int role(int pid, int level) const { return (pid >> level) & 1; }
};

// Block-local state rides inside the composite local: ints[0] holds the
// level, ints[1] the block phase, the rest are the block's own ints; items
// pass through unchanged.
LocalState unpack_block(const LocalState& local) {
  LocalState block;
  block.phase = static_cast<std::int32_t>(local.ints.at(1));
  block.ints.assign(local.ints.begin() + 2, local.ints.end());
  block.items = local.items;
  return block;
}

LocalState pack_block(std::int32_t composite_phase, std::int64_t level, const LocalState& block) {
  LocalState local;
  local.phase = composite_phase;
  local.ints.reserve(block.ints.size() + 2);
  local.ints.push_back(level);
  local.ints.push_back(block.phase);
  local.ints.insert(local.ints.end(), block.ints.begin(), block.ints.end());
  local.items = block.items;
  return local;
}

}  // namespace

ProtocolProgram tournament_tas(int n, TournamentBuilder builder, const Selector& block_selector,
                               UidAllocator& uids, int max_n) {
  if (n < 2) throw config_error("tournament test-and-set needs at least two processes");
  if (n > max_n) throw config_error("tournament process count exceeds the configured bound");

  TournamentLayout layout;
  while ((1 << layout.levels) < n) ++layout.levels;

  const std::string done_reg = "Done";

  auto blocks = std::make_shared<std::map<std::pair<int, int>, ProtocolProgram>>();
  std::map<std::string, ConsistentSet> objects;
  for (int level = 0; level < layout.levels; ++level) {
    const int groups = ((n - 1) >> (level + 1)) + 1;
    for (int g = 0; g < groups; ++g) {
      std::ostringstream ns;
      ns << "b" << level << "_" << g << ".";
      ProtocolProgram block =
          builder == TournamentBuilder::TwoObjects
              ? consensus2_two_objects(0, 1, ConsistentSet(block_selector),
                                       ConsistentSet(block_selector), uids, ns.str())
              : consensus2_registers(0, 1, ConsistentSet(block_selector), uids, ns.str());
      for (const auto& [name, obj] : block.initial_objects()) objects.emplace(name, obj);
      blocks->emplace(std::make_pair(level, g), std::move(block));
    }
  }

  // Solo cost of the costlier block role determines the declared isolation
  // bound: doorway read + levels * block cost + doorway write + decide.
  int block_solo_cost = 0;
  for (const auto& [key, block] : *blocks) {
    if (key != std::make_pair(0, 0)) continue;
    for (int role = 0; role < 2; ++role) {
      SoloExecution solo = solo_execution(block, role, 64);
      if (!solo.decided) throw config_error("tournament block does not decide when run alone");
      block_solo_cost =
          std::max(block_solo_cost, static_cast<int>(solo.steps.size()) - 1);
    }
  }
  const std::int64_t isolation_bound = 1 + std::int64_t{1} * layout.levels * block_solo_cost + 2;

  auto step = [=](int pid, const LocalState& local, const Response& resp) -> StepOutcome {
    switch (local.phase) {
      case 0:
        return act(ReadAction{done_reg}, at_phase(local, 1));
      case 1: {
        const auto& read = as_read(resp);
        if (read.value) return act(DecideAction{0}, at_phase(local, 9));
        const ProtocolProgram& block = blocks->at({0, layout.group(pid, 0)});
        StepOutcome out = block.step(layout.role(pid, 0), LocalState{}, NoResponse{});
        return act(out.action, pack_block(2, 0, out.next));
      }
      case 2: {
        std::int64_t level = local.ints.at(0);
        LocalState block_local = unpack_block(local);
        Response block_resp = resp;
        for (;;) {
          const ProtocolProgram& block =
              blocks->at({static_cast<int>(level), layout.group(pid, static_cast<int>(level))});
          StepOutcome out =
              block.step(layout.role(pid, static_cast<int>(level)), block_local, block_resp);
          if (const auto* decide = std::get_if<DecideAction>(&out.action)) {
            const bool won = decide->value == layout.role(pid, static_cast<int>(level));
            if (!won) return act(WriteAction{done_reg, 1}, at_phase(LocalState{}, 3));
            if (level + 1 >= layout.levels) {
              return act(WriteAction{done_reg, 1}, at_phase(LocalState{}, 4));
            }
            ++level;
            block_local = LocalState{};
            block_resp = NoResponse{};
            continue;
          }
          return act(out.action, pack_block(2, level, out.next));
        }
      }
      case 3:
        return act(DecideAction{0}, at_phase(local, 9));
      case 4:
        return act(DecideAction{1}, at_phase(local, 9));
      default:
        throw contract_error("tournament stepped past its final phase");
    }
  };

  return ProtocolProgram("tournament-tas", ProtocolProgram::Kind::TestAndSet, n,
                         std::move(objects), RegisterBank{}, {}, step, isolation_bound);
}

}  // namespace csetlab
