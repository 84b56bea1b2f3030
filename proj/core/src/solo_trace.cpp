#include "csetlab/solo_trace.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "csetlab/errors.hpp"

namespace csetlab {

bool SoloTrace::has_remove() const {
  return std::any_of(steps.begin(), steps.end(),
                     [](const SoloOp& op) { return std::holds_alternative<SoloRemove>(op); });
}

TraceBuilder::TraceBuilder(Selector selector)
    : trace_{selector, {}}, state_(std::move(selector)) {}

TraceBuilder& TraceBuilder::insert(const Item& item) {
  state_ = state_.insert(item);
  trace_.steps.push_back(SoloInsert{item});
  return *this;
}

TraceBuilder& TraceBuilder::remove() {
  auto [next, removed] = state_.remove();
  state_ = std::move(next);
  trace_.steps.push_back(SoloRemove{removed});
  return *this;
}

bool replays_clean(const SoloTrace& trace, std::string* why) {
  ConsistentSet state(trace.selector);
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const SoloOp& op = trace.steps[i];
    if (const auto* ins = std::get_if<SoloInsert>(&op)) {
      if (state.contains_uid(ins->item.uid)) {
        if (why) *why = "step " + std::to_string(i) + " re-inserts a contained uid";
        return false;
      }
      state = state.insert(ins->item);
    } else {
      const auto& rem = std::get<SoloRemove>(op);
      auto [next, removed] = state.remove();
      const bool match = (!removed && !rem.response) ||
                         (removed && rem.response && removed->uid == rem.response->uid);
      if (!match) {
        if (why) {
          *why = "step " + std::to_string(i) + " removes " +
                 (removed ? describe(*removed) : "null") + " but the trace records " +
                 (rem.response ? describe(*rem.response) : "null");
        }
        return false;
      }
      state = std::move(next);
    }
  }
  return true;
}

ConsistentSet replay_prefix(const SoloTrace& trace, std::size_t len) {
  if (len > trace.steps.size()) throw contract_error("prefix length exceeds trace length");
  ConsistentSet state(trace.selector);
  for (std::size_t i = 0; i < len; ++i) {
    if (const auto* ins = std::get_if<SoloInsert>(&trace.steps[i])) {
      state = state.insert(ins->item);
    } else {
      state = state.remove().first;
    }
  }
  return state;
}

bool is_mute_prefix(const SoloTrace& trace, std::size_t len) {
  return replay_prefix(trace, len).empty();
}

std::optional<Item> removal_candidate_after(const SoloTrace& trace, std::size_t len) {
  return replay_prefix(trace, len).remove().second;
}

std::optional<Item> drain_last(const SoloTrace& trace) {
  // Items both inserted and removed during the trace, in insertion order.
  std::vector<Item> inserted_and_removed;
  std::map<std::uint64_t, bool> removed;
  for (const SoloOp& op : trace.steps) {
    if (const auto* rem = std::get_if<SoloRemove>(&op); rem && rem->response) {
      removed[rem->response->uid] = true;
    }
  }
  for (const SoloOp& op : trace.steps) {
    if (const auto* ins = std::get_if<SoloInsert>(&op)) {
      if (removed.contains(ins->item.uid)) inserted_and_removed.push_back(ins->item);
    }
  }
  if (inserted_and_removed.empty()) return std::nullopt;

  ConsistentSet state(trace.selector);
  for (const Item& it : inserted_and_removed) state = state.insert(it);
  std::optional<Item> last;
  while (!state.empty()) {
    auto [next, got] = state.remove();
    state = std::move(next);
    last = got;
  }
  return last;
}

BarrierAnalysis find_barriers(const SoloTrace& trace, const SoloTrace& other) {
  BarrierAnalysis analysis;
  analysis.other_drain_last = drain_last(other);
  analysis.candidate_at.resize(trace.steps.size() + 1);
  for (std::size_t len = 0; len <= trace.steps.size(); ++len) {
    analysis.candidate_at[len] = removal_candidate_after(trace, len);
  }
  if (!analysis.other_drain_last) return analysis;  // vacuously barrier-free
  for (std::size_t len = 1; len <= trace.steps.size(); ++len) {
    const auto& candidate = analysis.candidate_at[len];
    if (!candidate) continue;
    const Item pair[2] = {*candidate, *analysis.other_drain_last};
    if (trace.selector.select_index({pair, 2}) == 1) analysis.barriers.push_back(len);
  }
  return analysis;
}

namespace {

std::map<std::uint64_t, std::size_t> insertion_index(const SoloTrace& trace) {
  std::map<std::uint64_t, std::size_t> at;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (const auto* ins = std::get_if<SoloInsert>(&trace.steps[i])) at[ins->item.uid] = i;
  }
  return at;
}

}  // namespace

TrimResult trim(const SoloTrace& trace, std::size_t boundary) {
  if (boundary > trace.steps.size()) throw contract_error("trim boundary exceeds trace length");
  const auto inserted_at = insertion_index(trace);
  TrimResult result;
  result.trace.selector = trace.selector;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const SoloOp& op = trace.steps[i];
    if (const auto* rem = std::get_if<SoloRemove>(&op); rem && rem->response) {
      auto it = inserted_at.find(rem->response->uid);
      if (it != inserted_at.end() && it->second < boundary) {
        result.registry.push_back(TrimmedRemove{i, *rem->response});
        continue;
      }
    }
    result.trace.steps.push_back(op);
  }
  return result;
}

TrimResult trim_after_prefix(const SoloTrace& trace, std::size_t boundary) {
  if (boundary > trace.steps.size()) throw contract_error("trim boundary exceeds trace length");
  const auto inserted_at = insertion_index(trace);
  TrimResult result;
  result.trace.selector = trace.selector;
  for (std::size_t i = boundary; i < trace.steps.size(); ++i) {
    const SoloOp& op = trace.steps[i];
    if (const auto* rem = std::get_if<SoloRemove>(&op); rem && rem->response) {
      auto it = inserted_at.find(rem->response->uid);
      if (it != inserted_at.end() && it->second < boundary) {
        result.registry.push_back(TrimmedRemove{i, *rem->response});
        continue;
      }
    }
    result.trace.steps.push_back(op);
  }
  return result;
}

InvarianceVerdict removal_invariance_check(const SoloTrace& trace, const Item& s) {
  std::optional<std::size_t> insert_index;
  std::optional<std::size_t> remove_index;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (const auto* ins = std::get_if<SoloInsert>(&trace.steps[i])) {
      if (ins->item.uid == s.uid) insert_index = i;
    } else if (const auto& rem = std::get<SoloRemove>(trace.steps[i]);
               rem.response && rem.response->uid == s.uid) {
      remove_index = i;
    }
  }
  if (!insert_index || !remove_index) {
    throw contract_error("removal invariance requires an item inserted and later removed");
  }

  // E' = the execution with insert(s) and the remove returning s deleted;
  // replay both and compare every other remove's response.
  SoloTrace reduced;
  reduced.selector = trace.selector;
  std::vector<std::size_t> reduced_to_original;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    if (i == *insert_index || i == *remove_index) continue;
    reduced.steps.push_back(trace.steps[i]);
    reduced_to_original.push_back(i);
  }

  ConsistentSet state(reduced.selector);
  for (std::size_t i = 0; i < reduced.steps.size(); ++i) {
    const SoloOp& op = reduced.steps[i];
    if (const auto* ins = std::get_if<SoloInsert>(&op)) {
      state = state.insert(ins->item);
      continue;
    }
    const auto& rem = std::get<SoloRemove>(op);
    auto [next, removed] = state.remove();
    state = std::move(next);
    const bool match = (!removed && !rem.response) ||
                       (removed && rem.response && removed->uid == rem.response->uid);
    if (!match) {
      std::ostringstream os;
      os << "remove at original step " << reduced_to_original[i] << " returned "
         << (removed ? describe(*removed) : "null") << " instead of "
         << (rem.response ? describe(*rem.response) : "null") << " once " << describe(s)
         << " was deleted";
      return InvarianceVerdict{false, os.str()};
    }
  }
  return InvarianceVerdict{true, ""};
}

SoloTrace random_trace(const Selector& selector, UidAllocator& uids, std::mt19937_64& rng,
                       const TraceGenConfig& config) {
  std::uniform_int_distribution<int> len_dist(0, config.max_len);
  std::uniform_int_distribution<std::int64_t> payload_dist(0, config.payload_range - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  const int len = len_dist(rng);
  TraceBuilder builder(selector);
  std::size_t contained = 0;
  for (int i = 0; i < len; ++i) {
    bool do_insert = coin(rng) < config.insert_bias;
    if (config.forbid_mute_prefix && contained <= 1) {
      // Keep the set nonempty after every prefix: the first op must insert
      // and no remove may empty the set.
      do_insert = true;
    }
    if (do_insert) {
      builder.insert(value_item(payload_dist(rng), 0, uids));
      ++contained;
    } else {
      builder.remove();
      if (contained > 0) --contained;
    }
  }
  return builder.take();
}

}  // namespace csetlab
