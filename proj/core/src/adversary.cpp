#include "csetlab/adversary.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

#include "csetlab/errors.hpp"

namespace csetlab {

std::string interleave_case_name(InterleaveCase c) {
  switch (c) {
    case InterleaveCase::Base:
      return "base";
    case InterleaveCase::RemovalFree:
      return "removal-free";
    case InterleaveCase::Mute:
      return "mute";
    case InterleaveCase::Barrier:
      return "barrier";
    case InterleaveCase::PQR:
      return "pqr";
  }
  return "unknown";
}

void CaseCounts::bump(InterleaveCase c) {
  switch (c) {
    case InterleaveCase::Base:
      ++base;
      break;
    case InterleaveCase::RemovalFree:
      ++removal_free;
      break;
    case InterleaveCase::Mute:
      ++mute;
      break;
    case InterleaveCase::Barrier:
      ++barrier;
      break;
    case InterleaveCase::PQR:
      ++pqr;
      break;
  }
}

CaseCounts& CaseCounts::operator+=(const CaseCounts& other) {
  base += other.base;
  removal_free += other.removal_free;
  mute += other.mute;
  barrier += other.barrier;
  pqr += other.pqr;
  return *this;
}

namespace {

bool same_response(const std::optional<Item>& got, const std::optional<Item>& expected) {
  if (!got && !expected) return true;
  return got && expected && got->uid == expected->uid;
}

SoloTrace slice(const SoloTrace& trace, std::size_t from, std::size_t to) {
  SoloTrace out;
  out.selector = trace.selector;
  out.steps.assign(trace.steps.begin() + static_cast<std::ptrdiff_t>(from),
                   trace.steps.begin() + static_cast<std::ptrdiff_t>(to));
  return out;
}

// One process step as the merge scheduler sees it.
struct AnnotatedOp {
  bool is_insert = false;
  Item item;                     // inserts
  std::optional<Item> expected;  // removes: the solo response
  bool trimmed = false;          // re-inserted around the recursive order
};

std::vector<AnnotatedOp> annotate(const SoloTrace& trace, std::size_t from, std::size_t to,
                                  const std::set<std::size_t>& trimmed_indices) {
  std::vector<AnnotatedOp> ops;
  ops.reserve(to - from);
  for (std::size_t i = from; i < to; ++i) {
    AnnotatedOp op;
    if (const auto* ins = std::get_if<SoloInsert>(&trace.steps[i])) {
      op.is_insert = true;
      op.item = ins->item;
    } else {
      op.expected = std::get<SoloRemove>(trace.steps[i]).response;
    }
    op.trimmed = trimmed_indices.contains(i);
    ops.push_back(std::move(op));
  }
  return ops;
}

[[noreturn]] void stuck(const ConsistentSet& state, const std::array<std::size_t, 2>& ptr,
                        const std::array<std::vector<AnnotatedOp>, 2>& streams) {
  std::ostringstream os;
  os << "THEOREM-VIOLATION: no indistinguishable next step; set holds [";
  for (const Item& it : state.contents()) os << " " << describe(it);
  os << " ],";
  for (int p = 0; p < 2; ++p) {
    os << " process " << p << " at op " << ptr[p] << "/" << streams[p].size();
    if (ptr[p] < streams[p].size()) {
      const AnnotatedOp& op = streams[p][ptr[p]];
      os << (op.trimmed ? " (trimmed " : " (")
         << (op.is_insert ? "insert)" : op.expected ? "remove -> " + describe(*op.expected) + ")"
                                                    : "remove -> null)");
    }
  }
  os << "; with a validated selector this indicates an engine or selector bug";
  throw theorem_violation(os.str());
}

// Replays trimmed and recursively-ordered operations together. The recursive
// order `xorder` pins the relative order of non-trimmed removes; trimmed
// removes slot in greedily at the point where they return their solo
// response; insertions provide no feedback and may run ahead of the
// recursive order when nothing else can. Ties go to process 0.
void merge_streams(ConsistentSet& state, const std::array<std::vector<AnnotatedOp>, 2>& streams,
                   const Schedule& xorder, Schedule& out) {
  // Positions of each process's non-trimmed ops inside xorder, plus a
  // consumed set so insertions can run out of order.
  std::array<std::vector<std::size_t>, 2> x_positions;
  for (std::size_t i = 0; i < xorder.size(); ++i) {
    x_positions[static_cast<std::size_t>(xorder[i])].push_back(i);
  }
  std::vector<bool> consumed(xorder.size(), false);
  std::size_t x_front = 0;
  std::array<std::size_t, 2> ptr{0, 0};
  std::array<std::size_t, 2> xptr{0, 0};

  auto commit_x = [&](int p) {
    const auto up = static_cast<std::size_t>(p);
    consumed[x_positions[up][xptr[up]]] = true;
    ++xptr[up];
    while (x_front < consumed.size() && consumed[x_front]) ++x_front;
  };
  auto try_remove = [&](int p, const AnnotatedOp& op) {
    auto [next, got] = state.remove();
    if (!same_response(got, op.expected)) return false;
    state = std::move(next);
    out.push_back(p);
    ++ptr[static_cast<std::size_t>(p)];
    return true;
  };

  while (ptr[0] < streams[0].size() || ptr[1] < streams[1].size()) {
    bool scheduled = false;

    // Trimmed removes that would return their solo response go first.
    for (int p = 0; p < 2 && !scheduled; ++p) {
      const auto up = static_cast<std::size_t>(p);
      if (ptr[up] == streams[up].size()) continue;
      const AnnotatedOp& op = streams[up][ptr[up]];
      if (op.trimmed) scheduled = try_remove(p, op);
    }
    // Then the recursive order's next operation, if indistinguishable.
    for (int p = 0; p < 2 && !scheduled; ++p) {
      const auto up = static_cast<std::size_t>(p);
      if (ptr[up] == streams[up].size()) continue;
      const AnnotatedOp& op = streams[up][ptr[up]];
      if (op.trimmed || x_positions[up][xptr[up]] != x_front) continue;
      if (op.is_insert) {
        state = state.insert(op.item);
        out.push_back(p);
        ++ptr[up];
        commit_x(p);
        scheduled = true;
      } else if (try_remove(p, op)) {
        commit_x(p);
        scheduled = true;
      }
    }
    // Insertions observe nothing; let one run ahead of the recursive order
    // when neither a trimmed remove nor the order's own op can move.
    for (int p = 0; p < 2 && !scheduled; ++p) {
      const auto up = static_cast<std::size_t>(p);
      if (ptr[up] == streams[up].size()) continue;
      const AnnotatedOp& op = streams[up][ptr[up]];
      if (op.trimmed || !op.is_insert) continue;
      state = state.insert(op.item);
      out.push_back(p);
      ++ptr[up];
      commit_x(p);
      scheduled = true;
    }
    // Last resort, still sound: any next step whose response equals its solo
    // recording keeps the whole history indistinguishable, recursive order
    // notwithstanding.
    for (int p = 0; p < 2 && !scheduled; ++p) {
      const auto up = static_cast<std::size_t>(p);
      if (ptr[up] == streams[up].size()) continue;
      const AnnotatedOp& op = streams[up][ptr[up]];
      if (op.trimmed || op.is_insert) continue;
      if (try_remove(p, op)) {
        commit_x(p);
        scheduled = true;
      }
    }
    if (!scheduled) stuck(state, ptr, streams);
  }
}

// Replays an already-built interleaving of two valid traces, returning the
// final set state. Mismatches signal an engine or selector defect.
ConsistentSet replay_interleaving(const Schedule& schedule, const SoloTrace& e0,
                                  const SoloTrace& e1) {
  const SoloTrace* traces[2] = {&e0, &e1};
  std::array<std::size_t, 2> ptr{0, 0};
  ConsistentSet state(e0.selector);
  for (int pid : schedule) {
    const auto upid = static_cast<std::size_t>(pid);
    const SoloOp& op = traces[upid]->steps[ptr[upid]++];
    if (const auto* ins = std::get_if<SoloInsert>(&op)) {
      state = state.insert(ins->item);
      continue;
    }
    auto [next, got] = state.remove();
    if (!same_response(got, std::get<SoloRemove>(op).response)) {
      throw theorem_violation(
          "THEOREM-VIOLATION: sub-interleaving replay diverged from solo responses");
    }
    state = std::move(next);
  }
  return state;
}

struct Interleaver {
  CaseCounts cases;
  std::optional<InterleaveCase> top_case;

  void took(InterleaveCase c, int depth) {
    cases.bump(c);
    if (depth == 0) top_case = c;
  }

  Schedule build(const SoloTrace& e0, const SoloTrace& e1, int depth) {
    if (depth > 0) {
      std::string why;
      for (const SoloTrace* t : {&e0, &e1}) {
        if (!replays_clean(*t, &why)) {
          throw theorem_violation(
              "THEOREM-VIOLATION: derived sub-execution does not replay clean (" + why +
              "); the selector likely violates consistency");
        }
      }
    }
    const std::array<const SoloTrace*, 2> traces{&e0, &e1};

    // Empty trace: run the other process alone.
    if (e0.size() == 0) {
      took(InterleaveCase::Base, depth);
      return Schedule(e1.size(), 1);
    }
    if (e1.size() == 0) {
      took(InterleaveCase::Base, depth);
      return Schedule(e0.size(), 0);
    }

    // A trace with no removes observes nothing: run the other process first
    // from the empty set, then the pure insertions.
    for (int j = 0; j < 2; ++j) {
      if (traces[j]->has_remove()) continue;
      took(InterleaveCase::RemovalFree, depth);
      Schedule out(traces[1 - j]->size(), 1 - j);
      out.insert(out.end(), traces[j]->size(), j);
      return out;
    }

    // Mute prefix: run it, then recurse on what remains.
    for (int j = 0; j < 2; ++j) {
      for (std::size_t len = 1; len <= traces[j]->size(); ++len) {
        if (!is_mute_prefix(*traces[j], len)) continue;
        took(InterleaveCase::Mute, depth);
        SoloTrace rest = slice(*traces[j], len, traces[j]->size());
        Schedule out(len, j);
        Schedule tail = j == 0 ? build(rest, e1, depth + 1) : build(e0, rest, depth + 1);
        out.insert(out.end(), tail.begin(), tail.end());
        return out;
      }
    }

    // Barrier: execute the largest barrier prefix, interleave the trimmed
    // remainder against the other full trace, then merge the trimmed removes
    // back in.
    for (int j = 0; j < 2; ++j) {
      BarrierAnalysis analysis = find_barriers(*traces[j], *traces[1 - j]);
      if (analysis.barriers.empty()) continue;
      took(InterleaveCase::Barrier, depth);
      const std::size_t boundary = analysis.barriers.back();

      TrimResult trimmed = trim_after_prefix(*traces[j], boundary);
      Schedule inner = j == 0 ? build(trimmed.trace, e1, depth + 1)
                              : build(e0, trimmed.trace, depth + 1);

      std::set<std::size_t> trimmed_at;
      for (const TrimmedRemove& tr : trimmed.registry) trimmed_at.insert(tr.original_index);

      std::array<std::vector<AnnotatedOp>, 2> streams;
      streams[static_cast<std::size_t>(j)] =
          annotate(*traces[j], boundary, traces[j]->size(), trimmed_at);
      streams[static_cast<std::size_t>(1 - j)] =
          annotate(*traces[1 - j], 0, traces[1 - j]->size(), {});

      ConsistentSet state = replay_prefix(*traces[j], boundary);
      Schedule out(boundary, j);
      merge_streams(state, streams, inner, out);
      return out;
    }

    // Neither mute prefixes nor barriers: split each trace around its
    // drain-last item into prefix / middle / suffix, interleave the pieces
    // recursively and merge the middle with its trimmed removes.
    took(InterleaveCase::PQR, depth);
    std::array<std::size_t, 2> insert_pos{};
    std::array<std::size_t, 2> remove_pos{};
    for (int i = 0; i < 2; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      std::optional<Item> g = drain_last(*traces[ui]);
      if (!g) {
        throw theorem_violation("THEOREM-VIOLATION: drain-last undefined for a trace with removes");
      }
      bool found_insert = false, found_remove = false;
      for (std::size_t s = 0; s < traces[ui]->size(); ++s) {
        const SoloOp& op = traces[ui]->steps[s];
        if (const auto* ins = std::get_if<SoloInsert>(&op)) {
          if (ins->item.uid == g->uid) {
            insert_pos[ui] = s;
            found_insert = true;
          }
        } else if (const auto& rem = std::get<SoloRemove>(op);
                   rem.response && rem.response->uid == g->uid) {
          remove_pos[ui] = s;
          found_remove = true;
        }
      }
      if (!found_insert || !found_remove) {
        throw theorem_violation("THEOREM-VIOLATION: drain-last item not inserted and removed");
      }
    }

    std::array<SoloTrace, 2> prefix, middle_trimmed, suffix;
    std::array<std::set<std::size_t>, 2> trimmed_at;
    for (int i = 0; i < 2; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      prefix[ui] = slice(*traces[ui], 0, insert_pos[ui] + 1);
      TrimResult trimmed =
          trim_after_prefix(slice(*traces[ui], 0, remove_pos[ui] + 1), insert_pos[ui] + 1);
      middle_trimmed[ui] = std::move(trimmed.trace);
      for (const TrimmedRemove& tr : trimmed.registry) trimmed_at[ui].insert(tr.original_index);
      suffix[ui] = slice(*traces[ui], remove_pos[ui] + 1, traces[ui]->size());
    }

    Schedule out = build(prefix[0], prefix[1], depth + 1);
    Schedule middle_order = build(middle_trimmed[0], middle_trimmed[1], depth + 1);
    Schedule tail = build(suffix[0], suffix[1], depth + 1);

    ConsistentSet state = replay_interleaving(out, prefix[0], prefix[1]);
    std::array<std::vector<AnnotatedOp>, 2> streams;
    for (int i = 0; i < 2; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      streams[ui] = annotate(*traces[ui], insert_pos[ui] + 1, remove_pos[ui] + 1, trimmed_at[ui]);
    }
    merge_streams(state, streams, middle_order, out);
    out.insert(out.end(), tail.begin(), tail.end());
    return out;
  }
};

}  // namespace

InterleaveResult interleave_single_set(const SoloTrace& e0, const SoloTrace& e1) {
  if (e0.selector.name() != e1.selector.name()) {
    throw std::invalid_argument("both traces must run against the same selector");
  }
  std::string why;
  if (!replays_clean(e0, &why)) throw std::invalid_argument("trace 0 does not replay: " + why);
  if (!replays_clean(e1, &why)) throw std::invalid_argument("trace 1 does not replay: " + why);
  std::set<std::uint64_t> uids;
  for (const SoloTrace* t : {&e0, &e1}) {
    for (const SoloOp& op : t->steps) {
      if (const auto* ins = std::get_if<SoloInsert>(&op)) {
        if (!uids.insert(ins->item.uid).second) {
          throw std::invalid_argument("traces insert overlapping uids: " + describe(ins->item));
        }
      }
    }
  }

  Interleaver interleaver;
  InterleaveResult result;
  result.schedule = interleaver.build(e0, e1, 0);
  result.cases = interleaver.cases;
  result.top_case = interleaver.top_case.value_or(InterleaveCase::Base);

  IndistinguishabilityVerdict verdict = verify_indistinguishable(result.schedule, e0, e1);
  if (!verdict.pass) {
    throw theorem_violation("THEOREM-VIOLATION: constructed schedule fails verification: " +
                            verdict.detail);
  }
  return result;
}

IndistinguishabilityVerdict verify_indistinguishable(const Schedule& schedule,
                                                     const SoloTrace& e0, const SoloTrace& e1) {
  if (e0.selector.name() != e1.selector.name()) {
    throw std::invalid_argument("both traces must run against the same selector");
  }
  std::array<std::size_t, 2> counts{0, 0};
  for (int pid : schedule) {
    if (pid != 0 && pid != 1) throw std::invalid_argument("schedule names a process other than 0/1");
    ++counts[static_cast<std::size_t>(pid)];
  }
  if (counts[0] != e0.size() || counts[1] != e1.size()) {
    throw std::invalid_argument("schedule does not interleave exactly the steps of both traces");
  }

  const SoloTrace* traces[2] = {&e0, &e1};
  std::array<std::size_t, 2> ptr{0, 0};
  ConsistentSet state(e0.selector);
  for (std::size_t at = 0; at < schedule.size(); ++at) {
    const auto upid = static_cast<std::size_t>(schedule[at]);
    const SoloOp& op = traces[upid]->steps[ptr[upid]++];
    if (const auto* ins = std::get_if<SoloInsert>(&op)) {
      state = state.insert(ins->item);
      continue;
    }
    const auto& expected = std::get<SoloRemove>(op).response;
    auto [next, got] = state.remove();
    if (!same_response(got, expected)) {
      std::ostringstream os;
      os << "at schedule step " << at << " process " << upid << " removed "
         << (got ? describe(*got) : "null") << " but its solo execution recorded "
         << (expected ? describe(*expected) : "null");
      return IndistinguishabilityVerdict{false, os.str()};
    }
    state = std::move(next);
  }
  return IndistinguishabilityVerdict{true, "all removes match the solo responses"};
}

}  // namespace csetlab
