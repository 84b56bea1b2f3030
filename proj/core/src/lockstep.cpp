#include "csetlab/lockstep.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "csetlab/errors.hpp"

namespace csetlab {

std::string object_kind_name(ObjectKind kind) {
  return kind == ObjectKind::Queue ? "queue" : "stack";
}

Selector selector_for(ObjectKind kind) {
  return kind == ObjectKind::Queue ? Selector::fifo_queue() : Selector::lifo_stack();
}

namespace {

struct Expectation {
  bool is_remove = false;
  std::optional<Item> response;  // removes only
};

// Builds the per-process script replayer: emits the scripted ops in order,
// concedes with 0 at the first response that deviates from the solo run, and
// decides 1 once the whole script matched.
ProtocolProgram scripted_program(const std::string& name,
                                 std::vector<CandidateScript> scripts, ObjectKind kind,
                                 UidAllocator& uids) {
  const Selector selector = selector_for(kind);
  std::map<std::string, ConsistentSet> objects;
  for (const CandidateScript& script : scripts) {
    for (const ScriptOp& op : script.ops) objects.emplace(op.object, ConsistentSet(selector));
  }

  // Fixed items per insert op, and solo expectations per op, computed by
  // direct simulation over the candidate's own objects.
  auto items = std::make_shared<std::vector<std::vector<Item>>>();
  auto expects = std::make_shared<std::vector<std::vector<Expectation>>>();
  for (std::size_t p = 0; p < scripts.size(); ++p) {
    std::map<std::string, ConsistentSet> solo_objects;
    for (const ScriptOp& op : scripts[p].ops) solo_objects.emplace(op.object, ConsistentSet(selector));
    std::vector<Item> op_items(scripts[p].ops.size());
    std::vector<Expectation> op_expects(scripts[p].ops.size());
    for (std::size_t k = 0; k < scripts[p].ops.size(); ++k) {
      const ScriptOp& op = scripts[p].ops[k];
      auto it = solo_objects.find(op.object);
      if (op.is_insert) {
        op_items[k] = value_item(op.payload, static_cast<std::int32_t>(p), uids);
        it->second = it->second.insert(op_items[k]);
      } else {
        auto [next, removed] = it->second.remove();
        it->second = std::move(next);
        op_expects[k] = Expectation{true, removed};
      }
    }
    items->push_back(std::move(op_items));
    expects->push_back(std::move(op_expects));
  }

  auto shared_scripts = std::make_shared<std::vector<CandidateScript>>(std::move(scripts));

  auto step = [=](int pid, const LocalState& local, const Response& resp) -> StepOutcome {
    const auto upid = static_cast<std::size_t>(pid);
    const auto& ops = (*shared_scripts)[upid].ops;
    const auto k = static_cast<std::size_t>(local.phase);

    if (k > 0) {
      const Expectation& expect = (*expects)[upid][k - 1];
      if (expect.is_remove) {
        const auto* rem = std::get_if<RemovedResponse>(&resp);
        if (!rem) throw contract_error("scripted candidate expected a remove response");
        const bool match = (!rem->item && !expect.response) ||
                           (rem->item && expect.response && rem->item->uid == expect.response->uid);
        if (!match) {
          LocalState next = local;
          next.phase = -1;
          return {DecideAction{0}, next};
        }
      }
    }
    if (k == ops.size()) {
      LocalState next = local;
      next.phase = -1;
      return {DecideAction{1}, next};
    }
    const ScriptOp& op = ops[k];
    LocalState next = local;
    next.phase = static_cast<std::int32_t>(k + 1);
    if (op.is_insert) return {InsertAction{op.object, (*items)[upid][k]}, next};
    return {RemoveAction{op.object}, next};
  };

  return ProtocolProgram(name, ProtocolProgram::Kind::TestAndSet,
                         static_cast<int>(shared_scripts->size()), std::move(objects),
                         RegisterBank{}, {}, step);
}

}  // namespace

ProtocolProgram candidate_program(const CandidateScript& script, ObjectKind kind,
                                  UidAllocator& uids) {
  return scripted_program("candidate:" + script.name, {script}, kind, uids);
}

ProtocolProgram combined_program(const CandidateScript& p, const CandidateScript& q,
                                 ObjectKind kind, UidAllocator& uids) {
  return scripted_program("lockstep:" + p.name + "+" + q.name, {p, q}, kind, uids);
}

std::variant<Signature, IsolationViolation> signature_of(const ProtocolProgram& program, int pid,
                                                          int candidate_index,
                                                          int isolation_bound) {
  SoloExecution solo = solo_execution(program, pid, isolation_bound + 2);
  if (!solo.decided || solo.decision != 1) {
    return IsolationViolation{candidate_index,
                              "solo run does not decide 1 within the isolation bound"};
  }
  Signature sig;
  sig.candidate = candidate_index;
  for (const StepRecord& record : solo.steps) {
    if (const auto* ins = std::get_if<InsertAction>(&record.action)) {
      sig.steps.push_back(SigStep{true, ins->object});
      sig.footprint.insert(ins->object);
    } else if (const auto* rem = std::get_if<RemoveAction>(&record.action)) {
      sig.steps.push_back(SigStep{false, rem->object});
      sig.footprint.insert(rem->object);
    }
  }
  if (static_cast<int>(sig.steps.size()) > isolation_bound) {
    return IsolationViolation{candidate_index,
                              "solo run takes " + std::to_string(sig.steps.size()) +
                                  " object steps, above the bound of " +
                                  std::to_string(isolation_bound)};
  }
  return sig;
}

SignatureExtraction extract_signatures(std::span<const CandidateScript> family, ObjectKind kind,
                                       int isolation_bound) {
  SignatureExtraction out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    UidAllocator uids;
    ProtocolProgram program = candidate_program(family[i], kind, uids);
    auto result = signature_of(program, 0, static_cast<int>(i), isolation_bound);
    if (auto* violation = std::get_if<IsolationViolation>(&result)) {
      out.violations.push_back(std::move(*violation));
    } else {
      out.signatures.push_back(std::move(std::get<Signature>(result)));
    }
  }
  return out;
}

namespace {

std::vector<std::string> shared_footprint(const Signature& a, const Signature& b) {
  std::vector<std::string> shared;
  std::set_intersection(a.footprint.begin(), a.footprint.end(), b.footprint.begin(),
                        b.footprint.end(), std::back_inserter(shared));
  return shared;
}

std::vector<SigStep> restrict_steps(const Signature& sig, const std::vector<std::string>& shared) {
  std::vector<SigStep> out;
  for (const SigStep& step : sig.steps) {
    if (std::binary_search(shared.begin(), shared.end(), step.object)) out.push_back(step);
  }
  return out;
}

bool same_pattern(const std::vector<SigStep>& a, const std::vector<SigStep>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_insert != b[i].is_insert || a[i].object != b[i].object) return false;
  }
  return true;
}

}  // namespace

std::optional<ConflictPair> select_conflict_pair(std::span<const Signature> signatures) {
  // Prefer pairs that actually contend on shared objects; a pair with
  // disjoint footprints qualifies vacuously and is kept as a fallback.
  for (bool require_shared : {true, false}) {
    for (std::size_t i = 0; i < signatures.size(); ++i) {
      for (std::size_t j = i + 1; j < signatures.size(); ++j) {
        std::vector<std::string> shared = shared_footprint(signatures[i], signatures[j]);
        if (require_shared && shared.empty()) continue;
        if (same_pattern(restrict_steps(signatures[i], shared),
                         restrict_steps(signatures[j], shared))) {
          return ConflictPair{signatures[i].candidate, signatures[j].candidate, std::move(shared)};
        }
      }
    }
  }
  return std::nullopt;
}

Schedule lockstep_schedule(const Signature& p, const Signature& q, ObjectKind kind) {
  const std::vector<std::string> shared = shared_footprint(p, q);
  auto is_shared = [&shared](const std::string& object) {
    return std::binary_search(shared.begin(), shared.end(), object);
  };

  Schedule out;
  std::size_t ip = 0, iq = 0;
  while (ip < p.steps.size() || iq < q.steps.size()) {
    while (ip < p.steps.size() && !is_shared(p.steps[ip].object)) {
      out.push_back(0);
      ++ip;
    }
    while (iq < q.steps.size() && !is_shared(q.steps[iq].object)) {
      out.push_back(1);
      ++iq;
    }
    if (ip == p.steps.size() && iq == q.steps.size()) break;
    if (ip == p.steps.size() || iq == q.steps.size()) {
      throw contract_error("lock-step scheduling requires matching shared patterns");
    }
    if (p.steps[ip].is_insert != q.steps[iq].is_insert ||
        p.steps[ip].object != q.steps[iq].object) {
      throw contract_error("lock-step scheduling requires matching shared patterns");
    }
    // Inserts alternate first-then-second; removes reverse the order on a
    // stack so each process pops its own item.
    if (p.steps[ip].is_insert || kind == ObjectKind::Queue) {
      out.push_back(0);
      out.push_back(1);
    } else {
      out.push_back(1);
      out.push_back(0);
    }
    ++ip;
    ++iq;
  }
  out.push_back(0);  // both scripts complete: the deciding steps
  out.push_back(1);
  return out;
}

LockstepCertificate run_lockstep(const CandidateScript& p, const CandidateScript& q,
                                 const Signature& sig_p, const Signature& sig_q, ObjectKind kind) {
  LockstepCertificate cert;
  cert.schedule = lockstep_schedule(sig_p, sig_q, kind);
  UidAllocator uids;
  ProtocolProgram program = combined_program(p, q, kind, uids);
  try {
    RunResult result = run(program, cert.schedule);
    cert.traces = std::move(result.traces);
    const auto& decided = result.state.decided;
    cert.double_win = decided[0] && *decided[0] == 1 && decided[1] && *decided[1] == 1;
    if (cert.double_win) {
      cert.detail =
          "both processes observed exactly their solo responses and decided 1: a double win";
    } else {
      std::ostringstream os;
      os << "replay distinguishable: decisions were "
         << (decided[0] ? std::to_string(*decided[0]) : "pending") << " and "
         << (decided[1] ? std::to_string(*decided[1]) : "pending");
      cert.detail = os.str();
    }
  } catch (const contract_error& e) {
    cert.double_win = false;
    cert.detail = std::string("replay aborted: ") + e.what();
  }
  return cert;
}

std::vector<CandidateScript> generate_candidate_family(int count, int shared_objects,
                                                       int pattern_space, std::uint64_t seed) {
  if (count < 1 || shared_objects < 1 || pattern_space < 1) {
    throw config_error("candidate family generation needs positive sizes");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::string> shared_names;
  for (int i = 0; i < shared_objects; ++i) shared_names.push_back("Q" + std::to_string(i + 1));

  // A pool of shared-object patterns; with pattern_space < count the
  // pigeonhole guarantees two candidates restrict to the same pattern.
  std::vector<std::vector<ScriptOp>> pool;
  std::uniform_int_distribution<int> len_dist(1, 3);
  std::uniform_int_distribution<std::size_t> obj_dist(0, shared_names.size() - 1);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int i = 0; i < pattern_space; ++i) {
    std::vector<ScriptOp> pattern;
    const int len = len_dist(rng);
    int pending = 0;
    for (int k = 0; k < len; ++k) {
      const std::string& object = shared_names[obj_dist(rng)];
      const bool insert = pending == 0 || coin(rng) == 0;
      pattern.push_back(ScriptOp{insert, object, 0});
      pending += insert ? 1 : -1;
      if (pending < 0) pending = 0;
    }
    pool.push_back(std::move(pattern));
  }

  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> private_ops(0, 2);
  std::vector<CandidateScript> family;
  for (int i = 0; i < count; ++i) {
    CandidateScript script;
    script.name = "c" + std::to_string(i);
    const std::string scratch = "p" + std::to_string(i);
    const int before = private_ops(rng);
    for (int k = 0; k < before; ++k) script.ops.push_back(ScriptOp{true, scratch, k});
    std::int64_t payload = 100 + i;
    for (ScriptOp op : pool[pick(rng)]) {
      if (op.is_insert) op.payload = payload++;
      script.ops.push_back(op);
    }
    if (private_ops(rng) > 0) script.ops.push_back(ScriptOp{false, scratch, 0});
    family.push_back(std::move(script));
  }
  return family;
}

}  // namespace csetlab
