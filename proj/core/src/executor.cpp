#include "csetlab/executor.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <unordered_map>

#include "csetlab/errors.hpp"

namespace csetlab {

namespace {

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

}  // namespace

bool SystemState::all_decided() const {
  return std::all_of(decided.begin(), decided.end(),
                     [](const std::optional<std::int64_t>& d) { return d.has_value(); });
}

std::string SystemState::encode() const {
  std::string out;
  out.reserve(128);
  for (const auto& [name, obj] : objects) {
    out += name;
    out.push_back('{');
    for (const Item& it : obj.contents()) csetlab::encode(out, it);
    out.push_back('/');
    // Removal history affects future marker classification; membership is
    // what matters, so encode it order-independently.
    std::vector<std::uint64_t> removed;
    for (const Item& it : obj.removed_items()) removed.push_back(it.uid);
    std::sort(removed.begin(), removed.end());
    for (std::uint64_t uid : removed) {
      out += std::to_string(uid);
      out.push_back(',');
    }
    out.push_back('}');
  }
  out.push_back('R');
  for (const auto& [name, value] : registers.cells()) {
    out += name;
    out.push_back('=');
    out += std::to_string(value);
    out.push_back(';');
  }
  for (std::size_t i = 0; i < locals.size(); ++i) {
    csetlab::encode(out, locals[i]);
    csetlab::encode(out, last_responses[i]);
    out.push_back(decided[i] ? 'D' : 'u');
    if (decided[i]) out += std::to_string(*decided[i]);
    out.push_back('#');
    out += std::to_string(step_counts[i]);
    out.push_back('|');
  }
  out += std::to_string(tainted_mask);
  return out;
}

SystemState initial_state(const ProtocolProgram& program) {
  if (program.process_count() < 1 || program.process_count() > 32) {
    throw config_error("the executor supports 1 to 32 processes");
  }
  SystemState state;
  state.objects = program.initial_objects();
  state.registers = program.initial_registers();
  const auto n = static_cast<std::size_t>(program.process_count());
  state.locals.assign(n, LocalState{});
  state.last_responses.assign(n, Response{NoResponse{}});
  state.decided.assign(n, std::nullopt);
  state.step_counts.assign(n, 0);
  return state;
}

Response apply_step(const ProtocolProgram& program, SystemState& state, int pid,
                    StepRecord* record) {
  if (pid < 0 || pid >= program.process_count()) {
    throw contract_error("scheduled process id out of range: " + std::to_string(pid));
  }
  const auto upid = static_cast<std::size_t>(pid);
  if (state.decided[upid]) {
    throw contract_error("schedule continues a process that already decided: " +
                         std::to_string(pid));
  }

  StepOutcome out = program.step(pid, state.locals[upid], state.last_responses[upid]);

  Response response = NoResponse{};
  std::visit(Overload{
                 [&](const InsertAction& a) {
                   auto it = state.objects.find(a.object);
                   if (it == state.objects.end()) {
                     throw contract_error("action names unknown object: " + a.object);
                   }
                   it->second = it->second.insert(a.item);
                   response = InsertedResponse{};
                 },
                 [&](const RemoveAction& a) {
                   auto it = state.objects.find(a.object);
                   if (it == state.objects.end()) {
                     throw contract_error("action names unknown object: " + a.object);
                   }
                   auto [next, removed] = it->second.remove();
                   bool consumed = removed && removed->tag == ItemTag::Marker &&
                                   next.marker_sibling_consumed(*removed);
                   it->second = std::move(next);
                   response = RemovedResponse{removed, consumed};
                 },
                 [&](const ReadAction& a) { response = ReadResponse{state.registers.read(a.reg)}; },
                 [&](const WriteAction& a) {
                   state.registers = state.registers.write(a.reg, a.value);
                   response = WroteResponse{};
                 },
                 [&](const DecideAction& a) { state.decided[upid] = a.value; },
             },
             out.action);

  state.locals[upid] = out.next;
  state.last_responses[upid] = response;
  state.step_counts[upid] += 1;

  // A process that has not yet been invoked while some other call already
  // completed with 0 can no longer be linearized as the first caller. Only
  // meaningful for test-and-set programs, where decisions are win/lose.
  if (program.kind() == ProtocolProgram::Kind::TestAndSet) {
    bool loser_completed = false;
    for (const auto& d : state.decided) {
      if (d && *d == 0) loser_completed = true;
    }
    if (loser_completed) {
      for (std::size_t q = 0; q < state.step_counts.size(); ++q) {
        if (state.step_counts[q] == 0) state.tainted_mask |= (1u << q);
      }
    }
  }

  if (record) *record = StepRecord{pid, out.action, response};
  return response;
}

RunResult run(const ProtocolProgram& program, const Schedule& schedule) {
  RunResult result;
  result.state = initial_state(program);
  result.traces.assign(static_cast<std::size_t>(program.process_count()), {});
  for (int pid : schedule) {
    StepRecord record;
    apply_step(program, result.state, pid, &record);
    result.traces[static_cast<std::size_t>(pid)].push_back(record);
  }
  return result;
}

SoloExecution solo_execution(const ProtocolProgram& program, int pid, int max_steps) {
  SoloExecution solo;
  solo.pid = pid;
  SystemState state = initial_state(program);
  const auto upid = static_cast<std::size_t>(pid);
  for (int i = 0; i < max_steps && !state.decided[upid]; ++i) {
    StepRecord record;
    apply_step(program, state, pid, &record);
    solo.steps.push_back(record);
  }
  solo.decided = state.decided[upid].has_value();
  solo.decision = state.decided[upid];
  return solo;
}

std::string property_name(PropertyId id) {
  switch (id) {
    case PropertyId::Agreement:
      return "agreement";
    case PropertyId::Validity:
      return "validity";
    case PropertyId::WaitFreedom:
      return "wait-freedom";
    case PropertyId::WinnerUniqueness:
      return "winner-uniqueness";
    case PropertyId::RegisterFreeness:
      return "register-freeness";
    case PropertyId::TasLinearization:
      return "tas-linearization";
  }
  return "unknown";
}

std::optional<PropertyId> property_by_name(const std::string& name) {
  for (PropertyId id :
       {PropertyId::Agreement, PropertyId::Validity, PropertyId::WaitFreedom,
        PropertyId::WinnerUniqueness, PropertyId::RegisterFreeness, PropertyId::TasLinearization}) {
    if (property_name(id) == name) return id;
  }
  return std::nullopt;
}

std::vector<PropertyId> default_properties(const ProtocolProgram& program) {
  if (program.kind() == ProtocolProgram::Kind::Consensus) {
    return {PropertyId::Agreement, PropertyId::Validity, PropertyId::WaitFreedom};
  }
  return {PropertyId::WinnerUniqueness, PropertyId::WaitFreedom, PropertyId::TasLinearization};
}

namespace {

// Evaluates the safety properties incrementally: `record` is the action that
// produced `state`. Returns a failure description, or nullopt.
std::optional<std::pair<PropertyId, std::string>> evaluate_after_step(
    const ProtocolProgram& program, const SystemState& state, const StepRecord& record,
    const std::vector<PropertyId>& properties) {
  auto wants = [&](PropertyId id) {
    return std::find(properties.begin(), properties.end(), id) != properties.end();
  };

  if (wants(PropertyId::RegisterFreeness) &&
      (std::holds_alternative<ReadAction>(record.action) ||
       std::holds_alternative<WriteAction>(record.action))) {
    return std::make_pair(PropertyId::RegisterFreeness,
                          "process " + std::to_string(record.pid) +
                              " performed a register action: " + describe(record.action));
  }

  const auto* decide = std::get_if<DecideAction>(&record.action);
  if (!decide) return std::nullopt;

  if (wants(PropertyId::Agreement)) {
    for (std::size_t q = 0; q < state.decided.size(); ++q) {
      if (state.decided[q] && *state.decided[q] != decide->value) {
        std::ostringstream os;
        os << "process " << record.pid << " decided " << decide->value << " but process " << q
           << " decided " << *state.decided[q];
        return std::make_pair(PropertyId::Agreement, os.str());
      }
    }
  }
  if (wants(PropertyId::Validity)) {
    const auto& inputs = program.inputs();
    if (std::find(inputs.begin(), inputs.end(), decide->value) == inputs.end()) {
      std::ostringstream os;
      os << "process " << record.pid << " decided " << decide->value
         << ", which is no process's input";
      return std::make_pair(PropertyId::Validity, os.str());
    }
  }
  if (wants(PropertyId::WinnerUniqueness)) {
    if (decide->value != 0 && decide->value != 1) {
      std::ostringstream os;
      os << "process " << record.pid << " decided " << decide->value << " (not 0/1)";
      return std::make_pair(PropertyId::WinnerUniqueness, os.str());
    }
    int winners = 0;
    for (const auto& d : state.decided) {
      if (d && *d == 1) ++winners;
    }
    if (winners > 1) {
      return std::make_pair(PropertyId::WinnerUniqueness, "two processes decided 1");
    }
  }
  if (wants(PropertyId::TasLinearization) && decide->value == 1 &&
      (state.tainted_mask & (1u << static_cast<unsigned>(record.pid))) != 0) {
    std::ostringstream os;
    os << "process " << record.pid
       << " won after some losing call had already completed before its invocation";
    return std::make_pair(PropertyId::TasLinearization, os.str());
  }
  return std::nullopt;
}

std::optional<std::pair<PropertyId, std::string>> evaluate_terminal(
    const SystemState& state, const std::vector<PropertyId>& properties) {
  auto wants = [&](PropertyId id) {
    return std::find(properties.begin(), properties.end(), id) != properties.end();
  };
  if (wants(PropertyId::WinnerUniqueness)) {
    int winners = 0;
    for (const auto& d : state.decided) {
      if (d && *d == 1) ++winners;
    }
    if (winners != 1) {
      return std::make_pair(PropertyId::WinnerUniqueness,
                            "completed schedule has " + std::to_string(winners) +
                                " winners instead of exactly one");
    }
  }
  return std::nullopt;
}

struct Explorer {
  const ProtocolProgram& program;
  const std::vector<PropertyId>& properties;
  CheckBounds bounds;

  std::unordered_map<std::string, std::uint64_t> memo;  // state -> completions below it
  std::uint64_t states_visited = 0;
  std::map<PropertyId, Counterexample> failures;
  std::optional<Counterexample> inconclusive;
  int max_steps_observed = 0;
  Schedule path;

  std::uint64_t explore(const SystemState& state) {
    const std::string key = bounds.dedup ? state.encode() : std::string{};
    if (bounds.dedup) {
      auto it = memo.find(key);
      if (it != memo.end()) return it->second;
    }
    ++states_visited;

    std::uint64_t completions = 0;
    if (state.all_decided()) {
      completions = 1;
      if (auto failure = evaluate_terminal(state, properties)) {
        record_failure(failure->first, failure->second);
      }
    } else {
      for (int pid = 0; pid < program.process_count(); ++pid) {
        const auto upid = static_cast<std::size_t>(pid);
        if (state.decided[upid]) continue;
        if (state.step_counts[upid] >= bounds.max_steps) {
          if (!inconclusive) {
            inconclusive = Counterexample{path, "process " + std::to_string(pid) +
                                                    " reached the step bound without deciding"};
          }
          continue;
        }
        SystemState child = state;
        StepRecord record;
        apply_step(program, child, pid, &record);
        if (const auto* decide = std::get_if<DecideAction>(&record.action)) {
          (void)decide;
          max_steps_observed = std::max(max_steps_observed, child.step_counts[upid]);
        }
        path.push_back(pid);
        if (auto failure = evaluate_after_step(program, child, record, properties)) {
          record_failure(failure->first, failure->second);
        }
        completions += explore(child);
        path.pop_back();
      }
    }

    if (bounds.dedup) memo.emplace(key, completions);
    return completions;
  }

  void record_failure(PropertyId id, const std::string& detail) {
    if (failures.contains(id)) return;
    failures.emplace(id, Counterexample{path, detail});
  }
};

}  // namespace

std::vector<Verdict> check_all_interleavings(const ProtocolProgram& program,
                                             const std::vector<PropertyId>& properties,
                                             const CheckBounds& bounds) {
  Explorer explorer{program, properties, bounds, {}, 0, {}, std::nullopt, 0, {}};
  const std::uint64_t schedules = explorer.explore(initial_state(program));

  std::vector<Verdict> verdicts;
  verdicts.reserve(properties.size());
  for (PropertyId id : properties) {
    Verdict v;
    v.property = id;
    v.explored_states = explorer.states_visited;
    v.explored_schedules = schedules;
    v.max_steps_observed = explorer.max_steps_observed;
    v.fully_explored = !explorer.inconclusive.has_value();
    auto failure = explorer.failures.find(id);
    if (failure != explorer.failures.end()) {
      v.outcome = Outcome::Fail;
      v.counterexample = failure->second;
    } else if (explorer.inconclusive) {
      // Bound exhaustion makes every unfailed verdict inconclusive, not a
      // pass: the space was not covered.
      v.outcome = Outcome::Inconclusive;
      v.counterexample = explorer.inconclusive;
    } else {
      v.outcome = Outcome::Pass;
    }
    verdicts.push_back(std::move(v));
  }
  return verdicts;
}

Verdict check_tas_linearization(const ProtocolProgram& program, const CheckBounds& bounds) {
  return check_all_interleavings(program, {PropertyId::TasLinearization}, bounds).front();
}

RandomCheckResult check_random_schedules(const ProtocolProgram& program,
                                         const std::vector<PropertyId>& properties,
                                         std::uint64_t count, std::uint64_t seed, int max_steps) {
  RandomCheckResult result;
  std::mt19937_64 rng(seed);
  for (std::uint64_t i = 0; i < count; ++i) {
    SystemState state = initial_state(program);
    Schedule path;
    while (!state.all_decided()) {
      std::vector<int> ready;
      for (int pid = 0; pid < program.process_count(); ++pid) {
        const auto upid = static_cast<std::size_t>(pid);
        if (!state.decided[upid] && state.step_counts[upid] < max_steps) ready.push_back(pid);
      }
      if (ready.empty()) {
        result.inconclusive = true;
        return result;
      }
      std::uniform_int_distribution<std::size_t> pick(0, ready.size() - 1);
      const int pid = ready[pick(rng)];
      StepRecord record;
      apply_step(program, state, pid, &record);
      path.push_back(pid);
      if (std::holds_alternative<DecideAction>(record.action)) {
        result.max_steps_observed = std::max(
            result.max_steps_observed, state.step_counts[static_cast<std::size_t>(pid)]);
      }
      if (auto failure = evaluate_after_step(program, state, record, properties)) {
        result.failure = Counterexample{path, failure->second};
        result.failed_property = failure->first;
        result.schedules_run = i + 1;
        return result;
      }
    }
    if (auto failure = evaluate_terminal(state, properties)) {
      result.failure = Counterexample{path, failure->second};
      result.failed_property = failure->first;
      result.schedules_run = i + 1;
      return result;
    }
  }
  result.schedules_run = count;
  return result;
}

}  // namespace csetlab
