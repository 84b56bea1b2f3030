#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "csetlab/protocol.hpp"

namespace csetlab {

using Schedule = std::vector<int>;

/// Snapshot of the whole simulated system. Value type; the checker branches
/// by copying.
struct SystemState {
  std::map<std::string, ConsistentSet> objects;
  RegisterBank registers;
  std::vector<LocalState> locals;
  std::vector<Response> last_responses;
  std::vector<std::optional<std::int64_t>> decided;
  std::vector<int> step_counts;
  // Bit i set: process i had not yet taken a step at a moment when some other
  // process had already completed with 0. If such a process later decides 1,
  // the winner cannot be linearized first.
  std::uint32_t tainted_mask = 0;

  bool all_decided() const;
  std::string encode() const;
};

struct StepRecord {
  int pid = 0;
  Action action;
  Response response;
};

struct RunResult {
  SystemState state;
  std::vector<std::vector<StepRecord>> traces;  // per process, in its own order
};

SystemState initial_state(const ProtocolProgram& program);

/// Applies one atomic action of `pid` in place and returns its response.
/// Throws contract_error when scheduling an already-decided process.
Response apply_step(const ProtocolProgram& program, SystemState& state, int pid,
                    StepRecord* record = nullptr);

/// Runs a full schedule from the initial state. Each schedule entry is one
/// atomic action, so the run is linearizable by construction.
RunResult run(const ProtocolProgram& program, const Schedule& schedule);

/// A process's isolated run: its ordered actions with responses, ending with
/// its Decide (decided=true) or cut off at max_steps (decided=false).
struct SoloExecution {
  int pid = 0;
  std::vector<StepRecord> steps;
  bool decided = false;
  std::optional<std::int64_t> decision;
};

SoloExecution solo_execution(const ProtocolProgram& program, int pid, int max_steps = 64);

enum class PropertyId {
  Agreement,
  Validity,
  WaitFreedom,
  WinnerUniqueness,
  RegisterFreeness,
  TasLinearization,
};

std::string property_name(PropertyId id);
std::optional<PropertyId> property_by_name(const std::string& name);

struct CheckBounds {
  int max_steps = 64;   // per-process step bound; exceeding it is inconclusive
  bool dedup = true;    // memoize states; never changes verdicts
};

enum class Outcome { Pass, Fail, Inconclusive };

struct Counterexample {
  Schedule schedule;
  std::string detail;
};

struct Verdict {
  PropertyId property;
  Outcome outcome = Outcome::Pass;
  std::optional<Counterexample> counterexample;
  std::uint64_t explored_states = 0;     // distinct states visited
  std::uint64_t explored_schedules = 0;  // complete schedules covered
  int max_steps_observed = 0;            // wait-freedom bound actually needed
  bool fully_explored = false;
};

/// Depth-first enumeration of every schedule (with optional state
/// deduplication), evaluating the requested properties at every reached
/// prefix state. Bound exhaustion yields Inconclusive, never a silent
/// truncation. Exploration order is lowest pid first, so counterexamples are
/// reproducible.
std::vector<Verdict> check_all_interleavings(const ProtocolProgram& program,
                                             const std::vector<PropertyId>& properties,
                                             const CheckBounds& bounds = {});

/// Winner-first linearizability of a TAS program: in every explored schedule
/// there is a linearization placing the winner's call first; in particular no
/// completed losing call may entirely precede the winner's invocation.
Verdict check_tas_linearization(const ProtocolProgram& program, const CheckBounds& bounds = {});

std::vector<PropertyId> default_properties(const ProtocolProgram& program);

/// Seeded random complete schedules, for instances too large to enumerate.
struct RandomCheckResult {
  std::uint64_t schedules_run = 0;
  std::optional<Counterexample> failure;
  std::optional<PropertyId> failed_property;
  int max_steps_observed = 0;
  bool inconclusive = false;
};

RandomCheckResult check_random_schedules(const ProtocolProgram& program,
                                         const std::vector<PropertyId>& properties,
                                         std::uint64_t count, std::uint64_t seed,
                                         int max_steps = 256);

}  // namespace csetlab
