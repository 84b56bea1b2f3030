#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "csetlab/consistent_set.hpp"
#include "csetlab/registers.hpp"

namespace csetlab {

// One atomic shared-memory action. Decide terminates the process; a process
// emits exactly one Decide per execution.
struct InsertAction {
  std::string object;
  Item item;
};
struct RemoveAction {
  std::string object;
};
struct ReadAction {
  std::string reg;
};
struct WriteAction {
  std::string reg;
  std::int64_t value;
};
struct DecideAction {
  std::int64_t value;
};
using Action = std::variant<InsertAction, RemoveAction, ReadAction, WriteAction, DecideAction>;

// Response to the previous action of the same process. NoResponse before a
// process's first step.
struct NoResponse {};
struct InsertedResponse {};
struct RemovedResponse {
  std::optional<Item> item;
  // For Marker items: whether the sibling marker had already been removed
  // from the object at the moment this one came out. Removal-order data the
  // protocols use to classify a marker as the winner or loser of its pair.
  bool marker_sibling_consumed = false;
};
struct ReadResponse {
  std::optional<std::int64_t> value;
};
struct WroteResponse {};
using Response = std::variant<NoResponse, InsertedResponse, RemovedResponse, ReadResponse, WroteResponse>;

/// Per-process protocol state: a phase counter plus protocol-defined integer
/// and item scratch slots. Kept flat so system states hash and compare
/// cheaply in the checker.
struct LocalState {
  std::int32_t phase = 0;
  std::vector<std::int64_t> ints;
  std::vector<Item> items;
};

struct StepOutcome {
  Action action;
  LocalState next;
};

/// A deterministic per-process state machine emitting one atomic action per
/// step. The step function must be pure: identical (pid, local, response)
/// inputs give identical outputs, which the executor relies on for solo
/// extraction and replay.
class ProtocolProgram {
 public:
  enum class Kind { Consensus, TestAndSet };

  using StepFn = std::function<StepOutcome(int pid, const LocalState&, const Response&)>;

  ProtocolProgram(std::string name, Kind kind, int process_count,
                  std::map<std::string, ConsistentSet> objects, RegisterBank registers,
                  std::vector<std::int64_t> inputs, StepFn step, std::int64_t isolation_bound = 0)
      : name_(std::move(name)),
        kind_(kind),
        process_count_(process_count),
        objects_(std::move(objects)),
        registers_(std::move(registers)),
        inputs_(std::move(inputs)),
        step_(std::move(step)),
        isolation_bound_(isolation_bound) {}

  const std::string& name() const { return name_; }
  Kind kind() const { return kind_; }
  int process_count() const { return process_count_; }
  const std::map<std::string, ConsistentSet>& initial_objects() const { return objects_; }
  const RegisterBank& initial_registers() const { return registers_; }
  const std::vector<std::int64_t>& inputs() const { return inputs_; }

  // Declared isolation bound: a solo run decides within this many steps.
  // Zero means the program does not declare one.
  std::int64_t isolation_bound() const { return isolation_bound_; }

  StepOutcome step(int pid, const LocalState& local, const Response& response) const {
    return step_(pid, local, response);
  }

 private:
  std::string name_;
  Kind kind_;
  int process_count_;
  std::map<std::string, ConsistentSet> objects_;
  RegisterBank registers_;
  std::vector<std::int64_t> inputs_;
  StepFn step_;
  std::int64_t isolation_bound_;
};

std::string describe(const Action& action);
std::string describe(const Response& response);

// Canonical byte encodings used for state deduplication keys.
void encode(std::string& out, const Item& item);
void encode(std::string& out, const Action& action);
void encode(std::string& out, const Response& response);
void encode(std::string& out, const LocalState& local);

}  // namespace csetlab
