#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "csetlab/lockstep.hpp"

namespace csetlab {

inline constexpr std::uint64_t kDefaultSeed = 299792458;
inline constexpr int kDefaultMaxSteps = 64;
inline constexpr const char* kToolVersion = "0.1.0";

struct ObjectSpec {
  std::string selector;
  std::vector<std::int64_t> items;  // payloads, insertion order
};

struct CheckScenario {
  std::string protocol;
  std::string selector = "queue";
  std::vector<std::int64_t> initial_items;
  std::vector<ObjectSpec> objects;              // two-object protocol only
  std::vector<std::int64_t> inputs;             // consensus protocols
  std::optional<std::int64_t> lucky_payload;    // lucky-state protocols
  int n = 2;                                    // test-and-set process count
  std::string builder = "two-objects";          // tournament block builder
  std::string mode = "exhaustive";              // exhaustive | random
  std::uint64_t random_schedules = 10000;
  std::vector<std::string> properties;          // empty: protocol defaults
  bool dedup = true;
};

struct TraceOpSpec {
  std::string op;  // insert | remove
  std::int64_t payload = 0;
};

struct InterleaveGenerator {
  int pairs = 500;
  int max_len = 8;
  std::vector<std::string> selectors{"queue", "stack", "priority"};
  bool mute_free = false;
};

struct InterleaveScenario {
  std::string selector = "queue";                  // explicit-trace mode
  std::optional<std::vector<TraceOpSpec>> trace0;  // explicit-trace mode
  std::optional<std::vector<TraceOpSpec>> trace1;
  std::optional<InterleaveGenerator> generator;
};

struct LockstepGenerator {
  int count = 10;
  int shared_objects = 2;
  int pattern_space = 3;
};

struct LockstepScenario {
  std::string kind = "queue";
  int isolation_bound = 8;
  std::vector<CandidateScript> candidates;        // explicit mode
  std::optional<LockstepGenerator> generator;
};

struct ValidateFScenario {
  std::string selector;
  std::vector<std::int64_t> universe{0, 1, 2, 3, 4, 5};
  int max_len = 6;
};

/// One parsed scenario file. `command` selects which payload is meaningful.
struct Scenario {
  int schema = 1;
  std::string command;
  std::uint64_t seed = kDefaultSeed;
  int max_steps = kDefaultMaxSteps;

  std::optional<CheckScenario> check;
  std::optional<InterleaveScenario> interleave;
  std::optional<LockstepScenario> lockstep;
  std::optional<ValidateFScenario> validate_f;
};

/// Strict parse: unknown fields and missing required fields raise
/// scenario_error with a diagnostic.
Scenario parse_scenario(const std::string& json_text);

/// Canonical echo with every default filled in; parse(echo(s)) == s.
std::string scenario_to_json(const Scenario& scenario);

}  // namespace csetlab
