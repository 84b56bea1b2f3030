#pragma once

#include <stdexcept>
#include <string>

namespace csetlab {

// A caller broke an operation's precondition (duplicate uid insert,
// unregistered marker, scheduling a decided process, ...).
struct contract_error : std::logic_error {
  using std::logic_error::logic_error;
};

// A scenario or program configuration is invalid (no lucky item, process
// count out of bounds, wrong selector kind for a queue-only protocol).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Scenario file failed schema validation.
struct scenario_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace csetlab
