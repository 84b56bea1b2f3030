#pragma once

#include <optional>
#include <string>

#include "csetlab/scenario.hpp"

namespace csetlab {

// Exit code contract: 0 all pass, 1 property failure, 2 inconclusive or
// not-found, 3 usage/malformed scenario.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitUsage = 3;

struct CmdOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> max_steps;
};

struct CmdResult {
  int exit_code = kExitUsage;
  std::string report_json;  // canonical report; byte-identical per scenario+seed
  std::string summary;      // one line per verdict, human oriented
};

CmdResult cmd_check(const Scenario& scenario);
CmdResult cmd_interleave(const Scenario& scenario);
CmdResult cmd_lockstep(const Scenario& scenario);
CmdResult cmd_validate_f(const Scenario& scenario);

/// Re-runs the scenario embedded in a previously emitted report and verifies
/// the report reproduces byte for byte (counterexamples included).
CmdResult cmd_replay(const std::string& report_json);

/// Parses and dispatches. Malformed scenarios yield exit 3 and a diagnostic
/// in `summary`.
CmdResult dispatch_scenario(const std::string& scenario_json, const CmdOverrides& overrides = {});

}  // namespace csetlab
