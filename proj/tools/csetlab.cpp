#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "csetlab/commands.hpp"
#include "csetlab/errors.hpp"

namespace {

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct CommonOpts {
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_steps;
  std::string out_path;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, const char* scenario_help) {
  cmd->add_option("--scenario", opts.scenario_path, scenario_help)
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "override the scenario seed");
  cmd->add_option("--max-steps", opts.max_steps, "override the per-process step bound");
  cmd->add_option("--out", opts.out_path, "write the report to this path");
  cmd->add_flag("--quiet", opts.quiet, "suppress the summary");
}

int emit(const csetlab::CmdResult& result, const CommonOpts& opts) {
  if (!opts.out_path.empty()) {
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write report to " << opts.out_path << "\n";
      return csetlab::kExitUsage;
    }
    out << result.report_json;
  } else if (!opts.quiet) {
    std::cout << result.report_json;
  }
  if (!opts.quiet && !result.summary.empty()) std::cerr << result.summary;
  return result.exit_code;
}

int run_subcommand(const std::string& expected_command, const CommonOpts& opts) {
  auto text = read_file(opts.scenario_path);
  if (!text) {
    std::cerr << "error: cannot read " << opts.scenario_path << "\n";
    return csetlab::kExitUsage;
  }
  if (expected_command == "replay") {
    return emit(csetlab::cmd_replay(*text), opts);
  }
  try {
    csetlab::Scenario scenario = csetlab::parse_scenario(*text);
    if (scenario.command != expected_command) {
      std::cerr << "error: scenario file is for command '" << scenario.command
                << "', not '" << expected_command << "'\n";
      return csetlab::kExitUsage;
    }
  } catch (const csetlab::scenario_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return csetlab::kExitUsage;
  }
  csetlab::CmdOverrides overrides{opts.seed, opts.max_steps};
  return emit(csetlab::dispatch_scenario(*text, overrides), opts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "csetlab: wait-free consensus and test-and-set protocols over consistent-set objects,\n"
      "verified by exhaustive interleaving enumeration, with executable impossibility adversaries"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    const char* scenario_help;
  };
  const Sub subs[] = {
      {"check", "model-check a protocol scenario over all interleavings",
       "scenario file (command: check)"},
      {"interleave", "build and verify indistinguishable interleavings of solo traces",
       "scenario file (command: interleave)"},
      {"lockstep", "signature extraction, pigeonhole pair selection, lock-step double-win",
       "scenario file (command: lockstep)"},
      {"validate-f", "brute-force the selector consistency properties",
       "scenario file (command: validate-f)"},
      {"replay", "re-run an archived report and verify it reproduces", "report file to replay"},
  };

  int exit_code = csetlab::kExitUsage;
  for (const Sub& sub : subs) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
    auto opts = std::make_shared<CommonOpts>();
    add_common(cmd, *opts, sub.scenario_help);
    std::string name = sub.name;
    cmd->callback([&exit_code, name, opts] { exit_code = run_subcommand(name, *opts); });
  }

  CLI11_PARSE(app, argc, argv);
  return exit_code;
}
