#include "csetlab/commands.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "csetlab/adversary.hpp"
#include "csetlab/errors.hpp"
#include "csetlab/protocols.hpp"
#include "json.hpp"

namespace csetlab {

namespace {

using nlohmann::json;

json base_report(const Scenario& scenario) {
  json report;
  report["schema"] = 1;
  report["tool"] = "csetlab";
  report["version"] = kToolVersion;
  report["command"] = scenario.command;
  report["seed"] = scenario.seed;
  report["scenario"] = json::parse(scenario_to_json(scenario));
  return report;
}

CmdResult finish(json report, int exit_code, std::string summary) {
  report["exit_code"] = exit_code;
  return CmdResult{exit_code, report.dump(2) + "\n", std::move(summary)};
}

CmdResult usage_failure(const std::string& message) {
  json report;
  report["schema"] = 1;
  report["tool"] = "csetlab";
  report["version"] = kToolVersion;
  report["error"] = message;
  report["exit_code"] = kExitUsage;
  return CmdResult{kExitUsage, report.dump(2) + "\n", "error: " + message};
}

json item_json(const Item& item) {
  json j;
  switch (item.tag) {
    case ItemTag::Initial:
      j["tag"] = "initial";
      break;
    case ItemTag::Marker:
      j["tag"] = "marker";
      j["prefix"] = item.marker_prefix;
      break;
    case ItemTag::Value:
      j["tag"] = "value";
      break;
  }
  j["payload"] = item.payload;
  j["uid"] = item.uid;
  return j;
}

json trace_json(const std::vector<StepRecord>& steps) {
  json arr = json::array();
  for (const StepRecord& record : steps) {
    arr.push_back(json{{"pid", record.pid},
                       {"action", describe(record.action)},
                       {"response", describe(record.response)}});
  }
  return arr;
}

json counterexample_json(const ProtocolProgram& program, const Counterexample& ce) {
  json j;
  j["schedule"] = ce.schedule;
  j["detail"] = ce.detail;
  json traces = json::array();
  RunResult replay = run(program, ce.schedule);
  for (const auto& trace : replay.traces) traces.push_back(trace_json(trace));
  j["traces"] = std::move(traces);
  return j;
}

std::string outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::Pass:
      return "pass";
    case Outcome::Fail:
      return "fail";
    case Outcome::Inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

json solo_trace_json(const SoloTrace& trace) {
  json arr = json::array();
  for (const SoloOp& op : trace.steps) {
    if (const auto* ins = std::get_if<SoloInsert>(&op)) {
      arr.push_back(json{{"op", "insert"}, {"item", item_json(ins->item)}});
    } else {
      const auto& rem = std::get<SoloRemove>(op);
      arr.push_back(json{{"op", "remove"},
                         {"response", rem.response ? item_json(*rem.response) : json(nullptr)}});
    }
  }
  return arr;
}

Selector selector_for_protocols(const std::string& name) {
  const auto& allowed = Selector::consistent_builtin_names();
  if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
    throw scenario_error("selector '" + name + "' is not a consistent built-in selector");
  }
  return *Selector::by_name(name);
}

ConsistentSet build_object(const std::string& selector_name,
                           const std::vector<std::int64_t>& payloads, UidAllocator& uids) {
  std::vector<Item> items;
  items.reserve(payloads.size());
  for (std::int64_t payload : payloads) items.push_back(initial_item(payload, uids));
  return ConsistentSet(selector_for_protocols(selector_name), std::move(items));
}

ProtocolProgram build_check_program(const CheckScenario& s, UidAllocator& uids) {
  auto need_inputs = [&](const char* what) {
    if (s.inputs.size() != 2) {
      throw scenario_error(std::string(what) + " needs exactly two inputs");
    }
  };
  if (s.protocol == "consensus2-registers" || s.protocol == "consensus2-registers-broken") {
    need_inputs("the register consensus protocol");
    ConsistentSet object = build_object(s.selector, s.initial_items, uids);
    return s.protocol == "consensus2-registers"
               ? consensus2_registers(s.inputs[0], s.inputs[1], std::move(object), uids)
               : consensus2_registers_broken(s.inputs[0], s.inputs[1], std::move(object), uids);
  }
  if (s.protocol == "consensus2-two-objects") {
    need_inputs("the two-object consensus protocol");
    if (s.objects.size() != 2) {
      throw scenario_error("the two-object consensus protocol needs exactly two object specs");
    }
    ConsistentSet o0 = build_object(s.objects[0].selector, s.objects[0].items, uids);
    ConsistentSet o1 = build_object(s.objects[1].selector, s.objects[1].items, uids);
    return consensus2_two_objects(s.inputs[0], s.inputs[1], std::move(o0), std::move(o1), uids);
  }
  if (s.protocol == "tas-lucky") {
    if (!s.lucky_payload) throw scenario_error("tas-lucky needs a lucky_payload");
    ConsistentSet object = build_object(s.selector, s.initial_items, uids);
    std::uint64_t w = find_unique_payload(object, *s.lucky_payload);
    return tas_lucky(s.n, std::move(object), w);
  }
  if (s.protocol == "consensus2-queue-lucky") {
    need_inputs("the lucky-queue consensus protocol");
    if (!s.lucky_payload) throw scenario_error("consensus2-queue-lucky needs a lucky_payload");
    ConsistentSet object = build_object(s.selector, s.initial_items, uids);
    std::uint64_t w = find_unique_payload(object, *s.lucky_payload);
    return consensus2_queue_lucky(s.inputs[0], s.inputs[1], std::move(object), w, uids);
  }
  if (s.protocol == "tournament-tas") {
    TournamentBuilder builder;
    if (s.builder == "two-objects") {
      builder = TournamentBuilder::TwoObjects;
    } else if (s.builder == "set-plus-registers") {
      builder = TournamentBuilder::SetPlusRegisters;
    } else {
      throw scenario_error("builder must be 'two-objects' or 'set-plus-registers'");
    }
    // Full enumeration is only tractable for small trees; larger instances
    // go through seeded random schedules.
    const int bound = s.mode == "exhaustive" ? 4 : 16;
    if (s.n > bound) {
      throw scenario_error("tournament n is bounded at " + std::to_string(bound) + " in " +
                           s.mode + " mode");
    }
    return tournament_tas(s.n, builder, selector_for_protocols(s.selector), uids, bound);
  }
  throw scenario_error("unknown protocol '" + s.protocol + "'");
}

std::vector<PropertyId> requested_properties(const CheckScenario& s,
                                             const ProtocolProgram& program) {
  if (s.properties.empty()) return default_properties(program);
  std::vector<PropertyId> properties;
  for (const std::string& name : s.properties) {
    auto id = property_by_name(name);
    if (!id) throw scenario_error("unknown property '" + name + "'");
    properties.push_back(*id);
  }
  return properties;
}

}  // namespace

CmdResult cmd_check(const Scenario& scenario) {
  const CheckScenario& s = *scenario.check;
  UidAllocator uids;
  ProtocolProgram program = build_check_program(s, uids);
  std::vector<PropertyId> properties = requested_properties(s, program);

  json report = base_report(scenario);
  report["protocol"] = program.name();
  report["mode"] = s.mode;
  std::ostringstream summary;
  int exit_code = kExitPass;

  if (s.mode == "exhaustive") {
    CheckBounds bounds{scenario.max_steps, s.dedup};
    std::vector<Verdict> verdicts = check_all_interleavings(program, properties, bounds);
    json arr = json::array();
    for (const Verdict& v : verdicts) {
      json vj;
      vj["property"] = property_name(v.property);
      vj["outcome"] = outcome_name(v.outcome);
      vj["explored_states"] = v.explored_states;
      vj["explored_schedules"] = v.explored_schedules;
      vj["max_steps_observed"] = v.max_steps_observed;
      vj["fully_explored"] = v.fully_explored;
      if (v.counterexample) vj["counterexample"] = counterexample_json(program, *v.counterexample);
      arr.push_back(std::move(vj));

      if (v.outcome == Outcome::Fail) {
        exit_code = kExitFail;
      } else if (v.outcome == Outcome::Inconclusive && exit_code == kExitPass) {
        exit_code = kExitInconclusive;
      }
      summary << outcome_name(v.outcome) << " " << property_name(v.property) << " ("
              << v.explored_schedules << " schedules, " << v.explored_states << " states, max "
              << v.max_steps_observed << " steps)\n";
    }
    report["verdicts"] = std::move(arr);
  } else {
    RandomCheckResult result =
        check_random_schedules(program, properties, s.random_schedules, scenario.seed,
                               std::max(scenario.max_steps, 256));
    json rj;
    rj["schedules_run"] = result.schedules_run;
    rj["max_steps_observed"] = result.max_steps_observed;
    if (result.inconclusive) {
      rj["outcome"] = "inconclusive";
      exit_code = kExitInconclusive;
    } else if (result.failure) {
      rj["outcome"] = "fail";
      rj["failed_property"] = property_name(*result.failed_property);
      rj["counterexample"] = counterexample_json(program, *result.failure);
      exit_code = kExitFail;
    } else {
      rj["outcome"] = "pass";
    }
    summary << rj["outcome"].get<std::string>() << " random check (" << result.schedules_run
            << " schedules)\n";
    report["random"] = std::move(rj);
  }
  return finish(std::move(report), exit_code, summary.str());
}

namespace {

SoloTrace build_trace(const Selector& selector, const std::vector<TraceOpSpec>& ops,
                      UidAllocator& uids) {
  TraceBuilder builder(selector);
  for (const TraceOpSpec& op : ops) {
    if (op.op == "insert") {
      builder.insert(value_item(op.payload, 0, uids));
    } else {
      builder.remove();
    }
  }
  return builder.take();
}

json coverage_json(const CaseCounts& cases) {
  return json{{"base", cases.base},
              {"removal-free", cases.removal_free},
              {"mute", cases.mute},
              {"barrier", cases.barrier},
              {"pqr", cases.pqr}};
}

}  // namespace

CmdResult cmd_interleave(const Scenario& scenario) {
  const InterleaveScenario& s = *scenario.interleave;
  json report = base_report(scenario);
  std::ostringstream summary;

  // Gate: the selector must pass consistency validation before the
  // construction is meaningful at all.
  auto gate_selector = [&](const std::string& name) -> Selector {
    auto selector = Selector::by_name(name);
    if (!selector) throw scenario_error("unknown selector '" + name + "'");
    UidAllocator uids;
    std::vector<Item> universe;
    for (std::int64_t p = 0; p < 5; ++p) universe.push_back(initial_item(p, uids));
    SelectorVerdict verdict = validate_selector(*selector, universe, 4);
    if (!verdict.pass) {
      throw scenario_error("selector '" + name + "' fails consistency validation; refusing");
    }
    return *selector;
  };

  CaseCounts coverage;
  json runs = json::array();
  std::uint64_t pair_count = 0;
  std::uint64_t violations = 0;
  std::string first_violation;

  auto run_pair = [&](const SoloTrace& e0, const SoloTrace& e1, bool emit_run) {
    ++pair_count;
    json entry;
    entry["selector"] = e0.selector.name();
    entry["lengths"] = json::array({e0.size(), e1.size()});
    try {
      InterleaveResult result = interleave_single_set(e0, e1);
      coverage += result.cases;
      IndistinguishabilityVerdict verdict = verify_indistinguishable(result.schedule, e0, e1);
      entry["case"] = interleave_case_name(result.top_case);
      entry["cases"] = coverage_json(result.cases);
      entry["schedule"] = result.schedule;
      entry["verified"] = verdict.pass;
      if (!verdict.pass) {
        ++violations;
        if (first_violation.empty()) first_violation = verdict.detail;
        entry["detail"] = verdict.detail;
      }
    } catch (const theorem_violation& e) {
      ++violations;
      if (first_violation.empty()) first_violation = e.what();
      entry["verified"] = false;
      entry["detail"] = e.what();
      entry["e0"] = solo_trace_json(e0);
      entry["e1"] = solo_trace_json(e1);
      emit_run = true;
    }
    if (emit_run) runs.push_back(std::move(entry));
  };

  if (s.trace0) {
    Selector selector = gate_selector(s.selector);
    UidAllocator uids;
    SoloTrace e0 = build_trace(selector, *s.trace0, uids);
    SoloTrace e1 = build_trace(selector, *s.trace1, uids);
    report["e0"] = solo_trace_json(e0);
    report["e1"] = solo_trace_json(e1);
    run_pair(e0, e1, true);
  }
  if (s.generator) {
    std::mt19937_64 rng(scenario.seed);
    std::vector<Selector> selectors;
    for (const std::string& name : s.generator->selectors) selectors.push_back(gate_selector(name));
    TraceGenConfig config;
    config.max_len = s.generator->max_len;
    config.forbid_mute_prefix = s.generator->mute_free;
    for (int i = 0; i < s.generator->pairs; ++i) {
      const Selector& selector = selectors[static_cast<std::size_t>(i) % selectors.size()];
      UidAllocator uids;
      SoloTrace e0 = random_trace(selector, uids, rng, config);
      SoloTrace e1 = random_trace(selector, uids, rng, config);
      run_pair(e0, e1, false);
    }
  }

  json results;
  results["pairs"] = pair_count;
  results["violations"] = violations;
  results["coverage"] = coverage_json(coverage);
  if (!runs.empty()) results["runs"] = std::move(runs);
  report["results"] = std::move(results);

  const int exit_code = violations == 0 ? kExitPass : kExitFail;
  summary << (violations == 0 ? "pass" : "fail") << " interleave (" << pair_count << " pairs, "
          << violations << " violations)\n";
  if (violations != 0) summary << first_violation << "\n";
  return finish(std::move(report), exit_code, summary.str());
}

CmdResult cmd_lockstep(const Scenario& scenario) {
  const LockstepScenario& s = *scenario.lockstep;
  const ObjectKind kind = s.kind == "queue" ? ObjectKind::Queue : ObjectKind::Stack;

  std::vector<CandidateScript> family = s.candidates;
  if (s.generator) {
    std::vector<CandidateScript> generated = generate_candidate_family(
        s.generator->count, s.generator->shared_objects, s.generator->pattern_space,
        scenario.seed);
    family.insert(family.end(), generated.begin(), generated.end());
  }

  json report = base_report(scenario);
  report["kind"] = s.kind;
  std::ostringstream summary;

  SignatureExtraction extraction = extract_signatures(family, kind, s.isolation_bound);
  json sigs = json::array();
  for (const Signature& sig : extraction.signatures) {
    json steps = json::array();
    for (const SigStep& step : sig.steps) {
      steps.push_back((step.is_insert ? "insert " : "remove ") + step.object);
    }
    sigs.push_back(json{{"candidate", sig.candidate},
                        {"name", family[static_cast<std::size_t>(sig.candidate)].name},
                        {"steps", std::move(steps)},
                        {"footprint", std::vector<std::string>(sig.footprint.begin(),
                                                               sig.footprint.end())}});
  }
  report["signatures"] = std::move(sigs);
  json violations = json::array();
  for (const IsolationViolation& v : extraction.violations) {
    violations.push_back(json{{"candidate", v.candidate}, {"reason", v.reason}});
  }
  report["isolation_violations"] = std::move(violations);

  std::optional<ConflictPair> pair = select_conflict_pair(extraction.signatures);
  if (!pair) {
    report["pair"] = nullptr;
    report["outcome"] = "not-found";
    summary << "not-found: no two candidates share their restricted step pattern ("
            << extraction.signatures.size() << " signatures)\n";
    return finish(std::move(report), kExitInconclusive, summary.str());
  }

  auto signature_of = [&extraction](int candidate) -> const Signature& {
    for (const Signature& sig : extraction.signatures) {
      if (sig.candidate == candidate) return sig;
    }
    throw contract_error("conflict pair references a missing signature");
  };
  const Signature& sig_p = signature_of(pair->p);
  const Signature& sig_q = signature_of(pair->q);

  LockstepCertificate cert =
      run_lockstep(family[static_cast<std::size_t>(pair->p)],
                   family[static_cast<std::size_t>(pair->q)], sig_p, sig_q, kind);

  report["pair"] = json{{"p", pair->p}, {"q", pair->q}, {"shared", pair->shared_objects}};
  report["schedule"] = cert.schedule;
  if (kind == ObjectKind::Stack) report["remove_order"] = "reversed";
  report["double_win"] = cert.double_win;
  report["detail"] = cert.detail;
  json traces = json::array();
  for (const auto& trace : cert.traces) traces.push_back(trace_json(trace));
  report["traces"] = std::move(traces);
  report["outcome"] = cert.double_win ? "double-win" : "construction-failure";

  summary << (cert.double_win ? "pass" : "fail") << " lockstep: " << cert.detail << "\n";
  return finish(std::move(report), cert.double_win ? kExitPass : kExitFail, summary.str());
}

CmdResult cmd_validate_f(const Scenario& scenario) {
  const ValidateFScenario& s = *scenario.validate_f;
  auto selector = Selector::by_name(s.selector);
  if (!selector) throw scenario_error("unknown selector '" + s.selector + "'");

  UidAllocator uids;
  std::vector<Item> universe;
  for (std::int64_t payload : s.universe) universe.push_back(initial_item(payload, uids));

  SelectorVerdict verdict = validate_selector(*selector, universe, s.max_len);

  json report = base_report(scenario);
  report["selector"] = s.selector;
  report["pass"] = verdict.pass;
  report["sequences_checked"] = verdict.sequences_checked;
  std::ostringstream summary;
  if (verdict.pass) {
    summary << "pass validate-f: selector '" << s.selector << "' is consistent over "
            << verdict.sequences_checked << " sequences\n";
  } else {
    const SelectorViolation& v = *verdict.violation;
    json witness;
    witness["pair"] = json::array({item_json(v.pair_earlier), item_json(v.pair_later)});
    auto seq_json = [](const std::vector<Item>& seq) {
      json arr = json::array();
      for (const Item& item : seq) arr.push_back(item_json(item));
      return arr;
    };
    witness["first_sequence"] = seq_json(v.first_sequence);
    witness["first_winner"] = item_json(v.first_winner);
    witness["second_sequence"] = seq_json(v.second_sequence);
    witness["second_winner"] = item_json(v.second_winner);
    witness["detail"] = v.detail;
    report["witness"] = std::move(witness);
    summary << "fail validate-f: " << v.detail << "\n";
  }
  return finish(std::move(report), verdict.pass ? kExitPass : kExitFail, summary.str());
}

CmdResult cmd_replay(const std::string& report_json) {
  json original;
  try {
    original = json::parse(report_json);
  } catch (const json::exception& e) {
    return usage_failure(std::string("report is not valid JSON: ") + e.what());
  }
  if (!original.is_object() || !original.contains("scenario")) {
    return usage_failure("report has no embedded scenario to replay");
  }

  CmdResult rerun = dispatch_scenario(original.at("scenario").dump());
  if (rerun.exit_code == kExitUsage) return rerun;

  const std::string canonical_original = original.dump(2) + "\n";
  const bool reproduced = canonical_original == rerun.report_json;

  json report;
  report["schema"] = 1;
  report["tool"] = "csetlab";
  report["version"] = kToolVersion;
  report["command"] = "replay";
  report["reproduced"] = reproduced;
  report["replayed_exit_code"] = rerun.exit_code;
  const int exit_code = reproduced ? kExitPass : kExitFail;
  report["exit_code"] = exit_code;
  std::string summary = reproduced
                            ? "pass replay: report reproduced byte for byte\n"
                            : "fail replay: regenerated report differs from the archived one\n";
  return CmdResult{exit_code, report.dump(2) + "\n", std::move(summary)};
}

CmdResult dispatch_scenario(const std::string& scenario_json, const CmdOverrides& overrides) {
  Scenario scenario;
  try {
    scenario = parse_scenario(scenario_json);
    if (overrides.seed) scenario.seed = *overrides.seed;
    if (overrides.max_steps) scenario.max_steps = *overrides.max_steps;
    if (scenario.command == "check") return cmd_check(scenario);
    if (scenario.command == "interleave") return cmd_interleave(scenario);
    if (scenario.command == "lockstep") return cmd_lockstep(scenario);
    if (scenario.command == "validate-f") return cmd_validate_f(scenario);
    return usage_failure("unknown command '" + scenario.command + "'");
  } catch (const scenario_error& e) {
    return usage_failure(e.what());
  } catch (const config_error& e) {
    return usage_failure(e.what());
  } catch (const std::exception& e) {
    return usage_failure(std::string("internal error: ") + e.what());
  }
}

}  // namespace csetlab
