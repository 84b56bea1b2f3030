#include "csetlab/scenario.hpp"

#include <set>

#include "csetlab/errors.hpp"
#include "json.hpp"

namespace csetlab {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& context) {
  if (!j.is_object()) throw scenario_error(context + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.contains(key)) {
      throw scenario_error("unknown field '" + key + "' in " + context);
    }
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw scenario_error("field '" + key + "' has the wrong type");
  }
}

template <typename T>
T get_required(const json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key)) throw scenario_error("missing field '" + key + "' in " + context);
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw scenario_error("field '" + key + "' has the wrong type");
  }
}

std::vector<TraceOpSpec> parse_trace_ops(const json& arr, const std::string& context) {
  if (!arr.is_array()) throw scenario_error(context + " must be an array of steps");
  std::vector<TraceOpSpec> ops;
  for (const json& step : arr) {
    check_keys(step, {"op", "payload"}, context + " step");
    TraceOpSpec spec;
    spec.op = get_required<std::string>(step, "op", context);
    if (spec.op != "insert" && spec.op != "remove") {
      throw scenario_error(context + " step op must be 'insert' or 'remove'");
    }
    spec.payload = get_or<std::int64_t>(step, "payload", 0);
    ops.push_back(spec);
  }
  return ops;
}

CheckScenario parse_check(const json& j) {
  check_keys(j,
             {"schema", "command", "seed", "max_steps", "protocol", "selector", "initial_items",
              "objects", "inputs", "lucky_payload", "n", "builder", "mode", "random_schedules",
              "properties", "dedup"},
             "check scenario");
  CheckScenario s;
  s.protocol = get_required<std::string>(j, "protocol", "check scenario");
  s.selector = get_or<std::string>(j, "selector", s.selector);
  s.initial_items = get_or<std::vector<std::int64_t>>(j, "initial_items", {});
  s.inputs = get_or<std::vector<std::int64_t>>(j, "inputs", {});
  if (j.contains("lucky_payload")) {
    s.lucky_payload = get_required<std::int64_t>(j, "lucky_payload", "check scenario");
  }
  s.n = get_or<int>(j, "n", s.n);
  s.builder = get_or<std::string>(j, "builder", s.builder);
  s.mode = get_or<std::string>(j, "mode", s.mode);
  if (s.mode != "exhaustive" && s.mode != "random") {
    throw scenario_error("mode must be 'exhaustive' or 'random'");
  }
  s.random_schedules = get_or<std::uint64_t>(j, "random_schedules", s.random_schedules);
  s.properties = get_or<std::vector<std::string>>(j, "properties", {});
  s.dedup = get_or<bool>(j, "dedup", true);
  if (j.contains("objects")) {
    const json& arr = j.at("objects");
    if (!arr.is_array()) throw scenario_error("objects must be an array");
    for (const json& obj : arr) {
      check_keys(obj, {"selector", "items"}, "object spec");
      ObjectSpec spec;
      spec.selector = get_required<std::string>(obj, "selector", "object spec");
      spec.items = get_or<std::vector<std::int64_t>>(obj, "items", {});
      s.objects.push_back(std::move(spec));
    }
  }
  return s;
}

InterleaveScenario parse_interleave(const json& j) {
  check_keys(j, {"schema", "command", "seed", "max_steps", "selector", "traces", "generator"},
             "interleave scenario");
  InterleaveScenario s;
  s.selector = get_or<std::string>(j, "selector", s.selector);
  if (j.contains("traces")) {
    const json& traces = j.at("traces");
    check_keys(traces, {"e0", "e1"}, "traces");
    s.trace0 = parse_trace_ops(traces.at("e0"), "traces.e0");
    s.trace1 = parse_trace_ops(traces.at("e1"), "traces.e1");
  }
  if (j.contains("generator")) {
    const json& gen = j.at("generator");
    check_keys(gen, {"pairs", "max_len", "selectors", "mute_free"}, "interleave generator");
    InterleaveGenerator g;
    g.pairs = get_or<int>(gen, "pairs", g.pairs);
    g.max_len = get_or<int>(gen, "max_len", g.max_len);
    g.selectors = get_or<std::vector<std::string>>(gen, "selectors", g.selectors);
    g.mute_free = get_or<bool>(gen, "mute_free", g.mute_free);
    s.generator = std::move(g);
  }
  if (!s.generator && !s.trace0) {
    throw scenario_error("interleave scenario needs either traces or a generator");
  }
  return s;
}

LockstepScenario parse_lockstep(const json& j) {
  check_keys(j,
             {"schema", "command", "seed", "max_steps", "kind", "isolation_bound", "candidates",
              "generator"},
             "lockstep scenario");
  LockstepScenario s;
  s.kind = get_or<std::string>(j, "kind", s.kind);
  if (s.kind != "queue" && s.kind != "stack") {
    throw scenario_error("kind must be 'queue' or 'stack'");
  }
  s.isolation_bound = get_or<int>(j, "isolation_bound", s.isolation_bound);
  if (j.contains("candidates")) {
    const json& arr = j.at("candidates");
    if (!arr.is_array()) throw scenario_error("candidates must be an array");
    for (const json& cand : arr) {
      check_keys(cand, {"name", "ops"}, "candidate");
      CandidateScript script;
      script.name = get_or<std::string>(cand, "name",
                                        "c" + std::to_string(s.candidates.size()));
      const json& ops = cand.at("ops");
      if (!ops.is_array()) throw scenario_error("candidate ops must be an array");
      for (const json& op : ops) {
        check_keys(op, {"op", "object", "payload"}, "candidate op");
        const auto kind = get_required<std::string>(op, "op", "candidate op");
        if (kind != "insert" && kind != "remove") {
          throw scenario_error("candidate op must be 'insert' or 'remove'");
        }
        script.ops.push_back(ScriptOp{kind == "insert",
                                      get_required<std::string>(op, "object", "candidate op"),
                                      get_or<std::int64_t>(op, "payload", 0)});
      }
      s.candidates.push_back(std::move(script));
    }
  }
  if (j.contains("generator")) {
    const json& gen = j.at("generator");
    check_keys(gen, {"count", "shared_objects", "pattern_space"}, "lockstep generator");
    LockstepGenerator g;
    g.count = get_or<int>(gen, "count", g.count);
    g.shared_objects = get_or<int>(gen, "shared_objects", g.shared_objects);
    g.pattern_space = get_or<int>(gen, "pattern_space", g.pattern_space);
    s.generator = g;
  }
  if (!s.generator && s.candidates.empty()) {
    throw scenario_error("lockstep scenario needs either candidates or a generator");
  }
  return s;
}

ValidateFScenario parse_validate_f(const json& j) {
  check_keys(j, {"schema", "command", "seed", "max_steps", "selector", "universe", "max_len"},
             "validate-f scenario");
  ValidateFScenario s;
  s.selector = get_required<std::string>(j, "selector", "validate-f scenario");
  s.universe = get_or<std::vector<std::int64_t>>(j, "universe", s.universe);
  s.max_len = get_or<int>(j, "max_len", s.max_len);
  return s;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw scenario_error(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw scenario_error("scenario must be a JSON object");

  Scenario scenario;
  scenario.schema = get_required<int>(j, "schema", "scenario");
  if (scenario.schema != 1) throw scenario_error("unsupported schema version");
  scenario.command = get_required<std::string>(j, "command", "scenario");
  scenario.seed = get_or<std::uint64_t>(j, "seed", kDefaultSeed);
  scenario.max_steps = get_or<int>(j, "max_steps", kDefaultMaxSteps);
  if (scenario.max_steps < 1) throw scenario_error("max_steps must be positive");

  if (scenario.command == "check") {
    scenario.check = parse_check(j);
  } else if (scenario.command == "interleave") {
    scenario.interleave = parse_interleave(j);
  } else if (scenario.command == "lockstep") {
    scenario.lockstep = parse_lockstep(j);
  } else if (scenario.command == "validate-f") {
    scenario.validate_f = parse_validate_f(j);
  } else {
    throw scenario_error("unknown command '" + scenario.command + "'");
  }
  return scenario;
}

std::string scenario_to_json(const Scenario& scenario) {
  json j;
  j["schema"] = scenario.schema;
  j["command"] = scenario.command;
  j["seed"] = scenario.seed;
  j["max_steps"] = scenario.max_steps;

  if (scenario.check) {
    const CheckScenario& s = *scenario.check;
    j["protocol"] = s.protocol;
    j["selector"] = s.selector;
    j["initial_items"] = s.initial_items;
    j["inputs"] = s.inputs;
    if (s.lucky_payload) j["lucky_payload"] = *s.lucky_payload;
    j["n"] = s.n;
    j["builder"] = s.builder;
    j["mode"] = s.mode;
    j["random_schedules"] = s.random_schedules;
    j["properties"] = s.properties;
    j["dedup"] = s.dedup;
    if (!s.objects.empty()) {
      json arr = json::array();
      for (const ObjectSpec& spec : s.objects) {
        arr.push_back(json{{"selector", spec.selector}, {"items", spec.items}});
      }
      j["objects"] = std::move(arr);
    }
  }
  if (scenario.interleave) {
    const InterleaveScenario& s = *scenario.interleave;
    j["selector"] = s.selector;
    if (s.trace0) {
      auto render = [](const std::vector<TraceOpSpec>& ops) {
        json arr = json::array();
        for (const TraceOpSpec& op : ops) {
          arr.push_back(json{{"op", op.op}, {"payload", op.payload}});
        }
        return arr;
      };
      j["traces"] = json{{"e0", render(*s.trace0)}, {"e1", render(*s.trace1)}};
    }
    if (s.generator) {
      j["generator"] = json{{"pairs", s.generator->pairs},
                            {"max_len", s.generator->max_len},
                            {"selectors", s.generator->selectors},
                            {"mute_free", s.generator->mute_free}};
    }
  }
  if (scenario.lockstep) {
    const LockstepScenario& s = *scenario.lockstep;
    j["kind"] = s.kind;
    j["isolation_bound"] = s.isolation_bound;
    if (!s.candidates.empty()) {
      json arr = json::array();
      for (const CandidateScript& script : s.candidates) {
        json ops = json::array();
        for (const ScriptOp& op : script.ops) {
          ops.push_back(json{{"op", op.is_insert ? "insert" : "remove"},
                             {"object", op.object},
                             {"payload", op.payload}});
        }
        arr.push_back(json{{"name", script.name}, {"ops", std::move(ops)}});
      }
      j["candidates"] = std::move(arr);
    }
    if (s.generator) {
      j["generator"] = json{{"count", s.generator->count},
                            {"shared_objects", s.generator->shared_objects},
                            {"pattern_space", s.generator->pattern_space}};
    }
  }
  if (scenario.validate_f) {
    const ValidateFScenario& s = *scenario.validate_f;
    j["selector"] = s.selector;
    j["universe"] = s.universe;
    j["max_len"] = s.max_len;
  }
  return j.dump(2);
}

}  // namespace csetlab
