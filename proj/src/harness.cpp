#include "agentcollab/harness.hpp"

#include <algorithm>
#include <cctype>

#include "agentcollab/error.hpp"

namespace agentcollab {

std::string_view to_string(EndedBy e) noexcept {
  switch (e) {
    case EndedBy::stop_token: return "stop_token";
    case EndedBy::turn_cap: return "turn_cap";
    case EndedBy::error: return "error";
  }
  return "error";
}

EndedBy ended_by_from_string(std::string_view s) {
  if (s == "stop_token") return EndedBy::stop_token;
  if (s == "turn_cap") return EndedBy::turn_cap;
  if (s == "error") return EndedBy::error;
  fail(ErrorCode::SchemaViolation, "unknown ended_by value " + std::string(s));
}

Json trajectory_summary_json(const Trajectory& t) {
  Json j{{"session_id", t.session_id},
         {"scenario_id", t.scenario_id},
         {"user_turns", t.user_turns},
         {"ended_by", to_string(t.ended_by)},
         {"events", t.events.size()}};
  if (!t.error.empty()) j["error"] = t.error;
  return j;
}

void write_trajectory(const std::filesystem::path& dir, const Trajectory& t) {
  write_text_file(dir / "trajectory.jsonl", write_event_log(t.events));
  write_text_file(dir / "session.json", trajectory_summary_json(t).dump(2) + "\n");
}

Trajectory read_trajectory(const std::filesystem::path& dir) {
  auto meta = read_json_file(dir / "session.json");
  auto path = (dir / "session.json").string();
  Trajectory t;
  t.session_id = require_string(meta, "session_id", path);
  t.scenario_id = require_string(meta, "scenario_id", path);
  t.user_turns = static_cast<int>(optional_number(meta, "user_turns", path, 0));
  t.ended_by = ended_by_from_string(require_string(meta, "ended_by", path));
  t.error = optional_string(meta, "error", path, "");
  t.events = read_event_log(dir / "trajectory.jsonl");
  return t;
}

std::vector<ChatTurn> user_view(const std::vector<TrajectoryEvent>& events) {
  std::vector<ChatTurn> out;
  for (const auto& e : events) {
    if (!is_user_visible(e)) continue;
    out.push_back({e.sender == kUserAgent ? Role::assistant : Role::user, e.content});
  }
  return out;
}

std::string user_simulator_prompt(const Scenario& scenario) {
  std::string p =
      "You are role-playing a user who talks to an assistant. Use only the facts below. "
      "Answer the assistant's questions from the background, and keep asking until your "
      "goals are met.\n\nGoals:\n";
  for (const auto& g : scenario.goals) p += "* " + g + "\n";
  p += "\nBackground:\n";
  for (const auto& b : scenario.background) p += "* " + b + "\n";
  p += "\nWhen every goal has been handled, or the assistant cannot help any further, reply "
       "with " + std::string(kStopToken) + ".";
  return p;
}

UserTurn simulate_user(ModelBackend& backend, const Scenario& scenario,
                       const std::vector<TrajectoryEvent>& events, std::uint64_t seed) {
  ModelRequest req;
  req.caller = "user_simulator";
  req.system_prompt = user_simulator_prompt(scenario);
  req.seed = seed;
  req.messages.push_back({Role::user, "The assistant is ready. Start the conversation."});
  for (auto& turn : user_view(events)) req.messages.push_back(std::move(turn));
  auto resp = invoke(backend, req);
  if (resp.kind != ResponseKind::text) {
    fail(ErrorCode::MalformedToolCall, "user simulator answered with tool calls");
  }
  if (resp.text->find(kStopToken) != std::string::npos) return {true, ""};
  return {false, *resp.text};
}

namespace {

bool type_matches(const Json& value, const std::string& type) {
  if (type == "string") return value.is_string();
  if (type == "number") return value.is_number();
  if (type == "integer") return value.is_number_integer();
  if (type == "boolean") return value.is_boolean();
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  return true;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool json_subset(const Json& want, const Json& have) {
  if (want.is_string() && have.is_string()) {
    return lower(have.get<std::string>()).find(lower(want.get<std::string>())) != std::string::npos;
  }
  if (want.is_object() && have.is_object()) {
    for (const auto& [key, value] : want.items()) {
      auto it = have.find(key);
      if (it == have.end() || !json_subset(value, *it)) return false;
    }
    return true;
  }
  return want == have;
}

}  // namespace

void check_tool_arguments(const ToolSchema& schema, const ToolCall& call) {
  if (call.tool_name != schema.name) {
    fail(ErrorCode::UnknownTool, call.tool_name + " does not match schema " + schema.name);
  }
  if (!call.arguments.is_object()) {
    fail(ErrorCode::SchemaMismatch, call.tool_name + ": arguments must be an object");
  }
  for (const auto& p : schema.parameters) {
    auto it = call.arguments.find(p.name);
    if (it == call.arguments.end() || it->is_null()) {
      if (p.required) {
        fail(ErrorCode::SchemaMismatch, call.tool_name + ": missing argument " + p.name);
      }
      continue;
    }
    if (!type_matches(*it, p.type)) {
      fail(ErrorCode::SchemaMismatch,
           call.tool_name + ": argument " + p.name + " should be " + p.type);
    }
    if (!p.allowed_values.empty() && it->is_string() &&
        std::find(p.allowed_values.begin(), p.allowed_values.end(), it->get<std::string>()) ==
            p.allowed_values.end()) {
      fail(ErrorCode::SchemaMismatch,
           call.tool_name + ": argument " + p.name + " = " + it->dump() + " not allowed");
    }
  }
  for (const auto& [key, _] : call.arguments.items()) {
    if (schema.find_parameter(key) == nullptr) {
      fail(ErrorCode::SchemaMismatch, call.tool_name + ": unknown argument " + key);
    }
  }
}

ScriptedActionSimulator::ScriptedActionSimulator(const Json& fixtures) {
  if (fixtures.is_null()) return;
  require_object(fixtures, "$.actions");
  for (const auto& [tool, list] : fixtures.items()) {
    auto path = "$.actions." + tool;
    if (!list.is_array()) fail(ErrorCode::SchemaViolation, path + ": expected an array");
    auto& out = fixtures_[tool];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& item = list[i];
      auto p = path + "[" + std::to_string(i) + "]";
      require_object(item, p);
      Fixture f;
      if (auto m = item.find("match"); m != item.end()) {
        if (!m->is_object()) fail(ErrorCode::SchemaViolation, p + ".match: expected an object");
        f.match = *m;
      }
      const auto& result = require_field(item, "result", p);
      f.result = result.is_string() ? result.get<std::string>() : result.dump();
      f.latency_ms = static_cast<std::int64_t>(optional_number(item, "latency_ms", p, 0));
      f.error = optional_bool(item, "error", p, false);
      out.push_back(std::move(f));
    }
  }
}

ToolResult ScriptedActionSimulator::execute(const AgentId& agent, const ToolCall& call,
                                            const ToolSchema& schema) {
  check_tool_arguments(schema, call);
  ToolResult result{"no scripted result for " + call.tool_name + " " + call.arguments.dump(), true,
                    0};
  if (auto it = fixtures_.find(call.tool_name); it != fixtures_.end()) {
    for (const auto& f : it->second) {
      if (json_subset(f.match, call.arguments)) {
        result = ToolResult{f.result, f.error, f.latency_ms};
        break;
      }
    }
  }
  std::lock_guard lock(mutex_);
  log_.push_back({agent, call, result});
  return result;
}

std::vector<Invocation> ScriptedActionSimulator::invocations() const {
  std::lock_guard lock(mutex_);
  return log_;
}

ToolResult ModelActionSimulator::execute(const AgentId& agent, const ToolCall& call,
                                         const ToolSchema& schema) {
  check_tool_arguments(schema, call);
  std::vector<Invocation> past;
  {
    std::lock_guard lock(mutex_);
    for (const auto& inv : log_) {
      if (inv.call.tool_name == call.tool_name && inv.call.arguments == call.arguments) {
        auto repeat = inv.result;
        log_.push_back({agent, call, repeat});
        return repeat;
      }
    }
    past = log_;
  }
  ModelRequest req;
  req.caller = "action_simulator:" + agent;
  req.seed = seed_;
  req.system_prompt =
      "You simulate the tool described below. Reply with only the result the tool would "
      "return, as JSON where that is natural. Stay consistent with earlier results.\n\n"
      "Tool: " + schema.name + "\n" + schema.description;
  std::string body = "Earlier invocations:\n";
  if (past.empty()) body += "(none)\n";
  for (const auto& inv : past) {
    body += "- " + inv.call.tool_name + " " + inv.call.arguments.dump() + " -> " +
            inv.result.content + "\n";
  }
  body += "\nCall: " + call.tool_name + " " + call.arguments.dump();
  req.messages.push_back({Role::user, body});
  auto resp = invoke(backend_, req);
  if (resp.kind != ResponseKind::text) {
    fail(ErrorCode::MalformedToolCall, "action simulator answered with tool calls");
  }
  ToolResult result{*resp.text, false, resp.wall_time_ms};
  std::lock_guard lock(mutex_);
  log_.push_back({agent, call, result});
  return result;
}

std::vector<Invocation> ModelActionSimulator::invocations() const {
  std::lock_guard lock(mutex_);
  return log_;
}

Trajectory run_session(const Scenario& scenario, const AgentGraph& graph,
                       ModelBackend& agent_backend, ModelBackend& user_backend,
                       ActionExecutor* actions, const SessionConfig& config, int turn_cap) {
  Session session(scenario.scenario_id, graph, agent_backend, actions, config);
  Trajectory t;
  t.session_id = scenario.scenario_id;
  t.scenario_id = scenario.scenario_id;
  std::string utterance = scenario.input_problem;
  try {
    while (true) {
      ++t.user_turns;
      session.handle_user_message(utterance);
      if (t.user_turns >= turn_cap) {
        t.ended_by = EndedBy::turn_cap;
        break;
      }
      auto next = simulate_user(user_backend, scenario, session.events(), config.seed);
      if (next.stop) {
        t.ended_by = EndedBy::stop_token;
        break;
      }
      utterance = std::move(next.utterance);
    }
  } catch (const Error& e) {
    t.ended_by = EndedBy::error;
    t.error = e.what();
  }
  t.events = session.events();
  return t;
}

}  // namespace agentcollab
