#include "agentcollab/trajectory.hpp"

#include "agentcollab/error.hpp"

namespace agentcollab {

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::chat: return "chat";
    case EventKind::tool_call: return "tool_call";
    case EventKind::tool_result: return "tool_result";
    case EventKind::routing_relay: return "routing_relay";
    case EventKind::routing_decision: return "routing_decision";
    case EventKind::model_call: return "model_call";
  }
  return "chat";
}

EventKind event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::chat, EventKind::tool_call, EventKind::tool_result,
                 EventKind::routing_relay, EventKind::routing_decision, EventKind::model_call}) {
    if (to_string(k) == s) return k;
  }
  fail(ErrorCode::SchemaViolation, "unknown event kind '" + std::string(s) + "'");
}

Json event_to_json(const TrajectoryEvent& e) {
  Json j;
  j["session_id"] = e.session_id;
  j["seq"] = e.seq;
  j["turn"] = e.turn;
  j["kind"] = to_string(e.kind);
  j["start_ms"] = e.start_ms;
  j["end_ms"] = e.end_ms;
  j["agent"] = e.agent;
  j["sender"] = e.sender;
  j["recipient"] = e.recipient;
  j["content"] = e.content;
  j["output_token_count"] = e.output_token_count;
  if (!e.call_id.empty()) j["call_id"] = e.call_id;
  if (!e.tool_name.empty()) j["tool_name"] = e.tool_name;
  if (e.reply) j["reply"] = true;
  if (e.error) j["error"] = true;
  if (e.has_tool_calls) j["has_tool_calls"] = true;
  if (e.kind == EventKind::routing_decision || e.kind == EventKind::routing_relay) {
    j["layer"] = e.layer;
  }
  if (e.kind == EventKind::routing_decision) {
    j["decision"] = e.decision;
    j["confidence"] = e.confidence;
  }
  return j;
}

TrajectoryEvent event_from_json(const Json& j) {
  const std::string path = "$";
  TrajectoryEvent e;
  e.session_id = require_string(j, "session_id", path);
  e.seq = require_field(j, "seq", path).get<std::int64_t>();
  e.turn = require_field(j, "turn", path).get<int>();
  e.kind = event_kind_from_string(require_string(j, "kind", path));
  if (!j.contains("start_ms") || !j.contains("end_ms")) {
    fail(ErrorCode::MissingTimestamps, "event " + std::to_string(e.seq) + " lacks start/end");
  }
  e.start_ms = j.at("start_ms").get<std::int64_t>();
  e.end_ms = j.at("end_ms").get<std::int64_t>();
  e.agent = optional_string(j, "agent", path);
  e.sender = require_string(j, "sender", path);
  e.recipient = require_string(j, "recipient", path);
  e.content = optional_string(j, "content", path);
  e.output_token_count =
      static_cast<std::int64_t>(optional_number(j, "output_token_count", path, 0));
  e.call_id = optional_string(j, "call_id", path);
  e.tool_name = optional_string(j, "tool_name", path);
  e.reply = optional_bool(j, "reply", path, false);
  e.error = optional_bool(j, "error", path, false);
  e.has_tool_calls = optional_bool(j, "has_tool_calls", path, false);
  e.layer = static_cast<int>(optional_number(j, "layer", path, 0));
  e.decision = optional_string(j, "decision", path);
  e.confidence = optional_number(j, "confidence", path, 0.0);
  return e;
}

std::string write_event_log(const std::vector<TrajectoryEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += event_to_json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<TrajectoryEvent> parse_event_log(std::string_view text) {
  std::vector<TrajectoryEvent> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    try {
      out.push_back(event_from_json(Json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::SchemaViolation, "event log line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TrajectoryEvent> read_event_log(const std::filesystem::path& path) {
  return parse_event_log(read_text_file(path));
}

bool is_user_visible(const TrajectoryEvent& e) {
  if (e.kind != EventKind::chat && e.kind != EventKind::routing_relay) return false;
  // Only the outermost relay leg reaches the user; deeper layers hand the
  // reply back up the tree.
  if (e.kind == EventKind::routing_relay && (!e.reply || e.layer != 1)) return false;
  return e.sender == kUserAgent || e.recipient == kUserAgent;
}

std::vector<AgentId> memory_owners(const TrajectoryEvent& e) {
  std::vector<AgentId> owners;
  auto add = [&](const std::string& id) {
    if (id.empty() || id == kUserAgent) return;
    for (const auto& o : owners) {
      if (o == id) return;
    }
    owners.push_back(id);
  };
  switch (e.kind) {
    case EventKind::chat:
      if (e.reply) {
        add(e.recipient);
      } else {
        add(e.sender);
        add(e.recipient);
      }
      break;
    case EventKind::routing_relay:
      add(e.agent);
      if (!e.reply) add(e.recipient);
      break;
    case EventKind::model_call:
    case EventKind::tool_call:
    case EventKind::tool_result:
    case EventKind::routing_decision:
      add(e.agent);
      break;
  }
  return owners;
}

}  // namespace agentcollab
