#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "agentcollab/agent_graph.hpp"
#include "agentcollab/json_util.hpp"

namespace agentcollab {

enum class EventKind { chat, tool_call, tool_result, routing_relay, routing_decision, model_call };

std::string_view to_string(EventKind kind) noexcept;
EventKind event_kind_from_string(std::string_view s);

/// One record of a session's event log.
///
/// Timing conventions (virtual milliseconds):
///   model_call        [request sent, response received]
///   chat (outgoing)   instantaneous at send time
///   chat (reply)      [request sent, reply received], i.e. the blocked span
///   tool_call         instantaneous; the matching tool_result spans execution
///   routing_decision  [classification start, classification end]
///   routing_relay     outgoing leg instantaneous; return leg spans the relay
struct TrajectoryEvent {
  std::string session_id;
  std::int64_t seq = 0;
  int turn = 0;
  EventKind kind = EventKind::chat;
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  // Agent that acted; for chat events this is the sender.
  AgentId agent;
  std::string sender;
  std::string recipient;
  std::string content;
  std::int64_t output_token_count = 0;
  std::string call_id;
  std::string tool_name;
  // chat / routing_relay: this record answers an earlier request.
  bool reply = false;
  bool error = false;
  // model_call: content holds rendered tool calls instead of text.
  bool has_tool_calls = false;
  // routing_decision and routing_relay.
  int layer = 0;
  // routing_decision only.
  std::string decision;
  double confidence = 0.0;

  std::int64_t duration_ms() const { return end_ms - start_ms; }
  bool operator==(const TrajectoryEvent&) const = default;
};

Json event_to_json(const TrajectoryEvent& event);
TrajectoryEvent event_from_json(const Json& j);

/// Newline-delimited JSON, one event per line, trailing newline.
std::string write_event_log(const std::vector<TrajectoryEvent>& events);
std::vector<TrajectoryEvent> parse_event_log(std::string_view text);
std::vector<TrajectoryEvent> read_event_log(const std::filesystem::path& path);

/// Events the human on the other side of the root agent can observe.
bool is_user_visible(const TrajectoryEvent& event);

/// Agents whose memory holds this event.
std::vector<AgentId> memory_owners(const TrajectoryEvent& event);

}  // namespace agentcollab
