#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentcollab/agent_graph.hpp"
#include "agentcollab/error.hpp"
#include "agentcollab/memory.hpp"
#include "agentcollab/message.hpp"
#include "agentcollab/payload.hpp"
#include "agentcollab/provider.hpp"
#include "agentcollab/routing.hpp"
#include "agentcollab/trajectory.hpp"

namespace agentcollab {

inline constexpr std::string_view kSendMessageTool = "send_message";

struct ToolResult {
  std::string content;
  bool error = false;
  std::int64_t latency_ms = 0;
};

/// Executes non-communication tools. Called from every agent's thread, so
/// implementations must be safe for concurrent use.
class ActionExecutor {
 public:
  virtual ~ActionExecutor() = default;
  /// Errors thrown here become error tool results the agent can react to.
  virtual ToolResult execute(const AgentId& agent, const ToolCall& call,
                             const ToolSchema& schema) = 0;
};

struct RoutingOptions {
  bool enabled = false;
  double threshold = kDefaultRoutingThreshold;
  RouteClassifier* classifier = nullptr;
  // Let an agent that received a relayed request route it again.
  bool multi_layer = true;
};

struct SessionConfig {
  bool payload_referencing = true;
  // Model calls per agent turn.
  int iteration_cap = 12;
  // Negative: the graph's depth.
  int max_delegation_depth = -1;
  // send_message calls one agent may make within one user turn.
  int message_budget = 64;
  bool concurrent_dispatch = true;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  RoutingOptions routing;
};

struct SendRequest {
  AgentId recipient;
  std::string content;
  std::string call_id;
};

struct ChannelOutcome {
  AgentId recipient;
  std::optional<Message> response;
  std::optional<Error> error;

  bool ok() const { return response.has_value(); }
};

/// Supervisor-only prompt text explaining the payload tags.
std::string payload_instructions();

/// The send_message tool an agent sees: recipient is an enum of its
/// sub-agents.
ToolSchema send_message_schema(const AgentGraph& graph, const AgentId& agent);

/// One conversation with an agent tree. All timing is on a virtual clock
/// driven by backend-reported wall times. Not thread-safe as a whole; the
/// session itself runs parallel channels internally.
class Session {
 public:
  Session(std::string session_id, const AgentGraph& graph, ModelBackend& backend,
          ActionExecutor* actions, SessionConfig config = {});

  /// Starts the next user turn: the user's message goes to the root (or is
  /// routed), and the user-visible reply comes back.
  Message handle_user_message(const std::string& content);

  /// Blocks `sender` until `recipient` answers. Throws the channel's error.
  Message send_message(const AgentId& sender, const AgentId& recipient,
                       const std::string& content);

  /// Requests run as independent channels that overlap on the virtual
  /// clock; outcomes come back in request order. Repeated recipients are
  /// served one after another.
  std::vector<ChannelOutcome> dispatch_parallel(const AgentId& sender,
                                                const std::vector<SendRequest>& requests);

  /// Records `incoming`, runs the agent's loop and records its reply.
  Message run_agent_turn(const AgentId& agent, const Message& incoming);

  const std::string& session_id() const noexcept { return session_id_; }
  const AgentGraph& graph() const noexcept { return graph_; }
  const SessionConfig& config() const noexcept { return config_; }
  std::int64_t now_ms() const noexcept { return now_ms_; }
  int turn() const noexcept { return turn_; }
  const std::vector<TrajectoryEvent>& events() const noexcept { return events_; }
  const AgentMemory& memory(const AgentId& agent) const;
  std::map<AgentId, AgentMemory> memories() const;
  const PayloadRegistry& payloads() const noexcept { return payloads_; }
  std::vector<RoutingDecision> routing_decisions() const;

 private:
  struct Ctx {
    std::int64_t now = 0;
    int depth = 0;
    std::vector<TrajectoryEvent>* out = nullptr;
  };
  struct AgentState {
    AgentMemory memory;
    int model_calls = 0;
    int sends_this_turn = 0;
  };

  void record(Ctx& ctx, TrajectoryEvent event);
  void commit();
  TrajectoryEvent make_event(EventKind kind, const AgentId& agent, std::int64_t start,
                             std::int64_t end) const;

  std::string agent_loop(const AgentId& agent, Ctx& ctx);
  std::string route_or_run(const AgentId& agent, const Message& incoming, int layer, Ctx& ctx,
                           bool& relayed);
  ModelRequest build_request(const AgentId& agent) const;
  void run_tool_calls(const AgentId& agent, const std::vector<ToolCall>& calls, Ctx& ctx);
  void run_action(const AgentId& agent, const ToolCall& call, Ctx& ctx);
  std::vector<ChannelOutcome> dispatch(const AgentId& sender, const std::vector<SendRequest>& requests,
                                       Ctx& ctx);
  std::vector<ChannelOutcome> dispatch_wave(const AgentId& sender,
                                            const std::vector<SendRequest>& requests, Ctx& ctx);
  std::string system_prompt(const AgentId& agent) const;
  AgentState& state(const AgentId& agent);
  const AgentState& state(const AgentId& agent) const;

  std::string session_id_;
  const AgentGraph& graph_;
  ModelBackend& backend_;
  ActionExecutor* actions_;
  SessionConfig config_;
  int max_depth_;

  std::int64_t now_ms_ = 0;
  int turn_ = 0;
  std::size_t committed_ = 0;
  std::vector<TrajectoryEvent> events_;
  // One entry per agent, created up front; each agent's entry is only
  // touched by the thread running that agent.
  std::map<AgentId, AgentState, std::less<>> agents_;
  PayloadRegistry payloads_;
};

}  // namespace agentcollab
