#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agentcollab/agent_graph.hpp"
#include "agentcollab/provider.hpp"
#include "agentcollab/scenario.hpp"
#include "agentcollab/session.hpp"
#include "agentcollab/trajectory.hpp"

namespace agentcollab {

inline constexpr std::string_view kStopToken = "</stop>";
inline constexpr int kUserTurnCap = 5;

enum class EndedBy { stop_token, turn_cap, error };

std::string_view to_string(EndedBy e) noexcept;
EndedBy ended_by_from_string(std::string_view s);

struct Trajectory {
  std::string session_id;
  std::string scenario_id;
  std::vector<TrajectoryEvent> events;
  int user_turns = 0;
  EndedBy ended_by = EndedBy::stop_token;
  // Set when ended_by == error.
  std::string error;
};

/// Session metadata (everything but the events).
Json trajectory_summary_json(const Trajectory& t);
/// Reads session.json and trajectory.jsonl from a session directory.
Trajectory read_trajectory(const std::filesystem::path& session_dir);
void write_trajectory(const std::filesystem::path& session_dir, const Trajectory& t);

/// The conversation as the human sees it: the user's own messages become
/// assistant turns, everything the system showed them becomes user turns.
std::vector<ChatTurn> user_view(const std::vector<TrajectoryEvent>& events);

struct UserTurn {
  bool stop = false;
  std::string utterance;
};

std::string user_simulator_prompt(const Scenario& scenario);

/// One user-simulator call (caller "user_simulator"). Any occurrence of
/// the stop token ends the session, even alongside other text.
UserTurn simulate_user(ModelBackend& backend, const Scenario& scenario,
                       const std::vector<TrajectoryEvent>& events, std::uint64_t seed = 0);

/// SchemaMismatch when arguments do not fit the tool's parameters.
void check_tool_arguments(const ToolSchema& schema, const ToolCall& call);

struct Invocation {
  AgentId agent;
  ToolCall call;
  ToolResult result;
};

/// Canned tool results. Fixture document:
///
///   { "<tool>": [ { "match": {<argument subset>}, "result": <json or text>,
///                   "latency_ms": 300, "error": false }, ... ] }
///
/// The first entry whose match is a subset of the call's arguments wins;
/// strings match case-insensitively as substrings. Identical calls always
/// get identical results.
class ScriptedActionSimulator final : public ActionExecutor {
 public:
  struct Fixture {
    Json match = Json::object();
    std::string result;
    std::int64_t latency_ms = 0;
    bool error = false;
  };

  ScriptedActionSimulator() = default;
  explicit ScriptedActionSimulator(const Json& fixtures);

  ToolResult execute(const AgentId& agent, const ToolCall& call, const ToolSchema& schema) override;

  std::vector<Invocation> invocations() const;

 private:
  std::map<std::string, std::vector<Fixture>, std::less<>> fixtures_;
  mutable std::mutex mutex_;
  std::vector<Invocation> log_;
};

/// Model-generated tool results. Each request carries the tool schema and
/// every earlier invocation in the session, so results stay consistent;
/// an exact repeat of an earlier call returns the earlier result.
/// Requests use caller "action_simulator:<agent>".
class ModelActionSimulator final : public ActionExecutor {
 public:
  explicit ModelActionSimulator(ModelBackend& backend, std::uint64_t seed = 0)
      : backend_(backend), seed_(seed) {}

  ToolResult execute(const AgentId& agent, const ToolCall& call, const ToolSchema& schema) override;

  std::vector<Invocation> invocations() const;

 private:
  ModelBackend& backend_;
  std::uint64_t seed_;
  mutable std::mutex mutex_;
  std::vector<Invocation> log_;
};

/// Delivers the input problem, then alternates agent system and user
/// simulator until the stop token or the user-turn cap. Errors end the
/// session with ended_by = error; the events up to that point are kept.
Trajectory run_session(const Scenario& scenario, const AgentGraph& graph,
                       ModelBackend& agent_backend, ModelBackend& user_backend,
                       ActionExecutor* actions, const SessionConfig& config = {},
                       int turn_cap = kUserTurnCap);

}  // namespace agentcollab
