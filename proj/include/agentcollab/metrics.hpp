#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agentcollab/agent_graph.hpp"
#include "agentcollab/judge.hpp"
#include "agentcollab/routing.hpp"
#include "agentcollab/trajectory.hpp"

namespace agentcollab {

struct SessionVerdicts {
  std::string session_id;
  std::vector<AssertionVerdict> verdicts;
  bool supervisor_reliable = false;
};

/// Per-session success bits. A side with no assertions counts as passed.
struct SessionSuccess {
  std::string session_id;
  bool overall = false;
  bool user = false;
  bool system = false;
  bool supervisor = false;
};

SessionSuccess session_success(const SessionVerdicts& s);

struct GsrReport {
  std::int64_t sessions = 0;
  std::int64_t overall_passed = 0;
  std::int64_t user_passed = 0;
  std::int64_t system_passed = 0;
  std::int64_t supervisor_passed = 0;
  double overall_gsr = 0.0;
  double user_gsr = 0.0;
  double system_gsr = 0.0;
  // Session passes if overall passes or the supervisor was judged reliable.
  double supervisor_gsr = 0.0;
  std::vector<SessionSuccess> per_session;
};

/// EmptySessionSet when `sessions` is empty.
GsrReport compute_gsr(const std::vector<SessionVerdicts>& sessions);

/// Timing aggregates over the root ("supervisor") agent. Durations in ms.
///
///   overhead per turn       root model-call time spent producing
///                           send_message calls, pooled over all turns
///   latency per message     blocked span of each root-sent message
///   turn latency            user message to the user-visible reply,
///                           averaged per session, then over sessions
///   messages per session    root-sent messages
///   tokens per message      output tokens the root generated per message
struct LatencyReport {
  std::int64_t sessions = 0;
  std::int64_t turns = 0;
  std::int64_t communications = 0;
  double overhead_per_turn_ms = 0.0;
  double latency_per_communication_ms = 0.0;
  double turn_latency_per_session_ms = 0.0;
  double communications_per_session = 0.0;
  double output_tokens_per_communication = 0.0;
};

struct SessionLog {
  std::string session_id;
  std::vector<TrajectoryEvent> events;
};

/// MissingTimestamps when an event ends before it starts.
LatencyReport compute_latency(const std::vector<SessionLog>& sessions, const AgentId& root);

Json gsr_to_json(const GsrReport& r);
Json latency_to_json(const LatencyReport& r);

/// Rows of label / value pairs as an aligned two-column table.
std::string format_table(const std::vector<std::vector<std::string>>& rows);

}  // namespace agentcollab
