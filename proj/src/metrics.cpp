#include "agentcollab/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "agentcollab/error.hpp"
#include "agentcollab/session.hpp"

namespace agentcollab {

SessionSuccess session_success(const SessionVerdicts& s) {
  SessionSuccess out{s.session_id, true, true, true, false};
  for (const auto& v : s.verdicts) {
    if (v.verdict) continue;
    out.overall = false;
    (v.side == AssertionSide::user ? out.user : out.system) = false;
  }
  out.supervisor = out.overall || s.supervisor_reliable;
  return out;
}

GsrReport compute_gsr(const std::vector<SessionVerdicts>& sessions) {
  if (sessions.empty()) fail(ErrorCode::EmptySessionSet, "no sessions to score");
  GsrReport r;
  r.sessions = static_cast<std::int64_t>(sessions.size());
  for (const auto& s : sessions) {
    auto ok = session_success(s);
    r.overall_passed += ok.overall;
    r.user_passed += ok.user;
    r.system_passed += ok.system;
    r.supervisor_passed += ok.supervisor;
    r.per_session.push_back(ok);
  }
  auto n = static_cast<double>(r.sessions);
  r.overall_gsr = static_cast<double>(r.overall_passed) / n;
  r.user_gsr = static_cast<double>(r.user_passed) / n;
  r.system_gsr = static_cast<double>(r.system_passed) / n;
  r.supervisor_gsr = static_cast<double>(r.supervisor_passed) / n;
  return r;
}

namespace {

bool is_root_send(const TrajectoryEvent& e, const AgentId& root) {
  return e.kind == EventKind::chat && !e.reply && e.sender == root && e.recipient != kUserAgent;
}

bool calls_send_message(const TrajectoryEvent& e) {
  if (e.kind != EventKind::model_call || !e.has_tool_calls) return false;
  auto calls = Json::parse(e.content, nullptr, false);
  if (calls.is_discarded() || !calls.contains("tool_calls")) return false;
  for (const auto& c : calls["tool_calls"]) {
    if (c.value("name", std::string()) == kSendMessageTool) return true;
  }
  return false;
}

double mean(double sum, std::int64_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); }

}  // namespace

LatencyReport compute_latency(const std::vector<SessionLog>& sessions, const AgentId& root) {
  LatencyReport r;
  r.sessions = static_cast<std::int64_t>(sessions.size());
  double overhead = 0.0;
  double blocked = 0.0;
  std::int64_t replies = 0;
  double tokens = 0.0;
  double session_latency_sum = 0.0;
  std::int64_t timed_sessions = 0;

  for (const auto& s : sessions) {
    std::set<int> turns;
    std::map<int, std::int64_t> turn_start;
    std::map<int, std::int64_t> turn_end;
    for (const auto& e : s.events) {
      if (e.end_ms < e.start_ms) {
        fail(ErrorCode::MissingTimestamps,
             s.session_id + " event " + std::to_string(e.seq) + " ends before it starts");
      }
      if (e.kind == EventKind::chat && e.sender == kUserAgent && !e.reply) {
        turns.insert(e.turn);
        turn_start.emplace(e.turn, e.start_ms);
      }
      if (is_user_visible(e) && e.recipient == kUserAgent) turn_end[e.turn] = e.end_ms;
      if (e.agent == root && calls_send_message(e)) overhead += static_cast<double>(e.duration_ms());
      if (is_root_send(e, root)) {
        ++r.communications;
        tokens += static_cast<double>(e.output_token_count);
      }
      if (e.kind == EventKind::chat && e.reply && e.recipient == root && e.sender != kUserAgent) {
        blocked += static_cast<double>(e.duration_ms());
        ++replies;
      }
    }
    r.turns += static_cast<std::int64_t>(turns.size());
    double latency = 0.0;
    std::int64_t answered = 0;
    for (const auto& [turn, start] : turn_start) {
      auto it = turn_end.find(turn);
      if (it == turn_end.end()) continue;
      latency += static_cast<double>(it->second - start);
      ++answered;
    }
    if (answered > 0) {
      session_latency_sum += latency / static_cast<double>(answered);
      ++timed_sessions;
    }
  }
  r.overhead_per_turn_ms = mean(overhead, r.turns);
  r.latency_per_communication_ms = mean(blocked, replies);
  r.turn_latency_per_session_ms = mean(session_latency_sum, timed_sessions);
  r.communications_per_session = mean(static_cast<double>(r.communications), r.sessions);
  r.output_tokens_per_communication = mean(tokens, r.communications);
  return r;
}

Json gsr_to_json(const GsrReport& r) {
  return Json{{"sessions", r.sessions},
              {"overall_gsr", r.overall_gsr},
              {"supervisor_gsr", r.supervisor_gsr},
              {"user_gsr", r.user_gsr},
              {"system_gsr", r.system_gsr},
              {"overall_passed", r.overall_passed},
              {"supervisor_passed", r.supervisor_passed},
              {"user_passed", r.user_passed},
              {"system_passed", r.system_passed}};
}

Json latency_to_json(const LatencyReport& r) {
  return Json{{"sessions", r.sessions},
              {"turns", r.turns},
              {"communications", r.communications},
              {"overhead_per_turn_ms", r.overhead_per_turn_ms},
              {"latency_per_communication_ms", r.latency_per_communication_ms},
              {"turn_latency_per_session_ms", r.turn_latency_per_session_ms},
              {"communications_per_session", r.communications_per_session},
              {"output_tokens_per_communication", r.output_tokens_per_communication}};
}

std::string format_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i == 0) {
        line += row[i] + std::string(width[i] - row[i].size(), ' ');
      } else {
        line += "  " + std::string(width[i] - row[i].size(), ' ') + row[i];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace agentcollab
