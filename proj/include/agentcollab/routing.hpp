#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "agentcollab/agent_graph.hpp"
#include "agentcollab/memory.hpp"
#include "agentcollab/message.hpp"
#include "agentcollab/provider.hpp"
#include "agentcollab/trajectory.hpp"

namespace agentcollab {

inline constexpr std::string_view kOrchestrate = "orchestrate";
inline constexpr double kDefaultRoutingThreshold = 0.7;

/// What a classifier thinks: an agent id or "orchestrate", with a score.
struct Classification {
  std::string choice;
  double confidence = 0.0;
  std::int64_t latency_ms = 0;
};

class RouteClassifier {
 public:
  virtual ~RouteClassifier() = default;
  /// May throw Error(ClassifierUnavailable).
  virtual Classification classify(const AgentMemory& history, const Message& incoming,
                                  const std::vector<AgentProfile>& candidates) = 0;
};

struct RoutingDecision {
  std::string session_id;
  int turn = 0;
  int layer = 1;
  AgentId decider;
  // Agent id, or "orchestrate".
  std::string decision;
  double confidence = 0.0;
  std::int64_t classify_latency_ms = 0;

  bool routed() const { return decision != kOrchestrate; }
  /// "session:turn:layer", the join key against gold labels.
  std::string incoming_ref() const;
  bool operator==(const RoutingDecision&) const = default;
};

/// Thresholded decision. Routes when confidence >= threshold and the choice
/// is one of the candidates; any classifier error falls back to orchestrate.
RoutingDecision classify_route(RouteClassifier& classifier, const AgentMemory& history,
                               const Message& incoming,
                               const std::vector<AgentProfile>& candidates,
                               double threshold = kDefaultRoutingThreshold);

/// Keyword overlap between the message and each candidate's id, name,
/// instruction, action groups and tools. Confidence is the best score over
/// the sum of scores; a tie for first place or no overlap orchestrates.
class RuleBasedClassifier final : public RouteClassifier {
 public:
  explicit RuleBasedClassifier(std::int64_t latency_ms = 0,
                               const AgentGraph* graph = nullptr)
      : latency_ms_(latency_ms), graph_(graph) {}

  Classification classify(const AgentMemory& history, const Message& incoming,
                          const std::vector<AgentProfile>& candidates) override;

  /// Per-candidate overlap scores, in candidate order.
  std::vector<int> scores(const Message& incoming,
                          const std::vector<AgentProfile>& candidates) const;

 private:
  std::set<std::string> keywords(const AgentProfile& profile) const;

  std::int64_t latency_ms_;
  // Optional; resolves action-group ids to tool schemas for keywords.
  const AgentGraph* graph_;
};

/// Lowercased word stems, minus stop words.
std::set<std::string> keyword_stems(std::string_view text);

/// One model call with caller "router". The model answers with a candidate
/// id (confidence 1.0) or "unsure" (orchestrate, confidence 0.0).
class ModelClassifier final : public RouteClassifier {
 public:
  explicit ModelClassifier(ModelBackend& backend, double temperature = 0.0)
      : backend_(backend), temperature_(temperature) {}

  Classification classify(const AgentMemory& history, const Message& incoming,
                          const std::vector<AgentProfile>& candidates) override;

 private:
  ModelBackend& backend_;
  double temperature_;
};

/// Decisions recorded in a session log, in log order.
std::vector<RoutingDecision> routing_decisions_from_log(const std::vector<TrajectoryEvent>& log);

/// Routing overhead per turn with a first-layer decision: classification time
/// plus the root agent's model time within that turn.
struct TurnRoutingTiming {
  std::string session_id;
  int turn = 0;
  std::int64_t overhead_ms = 0;
  bool routed = false;
};

std::vector<TurnRoutingTiming> turn_routing_timings(const std::vector<TrajectoryEvent>& log,
                                                    const AgentId& root);

struct RoutingGoldLabel {
  std::string session_id;
  int turn = 0;
  int layer = 1;
  // Agent id, or "orchestrate".
  std::string gold;

  std::string incoming_ref() const;
};

std::vector<RoutingGoldLabel> gold_labels_from_json(const Json& doc);
std::vector<RoutingGoldLabel> read_gold_labels(const std::filesystem::path& path);

struct RoutingCounts {
  std::int64_t decisions = 0;
  std::int64_t correct = 0;
  std::int64_t false_switches = 0;
  double accuracy = 0.0;
  double false_switch_rate = 0.0;
};

struct RoutingMetricsReport {
  std::int64_t unlabeled = 0;
  RoutingCounts overall;
  std::map<int, RoutingCounts> by_layer;
  double mean_classify_latency_ms = 0.0;
  std::int64_t timed_turns = 0;
  double mean_turn_overhead_ms = 0.0;
};

/// Joins decisions and gold labels on incoming_ref. A routed decision whose
/// target differs from gold is a false switch; orchestrate never is.
/// EmptyJoin when no decision has a label.
RoutingMetricsReport routing_metrics(const std::vector<RoutingDecision>& decisions,
                                     const std::vector<RoutingGoldLabel>& gold,
                                     const std::vector<TurnRoutingTiming>& turn_timings);

Json routing_report_to_json(const RoutingMetricsReport& report);

}  // namespace agentcollab
