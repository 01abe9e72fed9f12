#pragma once

#include <map>
#include <vector>

#include "agentcollab/agent_graph.hpp"
#include "agentcollab/provider.hpp"
#include "agentcollab/trajectory.hpp"

namespace agentcollab {

/// Append-only history of the events one agent took part in.
class AgentMemory {
 public:
  AgentMemory() = default;
  explicit AgentMemory(AgentId owner) : owner_(std::move(owner)) {}

  const AgentId& owner() const noexcept { return owner_; }

  /// Throws std::logic_error if the event starts before the last one.
  void append(const TrajectoryEvent& event);

  const std::vector<TrajectoryEvent>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }

  /// The conversation as the owner's model sees it.
  std::vector<ChatTurn> render() const;

 private:
  AgentId owner_;
  std::vector<TrajectoryEvent> events_;
};

/// Rebuilds every agent's memory from a session log using memory_owners().
/// Log-only fields (session_id, seq) are cleared so the result compares
/// equal to live memories.
std::map<AgentId, AgentMemory> replay_memories(const std::vector<TrajectoryEvent>& log);

/// Event with the fields that only exist in the written log cleared.
TrajectoryEvent memory_view(TrajectoryEvent event);

}  // namespace agentcollab
