#include "agentcollab/memory.hpp"

#include <stdexcept>

#include "agentcollab/message.hpp"

namespace agentcollab {

TrajectoryEvent memory_view(TrajectoryEvent event) {
  event.session_id.clear();
  event.seq = 0;
  return event;
}

void AgentMemory::append(const TrajectoryEvent& event) {
  if (!events_.empty() && event.start_ms < events_.back().start_ms) {
    throw std::logic_error("memory of " + owner_ + ": event at " +
                           std::to_string(event.start_ms) + "ms after one at " +
                           std::to_string(events_.back().start_ms) + "ms");
  }
  events_.push_back(memory_view(event));
}

namespace {

std::string tagged(const std::string& sender, const std::string& content) {
  Message m;
  m.sender = sender;
  m.content = content;
  return format_incoming(m);
}

}  // namespace

std::vector<ChatTurn> AgentMemory::render() const {
  std::vector<ChatTurn> out;
  for (const auto& e : events_) {
    switch (e.kind) {
      case EventKind::model_call:
        out.push_back({Role::assistant, e.content});
        break;
      case EventKind::chat:
        if (e.recipient != owner_) break;  // own outgoing: already in the model_call
        if (e.reply && e.error) {
          out.push_back({Role::tool, "(message to " + e.sender + " failed: " + e.content + ")"});
        } else {
          out.push_back({e.reply ? Role::tool : Role::user, tagged(e.sender, e.content)});
        }
        break;
      case EventKind::tool_result:
        out.push_back({Role::tool, (e.error ? "[" + e.call_id + "] error: " : "[" + e.call_id + "] ") +
                                       e.content});
        break;
      case EventKind::routing_relay:
        if (e.agent != owner_) {
          out.push_back({Role::user, tagged(e.sender, e.content)});
        } else if (!e.reply) {
          out.push_back({Role::assistant, "(routed to " + e.recipient + ")"});
        } else if (e.error) {
          out.push_back({Role::user, "(relay to " + e.sender + " failed: " + e.content + ")"});
        } else {
          out.push_back({Role::user, tagged(e.sender, e.content)});
        }
        break;
      case EventKind::tool_call:
      case EventKind::routing_decision:
        break;
    }
  }
  return out;
}

std::map<AgentId, AgentMemory> replay_memories(const std::vector<TrajectoryEvent>& log) {
  std::map<AgentId, AgentMemory> out;
  for (const auto& e : log) {
    for (const auto& owner : memory_owners(e)) {
      auto it = out.try_emplace(owner, owner).first;
      it->second.append(e);
    }
  }
  return out;
}

}  // namespace agentcollab
