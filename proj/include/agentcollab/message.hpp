#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "agentcollab/agent_graph.hpp"

namespace agentcollab {

enum class MessageKind { chat, tool_call, tool_result, routing_relay };

std::string_view to_string(MessageKind kind) noexcept;

struct Message {
  AgentId sender;
  AgentId recipient;
  std::string content;
  MessageKind kind = MessageKind::chat;
  std::int64_t timestamp_ms = 0;

  bool operator==(const Message&) const = default;
};

// Incoming messages are shown to a model as
//
//   <message from="SENDER">
//   CONTENT
//   </message>
//
// A literal "</message>" in CONTENT is written as "<\/message>". Any
// "<\\.../message>" already present gains one more backslash, so the
// escaping is a bijection and parse_incoming(format_incoming(m)) == m.

std::string escape_message_content(std::string_view content);
std::string unescape_message_content(std::string_view content);

/// Precondition: message.kind == chat.
std::string format_incoming(const Message& message);

/// Inverse of format_incoming. The result has the sender and content set;
/// recipient and timestamp are left empty. SchemaViolation on bad framing.
Message parse_incoming(std::string_view tagged);

}  // namespace agentcollab
