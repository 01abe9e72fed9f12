#include "agentcollab/message.hpp"

#include <cassert>

#include "agentcollab/error.hpp"

namespace agentcollab {

std::string_view to_string(MessageKind kind) noexcept {
  switch (kind) {
    case MessageKind::chat: return "chat";
    case MessageKind::tool_call: return "tool_call";
    case MessageKind::tool_result: return "tool_result";
    case MessageKind::routing_relay: return "routing_relay";
  }
  return "chat";
}

namespace {

constexpr std::string_view kCloseTail = "/message>";

// Rewrites every "<" + N backslashes + "/message>" to N + delta backslashes.
std::string rewrite_closers(std::string_view in, int delta) {
  std::string out;
  out.reserve(in.size() + 8);
  std::size_t i = 0;
  while (i < in.size()) {
    if (in[i] != '<') {
      out += in[i++];
      continue;
    }
    std::size_t j = i + 1;
    while (j < in.size() && in[j] == '\\') ++j;
    auto slashes = j - (i + 1);
    bool closer = in.substr(j, kCloseTail.size()) == kCloseTail;
    if (!closer || (delta < 0 && slashes == 0)) {
      out += in[i++];
      continue;
    }
    out += '<';
    out.append(static_cast<std::size_t>(static_cast<long>(slashes) + delta), '\\');
    out += kCloseTail;
    i = j + kCloseTail.size();
  }
  return out;
}

}  // namespace

std::string escape_message_content(std::string_view content) {
  return rewrite_closers(content, +1);
}

std::string unescape_message_content(std::string_view content) {
  return rewrite_closers(content, -1);
}

std::string format_incoming(const Message& message) {
  assert(message.kind == MessageKind::chat);
  std::string out = "<message from=\"";
  out += message.sender;
  out += "\">\n";
  out += escape_message_content(message.content);
  out += "\n</message>";
  return out;
}

Message parse_incoming(std::string_view tagged) {
  constexpr std::string_view kOpen = "<message from=\"";
  constexpr std::string_view kOpenEnd = "\">\n";
  constexpr std::string_view kClose = "\n</message>";
  if (tagged.substr(0, kOpen.size()) != kOpen) {
    fail(ErrorCode::SchemaViolation, "message does not start with <message from=\"");
  }
  auto name_end = tagged.find(kOpenEnd, kOpen.size());
  if (name_end == std::string_view::npos) fail(ErrorCode::SchemaViolation, "unterminated opening tag");
  if (tagged.size() < name_end + kOpenEnd.size() + kClose.size() ||
      tagged.substr(tagged.size() - kClose.size()) != kClose) {
    fail(ErrorCode::SchemaViolation, "message does not end with </message>");
  }
  Message m;
  m.sender = std::string(tagged.substr(kOpen.size(), name_end - kOpen.size()));
  auto body_begin = name_end + kOpenEnd.size();
  auto body = tagged.substr(body_begin, tagged.size() - kClose.size() - body_begin);
  m.content = unescape_message_content(body);
  return m;
}

}  // namespace agentcollab
