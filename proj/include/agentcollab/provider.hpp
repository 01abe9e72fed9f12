#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentcollab/agent_graph.hpp"
#include "agentcollab/json_util.hpp"

namespace agentcollab {

enum class Role { user, assistant, tool };

std::string_view to_string(Role role) noexcept;

struct ChatTurn {
  Role role = Role::user;
  std::string content;

  bool operator==(const ChatTurn&) const = default;
};

struct ModelRequest {
  // Who is asking: an agent id, or a simulator role such as "user_simulator".
  std::string caller;
  std::string system_prompt;
  std::vector<ChatTurn> messages;
  std::vector<ToolSchema> tools;
  double temperature = 0.0;
  std::uint64_t seed = 0;

  /// System prompt and every message joined; used for strict script matching.
  std::string full_text() const;
};

struct ToolCall {
  std::string call_id;
  std::string tool_name;
  Json arguments = Json::object();

  bool operator==(const ToolCall&) const = default;
};

enum class ResponseKind { text, tool_calls };

struct ModelResponse {
  ResponseKind kind = ResponseKind::text;
  std::optional<std::string> text;
  std::vector<ToolCall> tool_calls;
  // Negative means "not reported"; invoke() fills it from the tokenizer.
  std::int64_t output_token_count = -1;
  std::int64_t wall_time_ms = 0;

  static ModelResponse from_text(std::string text);
  static ModelResponse from_tool_calls(std::vector<ToolCall> calls);
};

/// Anything that turns a ModelRequest into a ModelResponse: a live LLM, a
/// scripted fixture, or a test double. Implementations must tolerate
/// concurrent complete() calls.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual ModelResponse complete(const ModelRequest& request) = 0;
};

/// MalformedRequest when messages are empty or two assistant turns touch.
void validate_request(const ModelRequest& request);

/// Describes the first tool call that does not fit the request's tool list
/// (unknown tool, missing required argument, unknown argument, value outside
/// an enum), or nullopt when all calls conform.
std::optional<std::string> tool_call_violation(const ModelRequest& request,
                                               const ModelResponse& response);

/// validate_request, call the backend, check the text/tool_calls shape and
/// fill a missing token count. Does not check calls against the tool list.
ModelResponse invoke(ModelBackend& backend, const ModelRequest& request);

/// invoke() plus tool-call schema enforcement (MalformedToolCall).
ModelResponse complete(ModelBackend& backend, const ModelRequest& request);

/// Canonical JSON rendering of tool calls, used for memories and token counts.
std::string render_tool_calls(const std::vector<ToolCall>& calls);

/// Tokens the model emitted for a response under the repository tokenizer.
std::int64_t response_tokens(const ModelResponse& response);

}  // namespace agentcollab
