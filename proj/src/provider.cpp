#include "agentcollab/provider.hpp"

#include <algorithm>
#include <set>

#include "agentcollab/error.hpp"
#include "agentcollab/tokenizer.hpp"

namespace agentcollab {

std::string_view to_string(Role role) noexcept {
  switch (role) {
    case Role::user: return "user";
    case Role::assistant: return "assistant";
    case Role::tool: return "tool";
  }
  return "user";
}

std::string ModelRequest::full_text() const {
  std::string out = system_prompt;
  for (const auto& m : messages) {
    out += '\n';
    out += m.content;
  }
  return out;
}

ModelResponse ModelResponse::from_text(std::string text) {
  ModelResponse r;
  r.kind = ResponseKind::text;
  r.text = std::move(text);
  return r;
}

ModelResponse ModelResponse::from_tool_calls(std::vector<ToolCall> calls) {
  ModelResponse r;
  r.kind = ResponseKind::tool_calls;
  r.tool_calls = std::move(calls);
  return r;
}

void validate_request(const ModelRequest& request) {
  if (request.messages.empty()) fail(ErrorCode::MalformedRequest, "request has no messages");
  if (request.temperature < 0.0) fail(ErrorCode::MalformedRequest, "negative temperature");
  for (std::size_t i = 1; i < request.messages.size(); ++i) {
    if (request.messages[i].role == Role::assistant &&
        request.messages[i - 1].role == Role::assistant) {
      fail(ErrorCode::MalformedRequest,
           "consecutive assistant turns at message " + std::to_string(i));
    }
  }
}

namespace {

bool value_matches(const Json& value, const std::vector<std::string>& allowed) {
  if (allowed.empty()) return true;
  if (!value.is_string()) return false;
  return std::find(allowed.begin(), allowed.end(), value.get<std::string>()) != allowed.end();
}

}  // namespace

std::optional<std::string> tool_call_violation(const ModelRequest& request,
                                               const ModelResponse& response) {
  if (response.kind != ResponseKind::tool_calls) return std::nullopt;
  for (const auto& call : response.tool_calls) {
    auto tool = std::find_if(request.tools.begin(), request.tools.end(),
                             [&](const ToolSchema& t) { return t.name == call.tool_name; });
    if (tool == request.tools.end()) return "unknown tool '" + call.tool_name + "'";
    if (!call.arguments.is_object()) return call.tool_name + ": arguments must be an object";
    for (const auto& p : tool->parameters) {
      auto it = call.arguments.find(p.name);
      if (it == call.arguments.end()) {
        if (p.required) return call.tool_name + ": missing required argument '" + p.name + "'";
        continue;
      }
      if (!value_matches(*it, p.allowed_values)) {
        return call.tool_name + ": argument '" + p.name + "' = " + it->dump() +
               " is not an allowed value";
      }
    }
    for (const auto& [key, _] : call.arguments.items()) {
      if (tool->find_parameter(key) == nullptr) {
        return call.tool_name + ": unknown argument '" + key + "'";
      }
    }
  }
  return std::nullopt;
}

std::string render_tool_calls(const std::vector<ToolCall>& calls) {
  Json arr = Json::array();
  for (const auto& c : calls) {
    arr.push_back(Json{{"id", c.call_id}, {"name", c.tool_name}, {"arguments", c.arguments}});
  }
  return Json{{"tool_calls", arr}}.dump();
}

std::int64_t response_tokens(const ModelResponse& response) {
  if (response.kind == ResponseKind::text) return count_output_tokens(response.text.value_or(""));
  // Tool name, argument names and argument values; not the JSON envelope.
  std::int64_t total = 0;
  for (const auto& c : response.tool_calls) {
    total += count_output_tokens(c.tool_name);
    for (const auto& [key, value] : c.arguments.items()) {
      total += count_output_tokens(key);
      total += value.is_string() ? count_output_tokens(value.get_ref<const std::string&>())
                                 : count_output_tokens(value.dump());
    }
  }
  return total;
}

ModelResponse invoke(ModelBackend& backend, const ModelRequest& request) {
  validate_request(request);
  auto response = backend.complete(request);
  if (response.kind == ResponseKind::text) {
    if (!response.text) fail(ErrorCode::MalformedToolCall, "text response without text");
    if (!response.tool_calls.empty()) {
      fail(ErrorCode::MalformedToolCall, "text response also carries tool calls");
    }
  } else {
    if (response.tool_calls.empty()) fail(ErrorCode::MalformedToolCall, "empty tool_calls");
    if (response.text) fail(ErrorCode::MalformedToolCall, "tool_calls response also carries text");
    std::set<std::string> ids;
    for (const auto& c : response.tool_calls) {
      if (!c.call_id.empty() && !ids.insert(c.call_id).second) {
        fail(ErrorCode::MalformedToolCall, "duplicate call id " + c.call_id);
      }
    }
  }
  if (response.output_token_count < 0) response.output_token_count = response_tokens(response);
  if (response.wall_time_ms < 0) response.wall_time_ms = 0;
  return response;
}

ModelResponse complete(ModelBackend& backend, const ModelRequest& request) {
  auto response = invoke(backend, request);
  if (auto violation = tool_call_violation(request, response)) {
    fail(ErrorCode::MalformedToolCall, *violation);
  }
  return response;
}

}  // namespace agentcollab
