#include "agentcollab/http_backend.hpp"

#include <chrono>
#include <httplib.h>

#include "agentcollab/error.hpp"

namespace agentcollab {

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  const auto& url = options_.base_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) fail(ErrorCode::InvalidConfig, "base url needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url.starts_with("https://")) fail(ErrorCode::InvalidConfig, "built without TLS support: " + url);
#endif
}

namespace {

Json tool_json(const ToolSchema& tool) {
  Json properties = Json::object();
  Json required = Json::array();
  for (const auto& p : tool.parameters) {
    Json prop{{"type", p.type}};
    if (!p.description.empty()) prop["description"] = p.description;
    if (!p.allowed_values.empty()) prop["enum"] = p.allowed_values;
    properties[p.name] = std::move(prop);
    if (p.required) required.push_back(p.name);
  }
  return Json{{"type", "function"},
              {"function",
               {{"name", tool.name},
                {"description", tool.description},
                {"parameters",
                 {{"type", "object"}, {"properties", properties}, {"required", required}}}}}};
}

}  // namespace

Json HttpBackend::request_body(const ModelRequest& request) const {
  Json messages = Json::array();
  if (!request.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
  }
  for (const auto& m : request.messages) {
    auto role = m.role == Role::assistant ? "assistant" : "user";
    messages.push_back({{"role", role}, {"content", m.content}});
  }
  Json body{{"model", options_.model},
            {"messages", messages},
            {"temperature", request.temperature},
            {"seed", request.seed}};
  if (!request.tools.empty()) {
    Json tools = Json::array();
    for (const auto& t : request.tools) tools.push_back(tool_json(t));
    body["tools"] = tools;
  }
  return body;
}

ModelResponse parse_chat_completion(const Json& body) {
  if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty()) {
    fail(ErrorCode::BackendUnavailable, "response has no choices");
  }
  const auto& message = body["choices"][0].value("message", Json::object());
  ModelResponse out;
  auto calls = message.find("tool_calls");
  if (calls != message.end() && calls->is_array() && !calls->empty()) {
    std::vector<ToolCall> parsed;
    for (const auto& c : *calls) {
      ToolCall call;
      call.call_id = c.value("id", std::string());
      const auto& fn = c.value("function", Json::object());
      call.tool_name = fn.value("name", std::string());
      auto args = fn.value("arguments", std::string("{}"));
      call.arguments = Json::parse(args, nullptr, false);
      if (call.arguments.is_discarded()) {
        fail(ErrorCode::MalformedToolCall, call.tool_name + ": arguments are not JSON");
      }
      parsed.push_back(std::move(call));
    }
    out = ModelResponse::from_tool_calls(std::move(parsed));
  } else {
    auto content = message.find("content");
    out = ModelResponse::from_text(content != message.end() && content->is_string()
                                       ? content->get<std::string>()
                                       : std::string());
  }
  if (auto usage = body.find("usage"); usage != body.end() && usage->contains("completion_tokens")) {
    out.output_token_count = (*usage)["completion_tokens"].get<std::int64_t>();
  }
  return out;
}

ModelResponse HttpBackend::complete(const ModelRequest& request) {
  httplib::Client client(origin_);
  client.set_connection_timeout(options_.timeout_s);
  client.set_read_timeout(options_.timeout_s);
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  auto started = std::chrono::steady_clock::now();
  auto res = client.Post(path_prefix_ + "/chat/completions", headers, request_body(request).dump(),
                         "application/json");
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  if (!res) {
    fail(ErrorCode::BackendUnavailable, origin_ + ": " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    fail(ErrorCode::BackendUnavailable,
         origin_ + ": HTTP " + std::to_string(res->status) + " " + res->body.substr(0, 200));
  }
  auto body = Json::parse(res->body, nullptr, false);
  if (body.is_discarded()) fail(ErrorCode::BackendUnavailable, origin_ + ": response is not JSON");
  auto out = parse_chat_completion(body);
  out.wall_time_ms = elapsed.count();
  return out;
}

}  // namespace agentcollab
