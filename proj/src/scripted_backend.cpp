#include "agentcollab/scripted_backend.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "agentcollab/error.hpp"

namespace agentcollab {

namespace {

ScriptedResponse entry_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  ScriptedResponse r;
  if (auto it = j.find("expect"); it != j.end()) {
    if (it->is_string()) {
      r.expect.push_back(it->get<std::string>());
    } else {
      r.expect = string_list(j, "expect", path, true);
    }
  }
  r.unavailable = optional_bool(j, "unavailable", path, false);
  if (auto it = j.find("text"); it != j.end()) r.text = require_string(j, "text", path);
  if (auto it = j.find("tool_calls"); it != j.end()) {
    if (!it->is_array() || it->empty()) {
      fail(ErrorCode::SchemaViolation, path + ".tool_calls: expected a non-empty array");
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
      auto cpath = path + ".tool_calls[" + std::to_string(i) + "]";
      const auto& cj = (*it)[i];
      ToolCall call;
      call.tool_name = require_string(cj, "name", cpath);
      call.call_id = optional_string(cj, "id", cpath);
      if (auto a = cj.find("arguments"); a != cj.end()) call.arguments = *a;
      r.tool_calls.push_back(std::move(call));
    }
  }
  if (!r.unavailable && r.text.has_value() == !r.tool_calls.empty()) {
    fail(ErrorCode::SchemaViolation, path + ": exactly one of text / tool_calls is required");
  }
  if (j.contains("wall_time_ms")) {
    r.wall_time_ms = static_cast<std::int64_t>(optional_number(j, "wall_time_ms", path, 0));
  }
  if (j.contains("output_tokens")) {
    r.output_tokens = static_cast<std::int64_t>(optional_number(j, "output_tokens", path, 0));
  }
  r.real_delay_us = static_cast<std::int64_t>(optional_number(j, "real_delay_us", path, 0));
  return r;
}

}  // namespace

Script script_from_json(const Json& doc) {
  require_object(doc, "$");
  Script s;
  s.strict = optional_bool(doc, "strict", "$", false);
  if (auto it = doc.find("latency"); it != doc.end()) {
    s.base_ms = static_cast<std::int64_t>(optional_number(*it, "base_ms", "$.latency", 1000));
    s.ms_per_token = optional_number(*it, "ms_per_token", "$.latency", 0.0);
  }
  if (auto it = doc.find("agents"); it != doc.end()) {
    require_object(*it, "$.agents");
    for (const auto& [caller, entries] : it->items()) {
      auto path = "$.agents." + caller;
      if (!entries.is_array()) fail(ErrorCode::SchemaViolation, path + ": expected an array");
      auto& list = s.by_caller[caller];
      for (std::size_t i = 0; i < entries.size(); ++i) {
        list.push_back(entry_from_json(entries[i], path + "[" + std::to_string(i) + "]"));
      }
    }
  }
  return s;
}

ScriptedBackend::ScriptedBackend(Script script) : script_(std::move(script)) {}

ModelResponse ScriptedBackend::complete(const ModelRequest& request) {
  std::unique_lock lock(mutex_);
  auto slot = cursor_[request.caller]++;
  auto it = script_.by_caller.find(request.caller);
  if (it == script_.by_caller.end() || slot >= it->second.size()) {
    fail(ErrorCode::BackendUnavailable,
         "script exhausted for " + request.caller + " at request " + std::to_string(slot));
  }
  const auto& entry = it->second[slot];
  auto delay = entry.real_delay_us;
  lock.unlock();

  if (delay > 0) std::this_thread::sleep_for(std::chrono::microseconds(delay));

  if (entry.unavailable) {
    fail(ErrorCode::BackendUnavailable,
         "scripted outage for " + request.caller + " at request " + std::to_string(slot));
  }
  if (script_.strict && !entry.expect.empty()) {
    auto text = request.full_text();
    for (const auto& needle : entry.expect) {
      if (text.find(needle) == std::string::npos) {
        fail(ErrorCode::ScriptMismatch, request.caller + " request " + std::to_string(slot) +
                                            " does not contain \"" + needle + "\"");
      }
    }
  }

  auto response = entry.text ? ModelResponse::from_text(*entry.text)
                             : ModelResponse::from_tool_calls(entry.tool_calls);
  response.output_token_count = entry.output_tokens.value_or(response_tokens(response));
  response.wall_time_ms =
      entry.wall_time_ms.value_or(script_.base_ms + static_cast<std::int64_t>(std::llround(
                                                        script_.ms_per_token *
                                                        static_cast<double>(response.output_token_count))));
  return response;
}

std::size_t ScriptedBackend::requests_from(const std::string& caller) const {
  std::lock_guard lock(mutex_);
  auto it = cursor_.find(caller);
  return it == cursor_.end() ? 0 : it->second;
}

std::vector<std::string> ScriptedBackend::unconsumed() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [caller, entries] : script_.by_caller) {
    auto it = cursor_.find(caller);
    auto used = it == cursor_.end() ? 0 : it->second;
    if (used < entries.size()) out.push_back(caller);
  }
  return out;
}

}  // namespace agentcollab
