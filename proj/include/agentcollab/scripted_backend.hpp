#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agentcollab/json_util.hpp"
#include "agentcollab/provider.hpp"

namespace agentcollab {

struct ScriptedResponse {
  // Substrings the incoming request must contain (enforced in strict mode).
  std::vector<std::string> expect;
  std::optional<std::string> text;
  std::vector<ToolCall> tool_calls;
  std::optional<std::int64_t> wall_time_ms;
  std::optional<std::int64_t> output_tokens;
  // Simulate an outage for this slot.
  bool unavailable = false;
  // Real sleep before answering; lets tests shuffle completion order.
  std::int64_t real_delay_us = 0;
};

struct Script {
  bool strict = false;
  // Virtual latency for slots without an explicit wall_time_ms:
  // base_ms + ms_per_token * output tokens.
  std::int64_t base_ms = 1000;
  double ms_per_token = 0.0;
  std::map<std::string, std::vector<ScriptedResponse>, std::less<>> by_caller;
};

// Script documents are JSON:
//
//   { "strict": true,
//     "latency": { "base_ms": 800, "ms_per_token": 5 },
//     "agents": { "<caller>": [ { "expect": "...", "text": "..." },
//                               { "tool_calls": [ { "name": "...", "arguments": {...} } ],
//                                 "wall_time_ms": 1200 } ] } }
//
// The n-th request from a caller receives entry n of that caller's list.
Script script_from_json(const Json& doc);

/// Deterministic backend replaying canned responses keyed by
/// (caller, per-caller request index). Calls are serialized internally.
class ScriptedBackend final : public ModelBackend {
 public:
  explicit ScriptedBackend(Script script);

  ModelResponse complete(const ModelRequest& request) override;

  std::size_t requests_from(const std::string& caller) const;
  /// Callers whose scripted entries were not all consumed.
  std::vector<std::string> unconsumed() const;

 private:
  Script script_;
  mutable std::mutex mutex_;
  std::map<std::string, std::size_t, std::less<>> cursor_;
};

}  // namespace agentcollab
