#pragma once

#include <string>

#include "agentcollab/provider.hpp"

namespace agentcollab {

struct HttpBackendOptions {
  // e.g. "https://api.openai.com/v1" or "http://127.0.0.1:8080/v1"
  std::string base_url;
  std::string model;
  std::string api_key;
  int timeout_s = 120;
};

/// Chat-completions client for OpenAI-compatible servers. Tool results and
/// incoming agent messages are sent as user turns. wall_time_ms is the
/// measured round trip; output tokens come from the usage block when
/// present. Transport and protocol failures raise BackendUnavailable.
class HttpBackend final : public ModelBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);
  ModelResponse complete(const ModelRequest& request) override;

  /// The request body sent for `request`; exposed for tests.
  Json request_body(const ModelRequest& request) const;

 private:
  HttpBackendOptions options_;
  std::string origin_;
  std::string path_prefix_;
};

/// Parses a chat-completions response body.
ModelResponse parse_chat_completion(const Json& body);

}  // namespace agentcollab
