#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "agentcollab/error.hpp"
#include "agentcollab/http_backend.hpp"
#include "fixtures.hpp"

using namespace agentcollab;
using namespace agentcollab::testing;

namespace {

// Minimal chat-completions server on a free local port.
class MockServer {
 public:
  explicit MockServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/v1/chat/completions", [this, handler](const httplib::Request& req, httplib::Response& res) {
      {
        std::lock_guard lock(mutex_);
        bodies_.push_back(Json::parse(req.body));
        auth_ = req.get_header_value("Authorization");
      }
      handler(req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  Json last_body() {
    std::lock_guard lock(mutex_);
    return bodies_.back();
  }
  std::string auth() {
    std::lock_guard lock(mutex_);
    return auth_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mutex_;
  std::vector<Json> bodies_;
  std::string auth_;
};

ModelRequest request() {
  ModelRequest r;
  r.caller = "travel_agent";
  r.system_prompt = "You plan trips.";
  r.messages = {{Role::user, "hi"}, {Role::assistant, "hello"}, {Role::tool, "[c1] UA 1"}};
  r.seed = 9;
  ToolSchema t;
  t.name = "search_flight";
  t.description = "Search";
  ToolParameter origin;
  origin.name = "origin";
  ToolParameter cabin;
  cabin.name = "cabin";
  cabin.required = false;
  cabin.allowed_values = {"economy"};
  t.parameters = {origin, cabin};
  r.tools = {t};
  return r;
}

void reply_json(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

TEST(HttpBackend, RequestBody) {
  HttpBackend backend({"http://localhost:1/v1", "gpt-test", "", 5});
  auto body = backend.request_body(request());
  EXPECT_EQ(body["model"], "gpt-test");
  EXPECT_EQ(body["seed"], 9);
  ASSERT_EQ(body["messages"].size(), 4u);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][2]["role"], "assistant");
  EXPECT_EQ(body["messages"][3]["role"], "user");
  const auto& fn = body["tools"][0]["function"];
  EXPECT_EQ(fn["name"], "search_flight");
  EXPECT_EQ(fn["parameters"]["required"], Json::array({"origin"}));
  EXPECT_EQ(fn["parameters"]["properties"]["cabin"]["enum"], Json::array({"economy"}));
  EXPECT_THROW(HttpBackend({"localhost:1", "m", "", 5}), Error);
}

TEST(HttpBackend, ParsesCompletions) {
  auto text = parse_chat_completion(Json::parse(
      R"({"choices":[{"message":{"role":"assistant","content":"Hi there"}}],"usage":{"completion_tokens":3}})"));
  EXPECT_EQ(text.text, "Hi there");
  EXPECT_EQ(text.output_token_count, 3);
  auto calls = parse_chat_completion(Json::parse(R"({"choices":[{"message":{"content":null,"tool_calls":[
      {"id":"call_1","type":"function","function":{"name":"search_flight","arguments":"{\"origin\":\"DEN\"}"}}]}}]})"));
  ASSERT_EQ(calls.tool_calls.size(), 1u);
  EXPECT_EQ(calls.tool_calls[0].call_id, "call_1");
  EXPECT_EQ(calls.tool_calls[0].arguments["origin"], "DEN");
  EXPECT_EQ(calls.output_token_count, -1);
  EXPECT_THROW(parse_chat_completion(Json::parse(R"({"choices":[]})")), Error);
  try {
    parse_chat_completion(Json::parse(
        R"({"choices":[{"message":{"tool_calls":[{"function":{"name":"t","arguments":"{oops"}}]}}]})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedToolCall);
  }
}

TEST(HttpBackend, TalksToAServer) {
  MockServer server([](const httplib::Request&, httplib::Response& res) {
    reply_json(res, Json::parse(R"({"choices":[{"message":{"content":"Found UA 1."}}],"usage":{"completion_tokens":4}})"));
  });
  HttpBackend backend({server.base_url(), "m1", "sk-test", 5});
  auto r = invoke(backend, request());
  EXPECT_EQ(r.text, "Found UA 1.");
  EXPECT_EQ(r.output_token_count, 4);
  EXPECT_GE(r.wall_time_ms, 0);
  EXPECT_EQ(server.auth(), "Bearer sk-test");
  EXPECT_EQ(server.last_body()["model"], "m1");
}

TEST(HttpBackend, FailuresAreBackendUnavailable) {
  MockServer server([](const httplib::Request& req, httplib::Response& res) {
    if (req.body.find("\"m-500\"") != std::string::npos) {
      reply_json(res, Json{{"error", "boom"}}, 500);
    } else {
      res.set_content("not json", "text/plain");
    }
  });
  for (std::string model : {"m-500", "m-text"}) {
    HttpBackend backend({server.base_url(), model, "", 5});
    try {
      backend.complete(request());
      ADD_FAILURE() << model;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BackendUnavailable) << model;
    }
  }
  HttpBackend nobody({"http://127.0.0.1:1/v1", "m", "", 1});
  EXPECT_THROW(nobody.complete(request()), Error);
}
