#include <gtest/gtest.h>

#include "agentcollab/error.hpp"
#include "agentcollab/memory.hpp"
#include "agentcollab/session.hpp"
#include "agentcollab/tokenizer.hpp"
#include "fixtures.hpp"

using namespace agentcollab;
using namespace agentcollab::testing;

namespace {

class Echo final : public ActionExecutor {
 public:
  ToolResult execute(const AgentId& agent, const ToolCall& call, const ToolSchema&) override {
    if (call.tool_name == "book_flight") fail(ErrorCode::SchemaMismatch, "sold out");
    return {agent + " ran " + call.tool_name, false, 250};
  }
};

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Io;
}

std::vector<EventKind> kinds(const std::vector<TrajectoryEvent>& events) {
  std::vector<EventKind> out;
  for (const auto& e : events) out.push_back(e.kind);
  return out;
}

}  // namespace

TEST(Session, SendMessageRecordsBothEndsInSenderMemory) {
  auto g = mini_travel_graph();
  Script s;
  s.by_caller["flight_agent"] = {say("Found UA 123 at $420.", 500)};
  ScriptedBackend backend(s);
  Session session("s", g, backend, nullptr);
  auto reply = session.send_message("travel_agent", "flight_agent", "Find DEN to RST on June 23");
  EXPECT_EQ(reply.content, "Found UA 123 at $420.");
  EXPECT_EQ(reply.sender, "flight_agent");
  EXPECT_EQ(session.now_ms(), 500);

  const auto& sup = session.memory("travel_agent").events();
  ASSERT_EQ(sup.size(), 2u);
  EXPECT_EQ(sup[0].recipient, "flight_agent");
  EXPECT_FALSE(sup[0].reply);
  EXPECT_TRUE(sup[1].reply);
  EXPECT_EQ(sup[1].duration_ms(), 500);
  EXPECT_EQ(kinds(session.memory("flight_agent").events()),
            (std::vector<EventKind>{EventKind::chat, EventKind::model_call}));
  EXPECT_TRUE(session.memory("hotel_agent").events().empty());

  // The recipient saw the message in the tagged format.
  auto turns = session.memory("flight_agent").render();
  EXPECT_EQ(turns[0].content, "<message from=\"travel_agent\">\nFind DEN to RST on June 23\n</message>");
  EXPECT_EQ(session.events().back().seq, 3);
}

TEST(Session, CommunicationErrors) {
  auto g = layered_graph();
  Script s;
  ScriptedBackend backend(s);
  SessionConfig cfg;
  cfg.max_delegation_depth = 1;
  Session session("s", g, backend, nullptr, cfg);
  EXPECT_EQ(code_of([&] { session.send_message("support", "ghost", "hi"); }), ErrorCode::UnknownRecipient);
  EXPECT_EQ(code_of([&] { session.send_message("support", "invoices", "hi"); }),
            ErrorCode::RecipientNotVisible);
  EXPECT_EQ(code_of([&] { session.send_message("billing", "support", "hi"); }),
            ErrorCode::RecipientNotVisible);
  EXPECT_EQ(code_of([&] { session.send_message("billing", "invoices", "hi"); }), ErrorCode::DepthExceeded);
  // Each failure is an error tool result in the sender's log, not a chat.
  for (const auto& e : session.events()) EXPECT_NE(e.kind, EventKind::chat);
  EXPECT_EQ(session.events().size(), 8u);
  EXPECT_TRUE(session.events()[1].error);
}

TEST(Session, TurnBudget) {
  auto g = mini_travel_graph();
  Script s;
  s.by_caller["flight_agent"] = {say("f")};
  ScriptedBackend backend(s);
  SessionConfig cfg;
  cfg.message_budget = 1;
  Session session("s", g, backend, nullptr, cfg);
  auto out = session.dispatch_parallel(
      "travel_agent", {{"flight_agent", "a", "c1"}, {"hotel_agent", "b", "c2"}});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].ok());
  ASSERT_TRUE(out[1].error.has_value());
  EXPECT_EQ(out[1].error->code(), ErrorCode::TurnBudgetExceeded);
}

TEST(Session, IterationCap) {
  auto g = mini_travel_graph();
  Script s;
  auto search = tool("search_flight", {{"origin", "DEN"}, {"destination", "RST"}, {"departure_date", "06-23"}});
  s.by_caller["flight_agent"] = {use({search}), use({search})};
  ScriptedBackend backend(s);
  Echo echo;
  SessionConfig cfg;
  cfg.iteration_cap = 2;
  Session session("s", g, backend, &echo, cfg);
  EXPECT_EQ(code_of([&] { session.send_message("travel_agent", "flight_agent", "go"); }),
            ErrorCode::IterationCapExceeded);
  EXPECT_TRUE(session.events().back().reply);
  EXPECT_TRUE(session.events().back().error);
}

TEST(Session, ActionsAndToolErrors) {
  auto g = mini_travel_graph();
  Script s;
  s.by_caller["flight_agent"] = {
      use({tool("search_flight", {{"origin", "DEN"}, {"destination", "RST"}, {"departure_date", "06-23"}}),
           tool("book_flight", {{"flight_id", "UA1"}, {"passenger_name", "Ana"}}),
           tool("book_hotel", {{"hotel_id", "h"}, {"guest_name", "Ana"}})},
          100),
      say("Could not book.", 100)};
  ScriptedBackend backend(s);
  Echo echo;
  Session session("s", g, backend, &echo);
  auto reply = session.send_message("travel_agent", "flight_agent", "book it");
  EXPECT_EQ(reply.content, "Could not book.");
  std::vector<const TrajectoryEvent*> results;
  for (const auto& e : session.events()) {
    if (e.kind == EventKind::tool_result) results.push_back(&e);
  }
  ASSERT_EQ(results.size(), 3u);
  EXPECT_FALSE(results[0]->error);
  EXPECT_EQ(results[0]->duration_ms(), 250);
  EXPECT_TRUE(results[1]->error);
  EXPECT_NE(results[1]->content.find("sold out"), std::string::npos);
  EXPECT_TRUE(results[2]->error);
  EXPECT_NE(results[2]->content.find("UnknownTool"), std::string::npos);
  EXPECT_EQ(session.now_ms(), 100 + 250 + 100);
}

TEST(Session, MalformedSendMessageIsAToolError) {
  auto g = mini_travel_graph();
  Script s;
  s.by_caller["travel_agent"] = {use({tool("send_message", {{"recipient", "flight_agent"}})}), say("sorry")};
  ScriptedBackend backend(s);
  Session session("s", g, backend, nullptr);
  EXPECT_EQ(session.handle_user_message("hi").content, "sorry");
  bool found = false;
  for (const auto& e : session.events()) {
    if (e.kind == EventKind::tool_result && e.error) found = e.content.find("MalformedToolCall") != std::string::npos;
  }
  EXPECT_TRUE(found);
}

TEST(Session, ParallelChannelsOverlapOnTheClock) {
  auto g = mini_travel_graph();
  for (bool concurrent : {true, false}) {
    Script s;
    s.by_caller["flight_agent"] = {say("F", 1000)};
    s.by_caller["hotel_agent"] = {say("H", 3000)};
    ScriptedBackend backend(s);
    SessionConfig cfg;
    cfg.concurrent_dispatch = concurrent;
    Session session("s", g, backend, nullptr, cfg);
    auto out = session.dispatch_parallel("travel_agent",
                                         {{"hotel_agent", "room", "c1"}, {"flight_agent", "seat", "c2"}});
    EXPECT_EQ(out[0].response->content, "H");
    EXPECT_EQ(out[1].response->content, "F");
    EXPECT_EQ(session.now_ms(), concurrent ? 3000 : 4000);
  }
}

TEST(Session, RepeatedRecipientIsServedInOrder) {
  auto g = mini_travel_graph();
  Script s;
  s.by_caller["flight_agent"] = {say("first", 1000), say("second", 1000)};
  s.by_caller["hotel_agent"] = {say("H", 500)};
  ScriptedBackend backend(s);
  Session session("s", g, backend, nullptr);
  auto out = session.dispatch_parallel(
      "travel_agent", {{"flight_agent", "a", "c1"}, {"hotel_agent", "b", "c2"}, {"flight_agent", "c", "c3"}});
  EXPECT_EQ(out[0].response->content, "first");
  EXPECT_EQ(out[1].response->content, "H");
  EXPECT_EQ(out[2].response->content, "second");
  EXPECT_EQ(session.now_ms(), 2000);
}

TEST(Session, UserTurnShape) {
  auto g = mini_travel_graph();
  Script s;
  s.by_caller["travel_agent"] = {use({message_to("flight_agent", "search")}, 400), say("Here are flights.", 600)};
  s.by_caller["flight_agent"] = {say("UA 1", 700)};
  ScriptedBackend backend(s);
  Session session("s", g, backend, nullptr);
  auto reply = session.handle_user_message("Find me a flight");
  EXPECT_EQ(reply.content, "Here are flights.");
  EXPECT_EQ(session.turn(), 1);
  const auto& ev = session.events();
  ASSERT_EQ(ev.size(), 7u);
  EXPECT_EQ(ev.front().sender, "user");
  EXPECT_EQ(ev.back().recipient, "user");
  EXPECT_EQ(ev.back().duration_ms(), 400 + 700 + 600);
  int visible = 0;
  for (const auto& e : ev) visible += is_user_visible(e) ? 1 : 0;
  EXPECT_EQ(visible, 2);
  // The flight agent's model call overlaps nothing; it sits inside the chat span.
  EXPECT_EQ(ev[3].start_ms, 400);
  EXPECT_EQ(ev[3].end_ms, 1100);
}

TEST(Session, ReplayedMemoriesMatchLiveOnes) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto c = random_parallel_case(seed);
    ScriptedBackend backend(c.script);
    ScriptedActionSimulator actions(c.actions);
    Session session("p", c.graph, backend, &actions);
    for (const auto& t : c.user_turns) {
      try {
        session.handle_user_message(t);
      } catch (const Error&) {
      }
    }
    auto replayed = replay_memories(session.events());
    for (const auto& [agent, live] : session.memories()) {
      if (live.events().empty()) continue;
      ASSERT_TRUE(replayed.contains(agent)) << agent;
      EXPECT_EQ(replayed.at(agent).events(), live.events()) << "seed " << seed << " " << agent;
    }
  }
}

TEST(Session, ChannelComparisonNoticesReordering) {
  auto c = random_parallel_case(2);
  auto run = run_parallel_case(c, true);
  EXPECT_TRUE(same_modulo_interleaving(run.events, run.events));
  // Swap the first two events on one channel.
  for (std::size_t i = 0; i + 1 < run.events.size(); ++i) {
    auto& a = run.events[i];
    auto& b = run.events[i + 1];
    if (a.agent == b.agent && a.kind == EventKind::model_call && b.kind == EventKind::model_call &&
        a.content != b.content) {
      auto swapped = run.events;
      std::swap(swapped[i], swapped[i + 1]);
      EXPECT_FALSE(same_modulo_interleaving(run.events, swapped));
      return;
    }
  }
  auto changed = run.events;
  changed.back().content += "!";
  EXPECT_FALSE(same_modulo_interleaving(run.events, changed));
}

TEST(Session, PayloadReferencingKeepsDeliveredTextIdentical) {
  auto on = run_ablation(true);
  auto off = run_ablation(false);
  EXPECT_EQ(on.test_agent_inputs, off.test_agent_inputs);
  ASSERT_FALSE(on.test_agent_inputs.empty());
  EXPECT_NE(on.test_agent_inputs.front().find(on.block), std::string::npos);
  EXPECT_LT(on.supervisor_model_tokens, off.supervisor_model_tokens);
}

TEST(Session, OnlyTheRootWrapsPayloads) {
  auto g = layered_graph();
  auto block = code_block(40);
  Script s;
  s.by_caller["invoices"] = {say("Invoice:\n" + block + "\n")};
  s.by_caller["billing"] = {use({message_to("invoices", "get it")}), say("Done:\n" + block + "\n")};
  ScriptedBackend backend(s);
  Session session("s", g, backend, nullptr);
  auto reply = session.send_message("support", "billing", "invoice 7");
  EXPECT_EQ(session.payloads().size(), 1u);
  EXPECT_NE(reply.content.find("<payload id=\"p1\">"), std::string::npos);
  for (const auto& e : session.events()) {
    if (e.recipient == "billing" && e.reply) EXPECT_EQ(e.content.find("<payload"), std::string::npos);
  }
  EXPECT_NE(payload_instructions().find("payload_ref"), std::string::npos);
}
