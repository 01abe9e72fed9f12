#include "fixtures.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>

#include "agentcollab/tokenizer.hpp"

namespace agentcollab::testing {

fs::path source_path(std::string_view relative) {
  return fs::path(AGENTCOLLAB_SOURCE_DIR) / relative;
}

fs::path fresh_dir(std::string_view name) {
  auto dir = fs::temp_directory_path() / "agentcollab-tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ToolCall tool(std::string name, Json arguments) {
  ToolCall c;
  c.tool_name = std::move(name);
  c.arguments = std::move(arguments);
  return c;
}

ToolCall message_to(std::string recipient, std::string content) {
  return tool(std::string(kSendMessageTool),
              Json{{"recipient", std::move(recipient)}, {"content", std::move(content)}});
}

ScriptedResponse say(std::string text, std::int64_t wall_ms) {
  ScriptedResponse r;
  r.text = std::move(text);
  r.wall_time_ms = wall_ms;
  return r;
}

ScriptedResponse use(std::vector<ToolCall> calls, std::int64_t wall_ms) {
  ScriptedResponse r;
  r.tool_calls = std::move(calls);
  r.wall_time_ms = wall_ms;
  return r;
}

ScriptedResponse outage() {
  ScriptedResponse r;
  r.unavailable = true;
  return r;
}

namespace {

ToolParameter param(std::string name, bool required = true) {
  ToolParameter p;
  p.name = std::move(name);
  p.required = required;
  return p;
}

ToolSchema schema(std::string name, std::vector<ToolParameter> params) {
  ToolSchema t;
  t.name = std::move(name);
  t.description = "test tool";
  t.parameters = std::move(params);
  return t;
}

AgentProfile profile(AgentId id, std::vector<std::string> groups, std::vector<AgentId> subs,
                     std::string instruction = "") {
  AgentProfile p;
  p.agent_id = id;
  p.display_name = id;
  p.instruction = instruction.empty() ? "You are " + id + "." : std::move(instruction);
  p.action_groups = std::move(groups);
  p.sub_agents = std::move(subs);
  return p;
}

}  // namespace

AgentGraph mini_travel_graph() {
  ActionGroup flights{"BookFlight",
                      {schema("search_flight", {param("origin"), param("destination"),
                                                param("departure_date")}),
                       schema("book_flight", {param("flight_id"), param("passenger_name")})}};
  ActionGroup hotels{"BookHotel",
                     {schema("search_hotel", {param("location"), param("check_in"), param("check_out")}),
                      schema("book_hotel", {param("hotel_id"), param("guest_name")})}};
  return build_agent_graph(
      {profile("travel_agent", {}, {"flight_agent", "hotel_agent"}, "You plan trips."),
       profile("flight_agent", {"BookFlight"}, {}, "You search for flights and book flight tickets."),
       profile("hotel_agent", {"BookHotel"}, {}, "You search for hotels and book hotel rooms.")},
      {flights, hotels}, "travel");
}

AgentGraph layered_graph() {
  ActionGroup inv{"Invoices", {schema("get_invoice", {param("invoice_id")})}};
  ActionGroup ref{"Refunds", {schema("issue_refund", {param("order_id"), param("amount")})}};
  ActionGroup ship{"Shipping", {schema("track_package", {param("tracking_id")})}};
  return build_agent_graph(
      {profile("support", {}, {"billing", "shipping"}, "You answer customer questions."),
       profile("billing", {}, {"invoices", "refunds"}, "You handle billing, payment and charges."),
       profile("invoices", {"Invoices"}, {}, "You look up invoices and invoice copies."),
       profile("refunds", {"Refunds"}, {}, "You issue refunds for returned orders."),
       profile("shipping", {"Shipping"}, {}, "You track packages and delivery status.")},
      {inv, ref, ship}, "support");
}

std::string code_block(std::int64_t min_tokens, std::string_view name) {
  std::string body = "```python\n";
  body += "def " + std::string(name) + "(request):\n";
  int i = 0;
  while (count_output_tokens(body + "```") < min_tokens) {
    body += "    field_" + std::to_string(i) + " = request.get(\"field_" + std::to_string(i) +
            "\", None)\n";
    body += "    if field_" + std::to_string(i) + " is None:\n        return {\"status\": 400}\n";
    ++i;
  }
  body += "    return {\"status\": 200}\n```";
  return body;
}

namespace {

const std::vector<std::string> kWords{"flight", "hotel", "booked", "price", "Rochester", "June",
                                      "total", "the", "and", "results", "ok", "check"};
const std::vector<std::string> kTagLike{
    "</message>",          "<\\/message>",           "<\\\\/message>",
    "<message from=\"x\">", "</payload>",             "<payload id=\"p1\">",
    "<payload_ref id=\"p1\"/>", "<payload_ref id=\"p\"/>", "<payload_ref id='p1'/>",
    "<payload id=\"q3\">", "\\",                      "<",
    "```",                 "```js``",                 "&lt;/message&gt;"};
const std::vector<std::string> kOdd{"\r\n", "\t", "é", "日本", "\xF0\x9F\x99\x82", "\n\n", "  "};

std::string pick(std::mt19937_64& rng, const std::vector<std::string>& v) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

int roll(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

std::string random_block(std::mt19937_64& rng) {
  std::string b = "```" + std::string(roll(rng, 0, 1) ? "python" : "") + "\n";
  int lines = roll(rng, 0, 4);
  for (int i = 0; i < lines; ++i) {
    switch (roll(rng, 0, 5)) {
      case 0: b += "x = \"" + pick(rng, kTagLike) + "\"\n"; break;
      case 1: b += "  ```not a fence\n"; break;
      case 2: b += "```</payload>\n"; break;
      case 3: b += pick(rng, kOdd) + "\n"; break;
      default: b += "print(" + pick(rng, kWords) + ")\n"; break;
    }
  }
  b += "```";
  return b;
}

}  // namespace

std::string random_message_content(std::mt19937_64& rng) {
  std::string out;
  int parts = roll(rng, 0, 8);
  for (int i = 0; i < parts; ++i) {
    switch (roll(rng, 0, 5)) {
      case 0:
        // Blocks start and end on their own lines.
        if (!out.empty() && out.back() != '\n') out += '\n';
        out += random_block(rng) + (roll(rng, 0, 1) ? "\n" : " \n");
        break;
      case 1: out += pick(rng, kTagLike); break;
      case 2: out += pick(rng, kOdd); break;
      default: out += pick(rng, kWords) + " "; break;
    }
  }
  if (roll(rng, 0, 9) == 0) out += "\n```unterminated\nstill prose";
  return out;
}

// ---- randomized parallel sessions --------------------------------------------

namespace {

struct Planner {
  std::mt19937_64 rng;
  const AgentGraph* graph = nullptr;
  ParallelCase* out = nullptr;
  int query = 0;

  std::string safe_text() {
    std::string s;
    for (int i = roll(rng, 1, 6); i > 0; --i) s += pick(rng, kWords) + " ";
    return s;
  }

  ScriptedResponse timed(ScriptedResponse r) {
    r.wall_time_ms = roll(rng, 50, 2000);
    r.real_delay_us = roll(rng, 0, 3) == 0 ? 0 : roll(rng, 0, 3000);
    return r;
  }

  // Appends the script entries for one invocation of `agent`.
  void invocation(const AgentId& agent) {
    auto& list = out->script.by_caller[agent];
    const auto& subs = graph->profile(agent).sub_agents;
    if (!graph->is_root(agent) && roll(rng, 0, 11) == 0) {
      list.push_back(outage());
      return;
    }
    for (int round = roll(rng, 0, 2); round > 0; --round) {
      if (!subs.empty() && roll(rng, 0, 4) < 3) {
        std::vector<ToolCall> sends;
        std::vector<AgentId> order;
        for (int k = roll(rng, 1, 4); k > 0; --k) {
          auto to = subs[std::uniform_int_distribution<std::size_t>(0, subs.size() - 1)(rng)];
          auto content = graph->is_root(agent) ? safe_text() : random_message_content(rng);
          sends.push_back(message_to(to, content));
          order.push_back(to);
        }
        list.push_back(timed(use(sends)));
        for (const auto& to : order) invocation(to);
      } else {
        std::vector<ToolCall> calls;
        for (int k = roll(rng, 1, 2); k > 0; --k) {
          auto q = agent + "-q" + std::to_string(++query);
          calls.push_back(tool("lookup_" + agent, Json{{"q", q}}));
          out->actions["lookup_" + agent].push_back(
              Json{{"match", {{"q", q}}}, {"result", "result for " + q},
                   {"latency_ms", roll(rng, 0, 800)}, {"error", roll(rng, 0, 9) == 0}});
        }
        list.push_back(timed(use(calls)));
      }
    }
    list.push_back(timed(say(random_message_content(rng))));
  }
};

}  // namespace

ParallelCase random_parallel_case(std::uint64_t seed) {
  ParallelCase c;
  std::mt19937_64 rng(seed);
  std::vector<AgentProfile> profiles;
  std::vector<ActionGroup> groups;
  auto add = [&](const AgentId& id, std::vector<AgentId> subs) {
    profiles.push_back(profile(id, {"G_" + id}, std::move(subs)));
    groups.push_back({"G_" + id, {schema("lookup_" + id, {param("q")})}});
  };
  std::vector<AgentId> top;
  int width = roll(rng, 2, 4);
  for (int i = 1; i <= width; ++i) {
    auto id = "s" + std::to_string(i);
    top.push_back(id);
    std::vector<AgentId> leaves;
    if (roll(rng, 0, 9) < 4) {
      for (int j = 1, n = roll(rng, 2, 3); j <= n; ++j) leaves.push_back(id + "_" + std::to_string(j));
    }
    for (const auto& leaf : leaves) add(leaf, {});
    add(id, leaves);
  }
  add("sup", top);
  c.graph = build_agent_graph(profiles, groups, "random");
  c.script.base_ms = 100;

  Planner p{std::mt19937_64(seed * 7919 + 1), &c.graph, &c, 0};
  for (int t = roll(rng, 1, 2); t > 0; --t) {
    c.user_turns.push_back("turn " + std::to_string(c.user_turns.size() + 1) + ": " + p.safe_text());
    // The root always delegates at least once per turn.
    auto& root = c.script.by_caller["sup"];
    std::vector<ToolCall> sends;
    std::vector<AgentId> order;
    for (int k = roll(rng, 2, 5); k > 0; --k) {
      auto to = top[std::uniform_int_distribution<std::size_t>(0, top.size() - 1)(rng)];
      sends.push_back(message_to(to, p.safe_text()));
      order.push_back(to);
    }
    root.push_back(p.timed(use(sends)));
    for (const auto& to : order) p.invocation(to);
    c.script.by_caller["sup"].push_back(p.timed(say("summary " + p.safe_text())));
  }
  return c;
}

ParallelRun run_parallel_case(const ParallelCase& c, bool concurrent) {
  ScriptedBackend backend(c.script);
  ScriptedActionSimulator actions(c.actions);
  SessionConfig config;
  config.concurrent_dispatch = concurrent;
  Session session("parallel", c.graph, backend, &actions, config);
  ParallelRun run;
  for (const auto& turn : c.user_turns) run.replies.push_back(session.handle_user_message(turn).content);
  run.events = session.events();
  run.unconsumed = backend.unconsumed();
  return run;
}

TrajectoryEvent without_timing(TrajectoryEvent e) {
  e.start_ms = 0;
  e.end_ms = 0;
  return e;
}

bool same_modulo_interleaving(const std::vector<TrajectoryEvent>& a,
                              const std::vector<TrajectoryEvent>& b, std::string* why) {
  // A chat belongs to the channel between its two ends; anything else to
  // the agent that acted.
  auto channel = [](const TrajectoryEvent& e) {
    if (e.kind != EventKind::chat) return e.agent;
    auto [lo, hi] = std::minmax(e.sender, e.recipient);
    return lo + "<>" + hi;
  };
  auto by_channel = [&](const std::vector<TrajectoryEvent>& log) {
    std::map<std::string, std::vector<TrajectoryEvent>> out;
    for (auto e : log) {
      e.seq = 0;
      out[channel(e)].push_back(without_timing(e));
    }
    return out;
  };
  // Payload ids follow global registration order, which depends on the
  // interleaving; renumber them by first use in channel order.
  auto renumber = [](std::map<std::string, std::vector<TrajectoryEvent>> channels) {
    static const std::regex tag(R"re(<payload(_ref)? id="(p[0-9]+)")re");
    std::map<std::string, std::string> ids;
    for (auto& [_, events] : channels) {
      for (auto& e : events) {
        std::string out;
        auto last = e.content.cbegin();
        for (std::sregex_iterator it(e.content.begin(), e.content.end(), tag), end; it != end; ++it) {
          const auto& m = *it;
          auto [pos, fresh] = ids.try_emplace(m[2].str(), "q" + std::to_string(ids.size() + 1));
          out.append(last, m[0].first);
          out += "<payload" + m[1].str() + " id=\"" + pos->second + "\"";
          last = m[0].second;
        }
        out.append(last, e.content.cend());
        e.content = std::move(out);
      }
    }
    return channels;
  };
  auto explain = [&](std::string text) {
    if (why) *why = std::move(text);
    return false;
  };
  if (a.size() != b.size()) {
    return explain(std::to_string(a.size()) + " vs " + std::to_string(b.size()) + " events");
  }
  auto x = renumber(by_channel(a));
  auto y = renumber(by_channel(b));
  for (const auto& [key, events] : x) {
    if (events != y[key]) return explain("events on " + key + " differ");
  }
  return x.size() == y.size() || explain("different channels");
}

// ---- metric fixtures ----------------------------------------------------------

std::vector<SessionVerdicts> gsr_fixture() {
  std::vector<SessionVerdicts> out;
  for (int i = 1; i <= 30; ++i) {
    SessionVerdicts s;
    s.session_id = "travel-" + std::to_string(i);
    s.supervisor_reliable = i <= 27;
    // Every fifth session has no user-side assertions.
    int users = i % 5 == 0 ? 0 : 1 + i % 3;
    for (int k = 1; k <= users; ++k) {
      s.verdicts.push_back({"u" + std::to_string(k), AssertionSide::user, true, "seen"});
    }
    int systems = 2 + i % 4;
    for (int k = 1; k <= systems; ++k) {
      bool ok = !(i > 27 && k == systems);
      s.verdicts.push_back({"s" + std::to_string(k), AssertionSide::system, ok, ok ? "done" : "missing"});
    }
    out.push_back(std::move(s));
  }
  return out;
}

RoutingFixture routing_fixture() {
  RoutingFixture f;
  const std::vector<std::string> agents{"flight_agent", "hotel_agent", "weather_agent"};
  auto add = [&](int i, const std::string& gold, const std::string& decision) {
    RoutingDecision d;
    d.session_id = "s" + std::to_string(i / 4);
    d.turn = i % 4 + 1;
    d.layer = 1;
    d.decider = "travel_agent";
    d.decision = decision;
    d.confidence = decision == std::string(kOrchestrate) ? 0.4 : 0.9;
    d.classify_latency_ms = 300 + (i * 37) % 100;
    f.decisions.push_back(d);
    f.gold.push_back({d.session_id, d.turn, 1, gold});
  };
  int i = 0;
  const std::string orch(kOrchestrate);
  for (int k = 0; k < 60; ++k, ++i) add(i, agents[k % 3], agents[k % 3]);
  for (int k = 0; k < 32; ++k, ++i) add(i, orch, orch);
  for (int k = 0; k < 5; ++k, ++i) add(i, agents[k % 3], orch);
  add(i, "flight_agent", "hotel_agent"), ++i;
  add(i, "weather_agent", "flight_agent"), ++i;
  add(i, orch, "hotel_agent"), ++i;
  return f;
}

// ---- payload ablation ---------------------------------------------------------

AblationRun run_ablation(bool referencing) {
  ActionGroup dev{"SoftwareDevelopment", {schema("run_tests", {param("code"), param("tests")})}};
  auto graph = build_agent_graph(
      {profile("software_agent", {}, {"code_agent", "test_agent"}, "You lead a software team."),
       profile("code_agent", {}, {}, "You implement code."),
       profile("test_agent", {"SoftwareDevelopment"}, {}, "You test code.")},
      {dev}, "software");
  AblationRun run;
  run.block = code_block(500);
  auto pass = [&](const std::string& lead) {
    return lead + (referencing ? "<payload_ref id=\"p1\"/>" : run.block);
  };
  Script script;
  script.by_caller["software_agent"] = {
      use({message_to("code_agent", "Implement a request handler that validates every field.")}, 1200),
      use({message_to("test_agent", pass("Write unit tests for this handler and run them:\n"))}, 1800),
      use({message_to("test_agent", pass("Add tests for missing fields and run them against the same handler:\n"))}, 1800),
      say("The handler is implemented and both test rounds pass.", 900)};
  script.by_caller["code_agent"] = {say("Here is the handler:\n\n" + run.block + "\n", 9000)};
  script.by_caller["test_agent"] = {
      use({tool("run_tests", Json{{"code", "handler.py"}, {"tests", "test_handler.py"}})}, 1500),
      say("14 unit tests pass.", 600),
      use({tool("run_tests", Json{{"code", "handler.py"}, {"tests", "test_missing_fields.py"}})}, 1500),
      say("All missing-field tests pass.", 600)};
  ScriptedBackend backend(script);
  ScriptedActionSimulator actions(
      Json{{"run_tests", Json::array({Json{{"match", Json::object()}, {"result", "passed"}, {"latency_ms", 2000}}})}});
  SessionConfig config;
  config.payload_referencing = referencing;
  Session session(referencing ? "ablation-on" : "ablation-off", graph, backend, &actions, config);
  session.handle_user_message("Build and test a request handler.");
  run.events = session.events();
  for (const auto& e : run.events) {
    if (e.kind == EventKind::model_call && e.agent == "software_agent") {
      run.supervisor_model_tokens += e.output_token_count;
    }
    if (e.kind == EventKind::chat && !e.reply && e.recipient == "test_agent") {
      run.test_agent_inputs.push_back(e.content);
    }
  }
  run.latency = compute_latency({{session.session_id(), run.events}}, graph.root());
  return run;
}

// ---- golden runs --------------------------------------------------------------

std::vector<std::string> golden_domains() { return {"travel", "mortgage", "software"}; }

RunConfig golden_config(const std::string& domain, const fs::path& out) {
  RunConfig c;
  c.mode = RunMode::coordination;
  c.scenarios = fs::path("data/scenarios") / domain;
  c.profiles = fs::path("data/profiles") / (domain + ".json");
  c.backend = "scripted:data/scripts/" + domain;
  c.seed = 7;
  c.out = out;
  return c;
}

fs::path golden_dir(const std::string& domain) { return source_path("tests/golden") / domain; }

namespace {

std::set<std::string> files_under(const fs::path& root) {
  std::set<std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.insert(fs::relative(e.path(), root).generic_string());
  }
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::vector<std::string> diff_run_dirs(const fs::path& expected, const fs::path& actual) {
  std::vector<std::string> diffs;
  auto want = files_under(expected);
  auto got = files_under(actual);
  if (want.empty()) diffs.push_back("(no golden files under " + expected.string() + ")");
  for (const auto& f : want) {
    if (!got.contains(f)) diffs.push_back(f + ": missing");
    else if (slurp(expected / f) != slurp(actual / f)) diffs.push_back(f + ": differs");
  }
  for (const auto& f : got) {
    if (!want.contains(f)) diffs.push_back(f + ": unexpected");
  }
  return diffs;
}

void copy_run_dir(const fs::path& from, const fs::path& to) {
  fs::remove_all(to);
  fs::create_directories(to);
  fs::copy(from, to, fs::copy_options::recursive);
}

}  // namespace agentcollab::testing
