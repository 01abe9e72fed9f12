#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "agentcollab/agent_graph.hpp"
#include "agentcollab/harness.hpp"
#include "agentcollab/metrics.hpp"
#include "agentcollab/routing.hpp"
#include "agentcollab/run.hpp"
#include "agentcollab/scripted_backend.hpp"
#include "agentcollab/session.hpp"

namespace agentcollab::testing {

namespace fs = std::filesystem;

fs::path source_path(std::string_view relative);
// Empty scratch directory under the system temp dir.
fs::path fresh_dir(std::string_view name);

ToolCall tool(std::string name, Json arguments);
ToolCall message_to(std::string recipient, std::string content);
ScriptedResponse say(std::string text, std::int64_t wall_ms = 1000);
ScriptedResponse use(std::vector<ToolCall> calls, std::int64_t wall_ms = 1000);
ScriptedResponse outage();

// travel_agent -> {flight_agent, hotel_agent}; flight tools search_flight and
// book_flight, hotel tools search_hotel and book_hotel.
AgentGraph mini_travel_graph();

// support -> {billing -> {invoices, refunds}, shipping}. Three agent layers.
AgentGraph layered_graph();

// Fenced code block of at least `min_tokens` output tokens.
std::string code_block(std::int64_t min_tokens, std::string_view name = "handler");

// Specialist-style message text: prose, fenced blocks, message and payload
// tag look-alikes, backslashes, CRLF and non-ASCII bytes.
std::string random_message_content(std::mt19937_64& rng);

// A random tree plus a script in which agents delegate in parallel (with
// repeated recipients), call tools, and occasionally fail.
struct ParallelCase {
  AgentGraph graph;
  Script script;
  Json actions = Json::object();
  std::vector<std::string> user_turns;
};
ParallelCase random_parallel_case(std::uint64_t seed);

struct ParallelRun {
  std::vector<TrajectoryEvent> events;
  std::vector<std::string> replies;
  std::vector<std::string> unconsumed;
};
ParallelRun run_parallel_case(const ParallelCase& c, bool concurrent);

TrajectoryEvent without_timing(TrajectoryEvent e);

// True when both logs hold the same events on every channel in the same
// order. A chat's channel is its sender/recipient pair, any other event's
// is its agent; seq and timing are ignored. Explains the first difference
// in `why`.
bool same_modulo_interleaving(const std::vector<TrajectoryEvent>& a,
                              const std::vector<TrajectoryEvent>& b, std::string* why = nullptr);

// 30 judged sessions: 27 pass everything, 3 fail one system-side assertion
// and are not supervisor-reliable; several have no user-side assertions.
std::vector<SessionVerdicts> gsr_fixture();

// 100 layer-1 decisions: 92 match gold, 3 are false switches, 5 orchestrate
// where gold names an agent.
struct RoutingFixture {
  std::vector<RoutingDecision> decisions;
  std::vector<RoutingGoldLabel> gold;
};
RoutingFixture routing_fixture();

// A supervisor relays a ~500-token block from the code agent to the test
// agent twice. With referencing on it writes reference tags; off, it
// repeats the block.
struct AblationRun {
  std::vector<TrajectoryEvent> events;
  LatencyReport latency;
  std::int64_t supervisor_model_tokens = 0;
  std::vector<std::string> test_agent_inputs;
  std::string block;
};
AblationRun run_ablation(bool referencing);

// Golden runs, one per domain shape, with paths relative to the repository.
std::vector<std::string> golden_domains();
RunConfig golden_config(const std::string& domain, const fs::path& out);
fs::path golden_dir(const std::string& domain);
// Files that differ, are missing or are extra, relative to the run root.
std::vector<std::string> diff_run_dirs(const fs::path& expected, const fs::path& actual);
void copy_run_dir(const fs::path& from, const fs::path& to);

}  // namespace agentcollab::testing
