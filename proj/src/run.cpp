#include "agentcollab/run.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <set>
#include <thread>

#include "agentcollab/error.hpp"
#include "agentcollab/http_backend.hpp"
#include "agentcollab/profile_io.hpp"
#include "agentcollab/scripted_backend.hpp"

namespace agentcollab {

namespace fs = std::filesystem;

std::string_view to_string(RunMode mode) noexcept {
  switch (mode) {
    case RunMode::coordination: return "coordination";
    case RunMode::routing: return "routing";
    case RunMode::single_agent: return "single-agent";
  }
  return "coordination";
}

RunMode run_mode_from_string(std::string_view s) {
  if (s == "coordination") return RunMode::coordination;
  if (s == "routing") return RunMode::routing;
  if (s == "single-agent" || s == "single_agent") return RunMode::single_agent;
  fail(ErrorCode::InvalidConfig, "unknown mode " + std::string(s));
}

void validate_config(const RunConfig& c) {
  if (!fs::exists(c.scenarios)) fail(ErrorCode::Io, c.scenarios.string() + " does not exist");
  if (!fs::exists(c.profiles)) fail(ErrorCode::Io, c.profiles.string() + " does not exist");
  if (!c.backend.starts_with("scripted:") && !c.backend.starts_with("openai:")) {
    fail(ErrorCode::InvalidConfig, "backend must be scripted:<dir> or openai:<model>");
  }
  if (c.parallelism < 1) fail(ErrorCode::InvalidConfig, "parallelism must be >= 1");
  if (c.routing_threshold < 0.0 || c.routing_threshold > 1.0) {
    fail(ErrorCode::InvalidConfig, "routing threshold must be in [0, 1]");
  }
  if (c.judge != "oracle" && c.judge != "model") {
    fail(ErrorCode::InvalidConfig, "judge must be oracle or model");
  }
  if (c.classifier != "rule" && c.classifier != "model") {
    fail(ErrorCode::InvalidConfig, "classifier must be rule or model");
  }
  if (c.routing_gold && c.mode != RunMode::routing) {
    fail(ErrorCode::InvalidConfig, "routing gold labels need --mode routing");
  }
  if (c.routing_gold && !fs::exists(*c.routing_gold)) {
    fail(ErrorCode::Io, c.routing_gold->string() + " does not exist");
  }
  if (c.out.empty()) fail(ErrorCode::InvalidConfig, "output directory is required");
}

SessionBackend make_backend(const std::string& spec, const std::string& scenario_id) {
  SessionBackend out;
  if (spec.starts_with("scripted:")) {
    fs::path path = spec.substr(std::string("scripted:").size());
    if (fs::is_directory(path)) path /= scenario_id + ".json";
    auto doc = read_json_file(path);
    try {
      out.model = std::make_unique<ScriptedBackend>(script_from_json(doc));
    } catch (const Error& e) {
      fail(e.code(), path.string() + ": " + e.detail());
    }
    if (auto it = doc.find("actions"); it != doc.end()) out.actions = *it;
    return out;
  }
  if (spec.starts_with("openai:")) {
    HttpBackendOptions opts;
    opts.model = spec.substr(std::string("openai:").size());
    const char* url = std::getenv("AGENTCOLLAB_BASE_URL");
    const char* key = std::getenv("AGENTCOLLAB_API_KEY");
    opts.base_url = url ? url : "https://api.openai.com/v1";
    opts.api_key = key ? key : "";
    out.model = std::make_unique<HttpBackend>(opts);
    return out;
  }
  fail(ErrorCode::InvalidConfig, "unknown backend " + spec);
}

// ---- validate ---------------------------------------------------------------

namespace {

ValidationRow validate_file(const fs::path& path) {
  ValidationRow row{path.string(), "unknown", true, ""};
  try {
    auto doc = read_json_file(path);
    if (doc.is_object() && doc.contains("agents") && doc["agents"].is_array()) {
      row.kind = "profiles";
      auto g = graph_from_json(doc);
      std::size_t tools = 0;
      for (const auto& [_, group] : g.action_groups()) tools += group.tools.size();
      row.detail = std::to_string(g.size()) + " agents, " +
                   std::to_string(g.action_groups().size()) + " action groups, " +
                   std::to_string(tools) + " tools, depth " + std::to_string(g.depth());
    } else if (doc.is_object() && doc.contains("scenario_id")) {
      row.kind = "scenario";
      auto s = load_scenario(doc);
      row.detail = s.scenario_id + ": " + std::to_string(s.goals.size()) + " goals, " +
                   std::to_string(s.count(AssertionSide::user)) + " user-side, " +
                   std::to_string(s.count(AssertionSide::system)) + " system-side assertions";
    } else if (doc.is_object() && doc.contains("agents") && doc["agents"].is_object()) {
      row.kind = "script";
      auto script = script_from_json(doc);
      if (auto it = doc.find("actions"); it != doc.end()) ScriptedActionSimulator check(*it);
      row.detail = std::to_string(script.by_caller.size()) + " callers";
    } else if (doc.is_array() || (doc.is_object() && doc.contains("labels"))) {
      row.kind = "routing-gold";
      row.detail = std::to_string(gold_labels_from_json(doc).size()) + " labels";
    } else {
      fail(ErrorCode::SchemaViolation, "$: not a scenario, profile, script or gold-label document");
    }
  } catch (const Error& e) {
    row.ok = false;
    row.detail = e.what();
  }
  return row;
}

}  // namespace

std::vector<ValidationRow> cmd_validate(const std::vector<fs::path>& paths) {
  std::vector<ValidationRow> rows;
  for (const auto& p : paths) {
    if (!fs::exists(p)) {
      rows.push_back({p.string(), "missing", false, Error(ErrorCode::Io, "does not exist").what()});
      continue;
    }
    if (!fs::is_directory(p)) {
      rows.push_back(validate_file(p));
      continue;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(p)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) rows.push_back({p.string(), "directory", false, "no .json files"});
    for (const auto& f : files) rows.push_back(validate_file(f));
  }
  return rows;
}

std::string format_validation(const std::vector<ValidationRow>& rows) {
  std::vector<std::vector<std::string>> table{{"file", "kind", "status", "detail"}};
  std::size_t failed = 0;
  for (const auto& r : rows) {
    table.push_back({r.path, r.kind, r.ok ? "ok" : "FAIL", r.detail});
    failed += r.ok ? 0 : 1;
  }
  // Left-align everything; format_table right-aligns value columns.
  std::vector<std::size_t> width(4, 0);
  for (const auto& row : table) {
    for (std::size_t i = 0; i < 3; ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& row : table) {
    std::string line;
    for (std::size_t i = 0; i < 3; ++i) line += row[i] + std::string(width[i] - row[i].size() + 2, ' ');
    out += line + row[3] + "\n";
  }
  out += std::to_string(rows.size()) + " files, " + std::to_string(failed) + " failed\n";
  return out;
}

// ---- metrics and reports -----------------------------------------------------

RunMetrics compute_run_metrics(const RunData& run) {
  RunMetrics m;
  m.gsr = compute_gsr(run.verdicts);
  std::vector<SessionLog> logs;
  std::vector<RoutingDecision> decisions;
  std::vector<TurnRoutingTiming> timings;
  for (const auto& t : run.trajectories) {
    logs.push_back({t.session_id, t.events});
    for (auto& d : routing_decisions_from_log(t.events)) decisions.push_back(std::move(d));
    for (auto& x : turn_routing_timings(t.events, run.root)) timings.push_back(std::move(x));
  }
  m.latency = compute_latency(logs, run.root);
  m.routing_decisions = static_cast<std::int64_t>(decisions.size());
  if (!decisions.empty()) {
    RoutingMetricsReport r;
    if (run.gold) {
      try {
        r = routing_metrics(decisions, *run.gold, timings);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyJoin) throw;
      }
    }
    if (r.overall.decisions == 0) {
      // No labels: keep the timing side only.
      double lat = 0.0;
      for (const auto& d : decisions) lat += static_cast<double>(d.classify_latency_ms);
      r.unlabeled = m.routing_decisions;
      r.mean_classify_latency_ms = lat / static_cast<double>(decisions.size());
      double over = 0.0;
      for (const auto& t : timings) over += static_cast<double>(t.overhead_ms);
      r.timed_turns = static_cast<std::int64_t>(timings.size());
      r.mean_turn_overhead_ms = timings.empty() ? 0.0 : over / static_cast<double>(timings.size());
    }
    m.routing = r;
  }
  return m;
}

Json report_json(const RunData& run, const RunMetrics& m) {
  Json sessions = Json::array();
  for (std::size_t i = 0; i < run.trajectories.size(); ++i) {
    const auto& t = run.trajectories[i];
    const auto& ok = m.gsr.per_session[i];
    std::int64_t passed = 0;
    for (const auto& v : run.verdicts[i].verdicts) passed += v.verdict;
    sessions.push_back({{"session_id", t.session_id},
                        {"user_turns", t.user_turns},
                        {"ended_by", to_string(t.ended_by)},
                        {"overall", ok.overall},
                        {"user", ok.user},
                        {"system", ok.system},
                        {"supervisor_reliable", run.verdicts[i].supervisor_reliable},
                        {"assertions_passed", passed},
                        {"assertions", run.verdicts[i].verdicts.size()}});
  }
  Json j{{"run",
          {{"mode", run.info.value("mode", std::string())},
           {"payload_referencing", run.info.value("payload_referencing", true)},
           {"seed", run.info.value("seed", 0)},
           {"scenarios", run.trajectories.size()}}},
         {"gsr", gsr_to_json(m.gsr)},
         {"latency", latency_to_json(m.latency)}};
  if (m.routing) {
    auto r = routing_report_to_json(*m.routing);
    r["decisions"] = m.routing_decisions;
    j["routing"] = r;
  }
  j["sessions"] = sessions;
  return j;
}

namespace {

std::string rate(double value, std::int64_t passed, std::int64_t total) {
  return format_fixed(value, 2) + " (" + std::to_string(passed) + "/" + std::to_string(total) + ")";
}

std::string seconds(double ms) { return format_fixed(ms / 1000.0, 2); }

struct MetricRow {
  std::string label;
  std::optional<double> value;
  std::string shown;
};

std::vector<MetricRow> metric_rows(const RunMetrics& m) {
  const auto& g = m.gsr;
  const auto& l = m.latency;
  std::vector<MetricRow> rows{
      {"Overall GSR", g.overall_gsr, rate(g.overall_gsr, g.overall_passed, g.sessions)},
      {"Supervisor GSR", g.supervisor_gsr, rate(g.supervisor_gsr, g.supervisor_passed, g.sessions)},
      {"User-side GSR", g.user_gsr, rate(g.user_gsr, g.user_passed, g.sessions)},
      {"System-side GSR", g.system_gsr, rate(g.system_gsr, g.system_passed, g.sessions)},
      {"Avg. communication overhead per turn (s)", l.overhead_per_turn_ms / 1000.0,
       seconds(l.overhead_per_turn_ms)},
      {"Avg. latency per communication (s)", l.latency_per_communication_ms / 1000.0,
       seconds(l.latency_per_communication_ms)},
      {"Avg. user-perceived turn latency per session (s)", l.turn_latency_per_session_ms / 1000.0,
       seconds(l.turn_latency_per_session_ms)},
      {"Avg. communications per session", l.communications_per_session,
       format_fixed(l.communications_per_session, 2)},
      {"Avg. output tokens per communication", l.output_tokens_per_communication,
       format_fixed(l.output_tokens_per_communication, 2)}};
  if (m.routing) {
    const auto& r = *m.routing;
    if (r.overall.decisions > 0) {
      rows.push_back({"Routing classification accuracy", r.overall.accuracy,
                      rate(r.overall.accuracy, r.overall.correct, r.overall.decisions)});
      rows.push_back({"False agent switch rate", r.overall.false_switch_rate,
                      rate(r.overall.false_switch_rate, r.overall.false_switches,
                           r.overall.decisions)});
    }
    rows.push_back({"Avg. classification latency (s)", r.mean_classify_latency_ms / 1000.0,
                    seconds(r.mean_classify_latency_ms)});
    rows.push_back({"Avg. routing overhead per turn (s)", r.mean_turn_overhead_ms / 1000.0,
                    seconds(r.mean_turn_overhead_ms)});
  }
  return rows;
}

}  // namespace

std::string report_text(const RunData& run, const RunMetrics& m) {
  std::string out = "Run: " + run.info.value("mode", std::string("?")) +
                    ", payload referencing " +
                    (run.info.value("payload_referencing", true) ? "on" : "off") + ", " +
                    std::to_string(run.trajectories.size()) +
                    (run.trajectories.size() == 1 ? " scenario\n\n" : " scenarios\n\n");
  std::vector<std::vector<std::string>> rows{{"Metric", "Value"}};
  for (const auto& r : metric_rows(m)) rows.push_back({r.label, r.shown});
  out += format_table(rows);

  std::vector<std::vector<std::string>> sessions{
      {"Session", "Turns", "Ended by", "Overall", "User", "System", "Reliable"}};
  auto yes = [](bool b) { return std::string(b ? "1" : "0"); };
  for (std::size_t i = 0; i < run.trajectories.size(); ++i) {
    const auto& t = run.trajectories[i];
    const auto& ok = m.gsr.per_session[i];
    sessions.push_back({t.session_id, std::to_string(t.user_turns), std::string(to_string(t.ended_by)),
                        yes(ok.overall), yes(ok.user), yes(ok.system),
                        yes(run.verdicts[i].supervisor_reliable)});
  }
  out += "\n" + format_table(sessions);
  return out;
}

// ---- run ----------------------------------------------------------------------

namespace {

struct SessionOutput {
  Trajectory trajectory;
  JudgeResult judged;
};

SessionOutput run_one(const RunConfig& c, const AgentGraph& graph, const Scenario& s) {
  SessionOutput out;
  std::unique_ptr<ModelBackend> model;
  try {
    auto backend = make_backend(c.backend, s.scenario_id);
    model = std::move(backend.model);
    std::unique_ptr<ActionExecutor> actions;
    if (backend.actions) {
      actions = std::make_unique<ScriptedActionSimulator>(*backend.actions);
    } else {
      actions = std::make_unique<ModelActionSimulator>(*model, c.seed);
    }
    std::unique_ptr<RouteClassifier> classifier;
    SessionConfig sc;
    sc.payload_referencing = c.payload_referencing;
    sc.seed = c.seed;
    if (c.mode == RunMode::routing) {
      if (c.classifier == "model") {
        classifier = std::make_unique<ModelClassifier>(*model);
      } else {
        classifier = std::make_unique<RuleBasedClassifier>(c.classify_latency_ms, &graph);
      }
      sc.routing.enabled = true;
      sc.routing.threshold = c.routing_threshold;
      sc.routing.classifier = classifier.get();
    }
    out.trajectory = run_session(s, graph, *model, *model, actions.get(), sc);
  } catch (const Error& e) {
    out.trajectory.session_id = s.scenario_id;
    out.trajectory.scenario_id = s.scenario_id;
    out.trajectory.ended_by = EndedBy::error;
    out.trajectory.error = e.what();
  }
  try {
    if (c.judge == "model") {
      if (!model) fail(ErrorCode::BackendUnavailable, "no backend for the judge");
      ModelJudge judge(*model, c.seed);
      out.judged = judge.judge(out.trajectory, s);
    } else {
      OracleJudge judge;
      out.judged = judge.judge(out.trajectory, s);
    }
  } catch (const Error& e) {
    out.judged = {};
    for (const auto& a : s.assertions) {
      out.judged.verdicts.push_back({a.assertion_id, a.side, false,
                                     std::string("judge failed: ") + e.what()});
    }
  }
  return out;
}

}  // namespace

RunData cmd_run(const RunConfig& c) {
  validate_config(c);
  auto graph = load_profiles(c.profiles);
  if (c.mode == RunMode::single_agent) graph = single_agent_graph(graph);

  std::vector<Scenario> scenarios;
  std::set<std::string> ids;
  for (const auto& f : scenario_files(c.scenarios)) {
    scenarios.push_back(read_scenario(f));
    if (!ids.insert(scenarios.back().scenario_id).second) {
      fail(ErrorCode::InvalidConfig, "duplicate scenario id " + scenarios.back().scenario_id);
    }
  }
  if (scenarios.empty()) fail(ErrorCode::InvalidConfig, "no scenarios under " + c.scenarios.string());
  std::optional<std::vector<RoutingGoldLabel>> gold;
  if (c.routing_gold) gold = read_gold_labels(*c.routing_gold);

  std::vector<SessionOutput> results(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (auto i = next++; i < scenarios.size(); i = next++) {
      results[i] = run_one(c, graph, scenarios[i]);
    }
  };
  auto threads = std::min<std::size_t>(static_cast<std::size_t>(c.parallelism), scenarios.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  RunData run;
  run.label = c.out.filename().string();
  run.root = graph.root();
  run.gold = gold;
  Json scenario_ids = Json::array();
  for (const auto& s : scenarios) scenario_ids.push_back(s.scenario_id);
  run.info = Json{{"mode", to_string(c.mode)},
                  {"backend", c.backend},
                  {"payload_referencing", c.payload_referencing},
                  {"routing_threshold", c.routing_threshold},
                  {"seed", c.seed},
                  {"judge", c.judge},
                  {"classifier", c.classifier},
                  {"classify_latency_ms", c.classify_latency_ms},
                  {"root", graph.root()},
                  {"scenario_ids", scenario_ids}};

  fs::create_directories(c.out);
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    auto& r = results[i];
    auto dir = c.out / "sessions" / scenarios[i].scenario_id;
    write_text_file(dir / "trajectory.jsonl", write_event_log(r.trajectory.events));
    auto meta = trajectory_summary_json(r.trajectory);
    meta["supervisor_reliable"] = r.judged.supervisor_reliable;
    write_text_file(dir / "session.json", meta.dump(2) + "\n");
    write_verdicts(dir / "verdicts.jsonl", r.judged.verdicts);
    run.trajectories.push_back(r.trajectory);
    run.verdicts.push_back({r.trajectory.session_id, r.judged.verdicts, r.judged.supervisor_reliable});
  }
  if (gold) {
    Json labels = Json::array();
    for (const auto& g : *gold) {
      labels.push_back({{"session_id", g.session_id}, {"turn", g.turn}, {"layer", g.layer}, {"gold", g.gold}});
    }
    write_text_file(c.out / "routing_gold.json", Json{{"labels", labels}}.dump(2) + "\n");
  }
  write_text_file(c.out / "run.json", run.info.dump(2) + "\n");
  auto metrics = compute_run_metrics(run);
  write_text_file(c.out / "report.json", report_json(run, metrics).dump(2) + "\n");
  write_text_file(c.out / "report.txt", report_text(run, metrics));
  return run;
}

RunData read_run(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorCode::Io, dir.string() + " is not a directory");
  if (!fs::exists(dir / "run.json")) fail(ErrorCode::Io, dir.string() + " has no run.json");
  RunData run;
  run.label = dir.filename().string();
  if (run.label.empty()) run.label = dir.parent_path().filename().string();
  run.info = read_json_file(dir / "run.json");
  run.root = require_string(run.info, "root", (dir / "run.json").string());
  std::vector<fs::path> sessions;
  if (fs::is_directory(dir / "sessions")) {
    for (const auto& entry : fs::directory_iterator(dir / "sessions")) {
      if (entry.is_directory()) sessions.push_back(entry.path());
    }
  }
  std::sort(sessions.begin(), sessions.end());
  if (sessions.empty()) fail(ErrorCode::EmptySessionSet, dir.string() + " has no sessions");
  for (const auto& s : sessions) {
    auto t = read_trajectory(s);
    auto meta = read_json_file(s / "session.json");
    run.verdicts.push_back({t.session_id, read_verdicts(s / "verdicts.jsonl"),
                            meta.value("supervisor_reliable", false)});
    run.trajectories.push_back(std::move(t));
  }
  if (fs::exists(dir / "routing_gold.json")) run.gold = read_gold_labels(dir / "routing_gold.json");
  return run;
}

namespace {

void keep_sessions(RunData& run, const std::set<std::string>& keep) {
  RunData out = run;
  out.trajectories.clear();
  out.verdicts.clear();
  for (std::size_t i = 0; i < run.trajectories.size(); ++i) {
    if (keep.contains(run.trajectories[i].session_id)) {
      out.trajectories.push_back(run.trajectories[i]);
      out.verdicts.push_back(run.verdicts[i]);
    }
  }
  run = std::move(out);
}

std::string relative_change(double base, double value) {
  if (base == 0.0) return "n/a";
  auto pct = (value - base) / base * 100.0;
  return (pct >= 0 ? "+" : "") + format_fixed(pct, 1) + "%";
}

}  // namespace

std::string cmd_report(const std::vector<fs::path>& run_dirs, std::vector<std::string>* warnings) {
  if (run_dirs.empty()) fail(ErrorCode::InvalidConfig, "no run directories given");
  std::vector<RunData> runs;
  for (const auto& d : run_dirs) runs.push_back(read_run(d));

  std::set<std::string> shared;
  for (const auto& t : runs.front().trajectories) shared.insert(t.session_id);
  bool differ = false;
  for (const auto& r : runs) {
    std::set<std::string> ids;
    for (const auto& t : r.trajectories) ids.insert(t.session_id);
    if (ids != shared) differ = true;
    std::set<std::string> both;
    std::set_intersection(shared.begin(), shared.end(), ids.begin(), ids.end(),
                          std::inserter(both, both.begin()));
    shared = std::move(both);
  }
  if (shared.empty()) fail(ErrorCode::IncompatibleRuns, "the runs share no scenarios");
  if (differ) {
    auto msg = std::string(Error(ErrorCode::IncompatibleRuns,
                                 "scenario sets differ; comparing the " +
                                     std::to_string(shared.size()) + " shared scenarios")
                               .what());
    if (warnings) warnings->push_back(msg);
    for (auto& r : runs) keep_sessions(r, shared);
  }

  if (runs.size() == 1) return report_text(runs.front(), compute_run_metrics(runs.front()));

  std::vector<std::vector<MetricRow>> rows;
  for (const auto& r : runs) rows.push_back(metric_rows(compute_run_metrics(r)));
  std::vector<std::vector<std::string>> table;
  std::vector<std::string> header{"Metric"};
  for (const auto& r : runs) header.push_back(r.label);
  for (std::size_t k = 1; k < runs.size(); ++k) header.push_back("change " + runs[k].label);
  table.push_back(header);
  for (std::size_t i = 0; i < rows.front().size(); ++i) {
    std::vector<std::string> line{rows.front()[i].label};
    std::vector<std::optional<double>> values;
    for (const auto& run_rows : rows) {
      auto it = std::find_if(run_rows.begin(), run_rows.end(),
                             [&](const MetricRow& m) { return m.label == rows.front()[i].label; });
      line.push_back(it == run_rows.end() ? "-" : it->shown);
      values.push_back(it == run_rows.end() ? std::nullopt : it->value);
    }
    for (std::size_t k = 1; k < runs.size(); ++k) {
      line.push_back(values[0] && values[k] ? relative_change(*values[0], *values[k]) : "-");
    }
    table.push_back(line);
  }
  std::string out = "Compared runs: ";
  for (std::size_t k = 0; k < runs.size(); ++k) {
    out += (k ? ", " : "") + runs[k].label + " (" + runs[k].info.value("mode", std::string("?")) +
           ", payload referencing " + (runs[k].info.value("payload_referencing", true) ? "on" : "off") +
           ")";
  }
  out += "\nShared scenarios: " + std::to_string(shared.size()) + "\n\n";
  return out + format_table(table);
}

}  // namespace agentcollab
