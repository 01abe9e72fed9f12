#include "agentcollab/judge.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "agentcollab/error.hpp"

namespace agentcollab {

namespace {

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& i : items) out += (out.empty() ? "" : ", ") + i;
  return out;
}

}  // namespace

std::vector<AssertionVerdict> parse_verdicts(std::string_view raw,
                                             const std::vector<std::string>& expected_ids) {
  static const std::regex line_re(
      R"(^[\s>*#\-]*`?\**([A-Za-z0-9_.\-]+)\**`?\s*:\s*\**(TRUE|FALSE)\**\s*(?:(?:\xE2\x80\x94|\xE2\x80\x93|--|-|:)\s*(.*))?$)");
  std::set<std::string> expected(expected_ids.begin(), expected_ids.end());
  std::map<std::string, AssertionVerdict> found;
  std::vector<std::string> duplicates;
  std::vector<std::string> extra;
  std::istringstream in{std::string(raw)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (!std::regex_match(line, m, line_re)) continue;
    AssertionVerdict v;
    v.assertion_id = m[1];
    v.verdict = m[2] == "TRUE";
    v.reason = trim(m[3].str());
    if (!expected.contains(v.assertion_id)) {
      extra.push_back(v.assertion_id);
      continue;
    }
    if (!found.emplace(v.assertion_id, v).second) duplicates.push_back(v.assertion_id);
  }
  std::vector<std::string> missing;
  for (const auto& id : expected_ids) {
    if (!found.contains(id)) missing.push_back(id);
  }
  if (!duplicates.empty() || !missing.empty() || !extra.empty()) {
    std::string detail;
    if (!missing.empty()) detail += "missing [" + join(missing) + "] ";
    if (!duplicates.empty()) detail += "duplicate [" + join(duplicates) + "] ";
    if (!extra.empty()) detail += "unexpected [" + join(extra) + "]";
    fail(ErrorCode::JudgeParseFailure, trim(detail));
  }
  std::vector<AssertionVerdict> out;
  for (const auto& id : expected_ids) {
    auto v = found.at(id);
    if (!v.verdict && v.reason.empty()) v.reason = "no reason given";
    out.push_back(std::move(v));
  }
  return out;
}

std::string format_verdict_line(const AssertionVerdict& v) {
  return v.assertion_id + ": " + (v.verdict ? "TRUE" : "FALSE") + " \xE2\x80\x94 " + v.reason;
}

std::string render_transcript(const std::vector<TrajectoryEvent>& events, bool user_visible_only) {
  std::string out;
  for (const auto& e : events) {
    if (user_visible_only) {
      if (!is_user_visible(e)) continue;
      out += (e.sender == kUserAgent ? "User: " : "Assistant: ") + e.content + "\n";
      continue;
    }
    out += "[" + std::to_string(e.seq) + "] " + std::string(to_string(e.kind)) + " ";
    switch (e.kind) {
      case EventKind::chat:
        out += e.sender + " -> " + e.recipient + (e.reply ? " (reply)" : "") +
               (e.error ? " (failed)" : "") + ": " + e.content;
        break;
      case EventKind::tool_call:
        out += e.agent + " " + e.tool_name + " " + e.content;
        break;
      case EventKind::tool_result:
        out += e.agent + " " + e.tool_name + (e.error ? " (error)" : "") + ": " + e.content;
        break;
      case EventKind::model_call:
        out += e.agent + ": " + e.content;
        break;
      case EventKind::routing_decision:
        out += e.agent + " layer " + std::to_string(e.layer) + ": " + e.decision;
        break;
      case EventKind::routing_relay:
        out += e.agent + " layer " + std::to_string(e.layer) + " " + e.sender + " -> " +
               e.recipient + (e.error ? " (failed)" : "") + ": " + e.content;
        break;
    }
    out += "\n";
  }
  return out;
}

namespace {

std::string scenario_block(const Scenario& s) {
  std::string out = "Goals:\n";
  for (const auto& g : s.goals) out += "* " + g + "\n";
  out += "Background:\n";
  for (const auto& b : s.background) out += "* " + b + "\n";
  out += "Input problem: " + s.input_problem + "\n";
  return out;
}

}  // namespace

std::vector<AssertionVerdict> ModelJudge::judge_side(const Trajectory& t, const Scenario& s,
                                                     AssertionSide side) {
  auto assertions = s.assertions_on(side);
  if (assertions.empty()) return {};
  const bool user = side == AssertionSide::user;
  ModelRequest req;
  req.caller = "judge";
  req.seed = seed_;
  req.system_prompt =
      "You check whether assertions hold for a recorded conversation between a user and a "
      "multi-agent assistant. Answer with one line per assertion in the form\n"
      "<id>: TRUE|FALSE \xE2\x80\x94 <reason>\n"
      "and nothing else.";
  std::string body = "Scenario\n" + scenario_block(s) + "\n";
  body += user ? "Conversation as the user saw it:\n" : "Full event log:\n";
  body += render_transcript(t.events, user);
  body += "\nAssertions:\n";
  std::vector<std::string> ids;
  for (const auto& a : assertions) {
    body += "- " + a.assertion_id + ": " + a.statement + "\n";
    ids.push_back(a.assertion_id);
  }
  req.messages.push_back({Role::user, body});

  for (int attempt = 0; attempt < 2; ++attempt) {
    auto resp = invoke(backend_, req);
    if (resp.kind != ResponseKind::text) continue;
    try {
      auto verdicts = parse_verdicts(*resp.text, ids);
      for (auto& v : verdicts) v.side = side;
      return verdicts;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::JudgeParseFailure) throw;
    }
  }
  std::vector<AssertionVerdict> out;
  for (const auto& a : assertions) out.push_back({a.assertion_id, side, false, "unparseable"});
  return out;
}

bool ModelJudge::ask_reliability(const Trajectory& t, const Scenario& s) {
  ModelRequest req;
  req.caller = "judge";
  req.seed = seed_;
  req.system_prompt =
      "Decide whether the supervisor agent tried its best to help the user in the recorded "
      "session. Start your answer with YES or NO, then give a short reason.";
  req.messages.push_back(
      {Role::user, "Scenario\n" + scenario_block(s) + "\nFull event log:\n" +
                       render_transcript(t.events, false)});
  auto resp = invoke(backend_, req);
  if (resp.kind != ResponseKind::text) return false;
  auto answer = trim(*resp.text);
  for (auto& c : answer) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return answer.starts_with("YES");
}

JudgeResult ModelJudge::judge(const Trajectory& t, const Scenario& s) {
  auto user = judge_side(t, s, AssertionSide::user);
  auto system = judge_side(t, s, AssertionSide::system);
  std::map<std::string, AssertionVerdict> by_id;
  for (auto& v : user) by_id[v.assertion_id] = v;
  for (auto& v : system) by_id[v.assertion_id] = v;
  JudgeResult r;
  for (const auto& a : s.assertions) r.verdicts.push_back(by_id.at(a.assertion_id));
  r.supervisor_reliable = ask_reliability(t, s);
  return r;
}

namespace {

bool value_matches(const Json& want, const Json& have) {
  if (want.is_string() && have.is_string()) {
    return lower(have.get<std::string>()).find(lower(want.get<std::string>())) != std::string::npos;
  }
  if (want.is_object() && have.is_object()) {
    for (const auto& [k, v] : want.items()) {
      auto it = have.find(k);
      if (it == have.end() || !value_matches(v, *it)) return false;
    }
    return true;
  }
  return want == have;
}

struct Execution {
  std::size_t index;
  Json arguments;
};

std::vector<Execution> executions(const std::vector<TrajectoryEvent>& events,
                                  const std::string& tool) {
  std::map<std::string, bool> failed;
  for (const auto& e : events) {
    if (e.kind == EventKind::tool_result) failed[e.call_id] = e.error;
  }
  std::vector<Execution> out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.kind != EventKind::tool_call || e.tool_name != tool) continue;
    auto it = failed.find(e.call_id);
    if (it == failed.end() || it->second) continue;
    Json args = Json::parse(e.content, nullptr, false);
    out.push_back({i, args.is_discarded() ? Json::object() : args});
  }
  return out;
}

struct Outcome {
  bool ok;
  std::string reason;
};

Outcome run_check(const Json& check, const std::vector<TrajectoryEvent>& events);

Outcome check_tool_called(const std::string& tool, const Json& args, std::int64_t min_count,
                          const std::vector<TrajectoryEvent>& events) {
  std::int64_t n = 0;
  for (const auto& ex : executions(events, tool)) {
    if (value_matches(args, ex.arguments)) ++n;
  }
  auto what = tool + (args.empty() ? "" : " with " + args.dump());
  if (n >= min_count) return {true, what + " executed " + std::to_string(n) + " time(s)"};
  return {false, what + " executed " + std::to_string(n) + " time(s), expected at least " +
                     std::to_string(min_count)};
}

Outcome check_called_before(const std::string& first, const std::string& second,
                            const std::vector<TrajectoryEvent>& events) {
  auto a = executions(events, first);
  auto b = executions(events, second);
  if (a.empty()) return {false, first + " was never executed"};
  if (b.empty()) return {false, second + " was never executed"};
  if (a.front().index < b.front().index) {
    return {true, first + " executed before the first " + second};
  }
  return {false, second + " executed before any " + first};
}

Outcome run_check(const Json& check, const std::vector<TrajectoryEvent>& events) {
  if (auto it = check.find("all"); it != check.end()) {
    std::string reasons;
    for (const auto& sub : *it) {
      auto o = run_check(sub, events);
      if (!o.ok) return o;
      reasons += (reasons.empty() ? "" : "; ") + o.reason;
    }
    return {true, reasons};
  }
  if (auto it = check.find("tool_called"); it != check.end()) {
    auto args = check.value("args", Json::object());
    auto min_count = check.value("min_count", std::int64_t{1});
    return check_tool_called(it->get<std::string>(), args, min_count, events);
  }
  if (auto it = check.find("not_called"); it != check.end()) {
    auto tool = it->get<std::string>();
    auto n = executions(events, tool).size();
    if (n == 0) return {true, tool + " was not executed"};
    return {false, tool + " executed " + std::to_string(n) + " time(s)"};
  }
  if (auto it = check.find("called_before"); it != check.end()) {
    if (!it->is_array() || it->size() != 2) {
      fail(ErrorCode::SchemaViolation, "called_before needs two tool names");
    }
    return check_called_before((*it)[0].get<std::string>(), (*it)[1].get<std::string>(), events);
  }
  if (auto it = check.find("user_sees"); it != check.end()) {
    std::vector<std::string> needles;
    if (it->is_string()) needles.push_back(lower(it->get<std::string>()));
    else for (const auto& n : *it) needles.push_back(lower(n.get<std::string>()));
    for (const auto& e : events) {
      if (!is_user_visible(e) || e.sender == kUserAgent) continue;
      auto text = lower(e.content);
      if (std::all_of(needles.begin(), needles.end(),
                      [&](const std::string& n) { return text.find(n) != std::string::npos; })) {
        return {true, "seq " + std::to_string(e.seq) + " shows it to the user"};
      }
    }
    return {false, "no reply to the user mentions all of [" + join(needles) + "]"};
  }
  if (auto it = check.find("message_sent"); it != check.end()) {
    auto to = it->value("to", std::string());
    auto contains = lower(it->value("contains", std::string()));
    for (const auto& e : events) {
      if (e.kind != EventKind::chat || e.reply || e.recipient != to) continue;
      if (lower(e.content).find(contains) != std::string::npos) {
        return {true, e.sender + " messaged " + to + " at seq " + std::to_string(e.seq)};
      }
    }
    return {false, "no matching message to " + to};
  }
  fail(ErrorCode::SchemaViolation, "unknown check " + check.dump());
}

}  // namespace

AssertionVerdict OracleJudge::evaluate(const Assertion& a,
                                       const std::vector<TrajectoryEvent>& events) {
  AssertionVerdict v{a.assertion_id, a.side, false, ""};
  if (a.check) {
    auto o = run_check(*a.check, events);
    v.verdict = o.ok;
    v.reason = o.reason;
    return v;
  }
  static const std::regex before_re(
      R"(\b([A-Za-z][A-Za-z0-9_]*) is executed before ([A-Za-z][A-Za-z0-9_]*))");
  static const std::regex executed_re(R"(\b([A-Za-z][A-Za-z0-9]*_[A-Za-z0-9_]*) is executed)");
  std::smatch m;
  if (std::regex_search(a.statement, m, before_re)) {
    auto o = check_called_before(m[1], m[2], events);
    v.verdict = o.ok;
    v.reason = o.reason;
  } else if (std::regex_search(a.statement, m, executed_re)) {
    auto o = check_tool_called(m[1], Json::object(), 1, events);
    v.verdict = o.ok;
    v.reason = o.reason;
  } else {
    v.reason = "no check for this statement";
  }
  return v;
}

bool OracleJudge::supervisor_reliable(const Trajectory& t) {
  if (t.ended_by == EndedBy::error) return false;
  std::set<int> asked;
  std::set<int> answered;
  for (const auto& e : t.events) {
    if (!is_user_visible(e)) continue;
    (e.sender == kUserAgent ? asked : answered).insert(e.turn);
  }
  return !asked.empty() && std::includes(answered.begin(), answered.end(), asked.begin(), asked.end());
}

JudgeResult OracleJudge::judge(const Trajectory& t, const Scenario& s) {
  JudgeResult r;
  for (const auto& a : s.assertions) {
    std::vector<TrajectoryEvent> visible;
    const auto* events = &t.events;
    if (a.side == AssertionSide::user && !a.check) {
      for (const auto& e : t.events) {
        if (is_user_visible(e)) visible.push_back(e);
      }
      events = &visible;
    }
    r.verdicts.push_back(evaluate(a, *events));
  }
  r.supervisor_reliable = supervisor_reliable(t);
  return r;
}

Json verdict_to_json(const AssertionVerdict& v) {
  return Json{{"assertion_id", v.assertion_id},
              {"side", to_string(v.side)},
              {"verdict", v.verdict},
              {"reason", v.reason}};
}

AssertionVerdict verdict_from_json(const Json& j) {
  AssertionVerdict v;
  v.assertion_id = require_string(j, "assertion_id", "$");
  auto side = require_string(j, "side", "$");
  if (side != "user" && side != "system") {
    fail(ErrorCode::SchemaViolation, "$.side: must be user or system");
  }
  v.side = side == "user" ? AssertionSide::user : AssertionSide::system;
  v.verdict = optional_bool(j, "verdict", "$", false);
  v.reason = optional_string(j, "reason", "$", "");
  return v;
}

void write_verdicts(const std::filesystem::path& path, const std::vector<AssertionVerdict>& verdicts) {
  std::string text;
  for (const auto& v : verdicts) text += verdict_to_json(v).dump() + "\n";
  write_text_file(path, text);
}

std::vector<AssertionVerdict> read_verdicts(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<AssertionVerdict> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(verdict_from_json(Json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace agentcollab
