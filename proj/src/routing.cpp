#include "agentcollab/routing.hpp"

#include <algorithm>
#include <cctype>

#include "agentcollab/error.hpp"

namespace agentcollab {

std::string RoutingDecision::incoming_ref() const {
  return session_id + ":" + std::to_string(turn) + ":" + std::to_string(layer);
}

std::string RoutingGoldLabel::incoming_ref() const {
  return session_id + ":" + std::to_string(turn) + ":" + std::to_string(layer);
}

RoutingDecision classify_route(RouteClassifier& classifier, const AgentMemory& history,
                               const Message& incoming,
                               const std::vector<AgentProfile>& candidates, double threshold) {
  if (candidates.empty()) fail(ErrorCode::InvalidConfig, "routing needs at least one candidate");
  RoutingDecision d;
  d.decider = incoming.recipient;
  d.decision = std::string(kOrchestrate);
  Classification c;
  try {
    c = classifier.classify(history, incoming, candidates);
  } catch (const Error&) {
    return d;
  }
  d.confidence = std::clamp(c.confidence, 0.0, 1.0);
  d.classify_latency_ms = c.latency_ms;
  auto known = std::any_of(candidates.begin(), candidates.end(),
                           [&](const AgentProfile& p) { return p.agent_id == c.choice; });
  if (known && d.confidence >= threshold) d.decision = c.choice;
  return d;
}

namespace {

const std::set<std::string>& stop_words() {
  static const std::set<std::string> words = {
      "a",     "about", "agent", "all",   "am",    "an",    "and",   "any",  "are",  "as",
      "at",    "be",    "by",    "can",   "could", "do",    "doe",   "for",  "from", "get",
      "ha",    "handle", "have", "hello", "help",  "hi",    "how",   "i",    "if",   "in",
      "into",  "is",    "it",    "its",   "me",    "my",    "need",  "of",   "on",   "or",
      "our",   "please", "question", "request", "s", "should", "so", "that", "the", "their",
      "them",  "then",  "there", "these", "they",  "thi",   "this",  "to",   "u",    "up",
      "user",  "wa",    "want",  "we",    "what",  "when",  "where", "which", "who", "why",
      "will",  "with",  "would", "you",   "your"};
  return words;
}

std::string stem(std::string word) {
  if (word.size() > 3 && word.back() == 's' && word[word.size() - 2] != 's') word.pop_back();
  return word;
}

}  // namespace

std::set<std::string> keyword_stems(std::string_view text) {
  std::set<std::string> out;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    auto s = stem(std::move(word));
    word.clear();
    if (!stop_words().contains(s)) out.insert(std::move(s));
  };
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      word.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::set<std::string> RuleBasedClassifier::keywords(const AgentProfile& profile) const {
  std::string text = profile.agent_id + " " + profile.display_name + " " + profile.instruction;
  for (const auto& gid : profile.action_groups) {
    text += " " + gid;
    if (graph_ == nullptr || !graph_->action_groups().contains(gid)) continue;
    for (const auto& tool : graph_->action_group(gid).tools) {
      text += " " + tool.name + " " + tool.description;
    }
  }
  return keyword_stems(text);
}

std::vector<int> RuleBasedClassifier::scores(const Message& incoming,
                                             const std::vector<AgentProfile>& candidates) const {
  auto words = keyword_stems(incoming.content);
  std::vector<int> out;
  for (const auto& c : candidates) {
    auto kw = keywords(c);
    out.push_back(static_cast<int>(
        std::count_if(words.begin(), words.end(), [&](const std::string& w) { return kw.contains(w); })));
  }
  return out;
}

Classification RuleBasedClassifier::classify(const AgentMemory&, const Message& incoming,
                                             const std::vector<AgentProfile>& candidates) {
  auto s = scores(incoming, candidates);
  Classification c{std::string(kOrchestrate), 0.0, latency_ms_};
  int total = 0;
  int best = 0;
  std::size_t best_at = 0;
  int best_count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    total += s[i];
    if (s[i] > best) {
      best = s[i];
      best_at = i;
      best_count = 1;
    } else if (s[i] == best && best > 0) {
      ++best_count;
    }
  }
  if (best == 0) return c;
  c.confidence = static_cast<double>(best) / total;
  if (best_count == 1) c.choice = candidates[best_at].agent_id;
  return c;
}

Classification ModelClassifier::classify(const AgentMemory& history, const Message& incoming,
                                         const std::vector<AgentProfile>& candidates) {
  ModelRequest req;
  req.caller = "router";
  req.temperature = temperature_;
  req.system_prompt =
      "Decide which agent should handle the latest message on its own. Answer with exactly "
      "one agent id from the list, or \"unsure\" if the message needs several agents or "
      "none fits.\n";
  for (const auto& c : candidates) {
    req.system_prompt += "- " + c.agent_id + ": " + c.display_name + ". " + c.instruction + "\n";
  }
  req.messages = history.render();
  if (req.messages.empty() || req.messages.back().role == Role::assistant) {
    req.messages.push_back({Role::user, format_incoming(incoming)});
  }
  ModelResponse resp;
  try {
    resp = invoke(backend_, req);
  } catch (const Error& e) {
    fail(ErrorCode::ClassifierUnavailable, e.what());
  }
  Classification out{std::string(kOrchestrate), 0.0, resp.wall_time_ms};
  if (resp.kind != ResponseKind::text) return out;
  auto answer = *resp.text;
  auto not_space = [](unsigned char ch) { return !std::isspace(ch) && ch != '.' && ch != '"'; };
  answer.erase(answer.begin(), std::find_if(answer.begin(), answer.end(), not_space));
  answer.erase(std::find_if(answer.rbegin(), answer.rend(), not_space).base(), answer.end());
  for (const auto& c : candidates) {
    if (c.agent_id == answer) {
      out.choice = answer;
      out.confidence = 1.0;
    }
  }
  return out;
}

std::vector<RoutingDecision> routing_decisions_from_log(const std::vector<TrajectoryEvent>& log) {
  std::vector<RoutingDecision> out;
  for (const auto& e : log) {
    if (e.kind != EventKind::routing_decision) continue;
    RoutingDecision d;
    d.session_id = e.session_id;
    d.turn = e.turn;
    d.layer = e.layer;
    d.decider = e.agent;
    d.decision = e.decision;
    d.confidence = e.confidence;
    d.classify_latency_ms = e.duration_ms();
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<TurnRoutingTiming> turn_routing_timings(const std::vector<TrajectoryEvent>& log,
                                                    const AgentId& root) {
  std::vector<TurnRoutingTiming> out;
  std::map<std::pair<std::string, int>, std::size_t> index;
  for (const auto& e : log) {
    if (e.kind == EventKind::routing_decision && e.layer == 1 && e.agent == root) {
      auto key = std::make_pair(e.session_id, e.turn);
      if (!index.contains(key)) {
        index[key] = out.size();
        out.push_back({e.session_id, e.turn, 0, e.decision != kOrchestrate});
      }
    }
  }
  for (const auto& e : log) {
    if (e.agent != root) continue;
    if (e.kind != EventKind::routing_decision && e.kind != EventKind::model_call) continue;
    auto it = index.find({e.session_id, e.turn});
    if (it != index.end()) out[it->second].overhead_ms += e.duration_ms();
  }
  return out;
}

std::vector<RoutingGoldLabel> gold_labels_from_json(const Json& doc) {
  const Json* list = &doc;
  std::string path = "$";
  if (doc.is_object()) {
    list = &require_field(doc, "labels", "$");
    path = "$.labels";
  }
  if (!list->is_array()) fail(ErrorCode::SchemaViolation, path + ": expected an array");
  std::vector<RoutingGoldLabel> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const auto& item = (*list)[i];
    auto p = path + "[" + std::to_string(i) + "]";
    RoutingGoldLabel g;
    g.session_id = require_string(item, "session_id", p);
    g.turn = static_cast<int>(optional_number(item, "turn", p, 1));
    g.layer = static_cast<int>(optional_number(item, "layer", p, 1));
    g.gold = require_string(item, "gold", p);
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<RoutingGoldLabel> read_gold_labels(const std::filesystem::path& path) {
  return gold_labels_from_json(read_json_file(path));
}

namespace {

void finish(RoutingCounts& c) {
  if (c.decisions == 0) return;
  c.accuracy = static_cast<double>(c.correct) / static_cast<double>(c.decisions);
  c.false_switch_rate = static_cast<double>(c.false_switches) / static_cast<double>(c.decisions);
}

}  // namespace

RoutingMetricsReport routing_metrics(const std::vector<RoutingDecision>& decisions,
                                     const std::vector<RoutingGoldLabel>& gold,
                                     const std::vector<TurnRoutingTiming>& turn_timings) {
  std::map<std::string, std::string> labels;
  for (const auto& g : gold) labels[g.incoming_ref()] = g.gold;

  RoutingMetricsReport report;
  double latency_sum = 0.0;
  for (const auto& d : decisions) {
    latency_sum += static_cast<double>(d.classify_latency_ms);
    auto it = labels.find(d.incoming_ref());
    if (it == labels.end()) {
      ++report.unlabeled;
      continue;
    }
    bool correct = d.decision == it->second;
    bool false_switch = d.routed() && !correct;
    for (auto* c : {&report.overall, &report.by_layer[d.layer]}) {
      ++c->decisions;
      c->correct += correct ? 1 : 0;
      c->false_switches += false_switch ? 1 : 0;
    }
  }
  if (report.overall.decisions == 0) {
    fail(ErrorCode::EmptyJoin, "no routing decision has a gold label");
  }
  finish(report.overall);
  for (auto& [_, c] : report.by_layer) finish(c);
  report.mean_classify_latency_ms = latency_sum / static_cast<double>(decisions.size());
  if (!turn_timings.empty()) {
    double sum = 0.0;
    for (const auto& t : turn_timings) sum += static_cast<double>(t.overhead_ms);
    report.timed_turns = static_cast<std::int64_t>(turn_timings.size());
    report.mean_turn_overhead_ms = sum / static_cast<double>(turn_timings.size());
  }
  return report;
}

namespace {

Json counts_json(const RoutingCounts& c) {
  return Json{{"decisions", c.decisions},
              {"correct", c.correct},
              {"false_switches", c.false_switches},
              {"accuracy", c.accuracy},
              {"false_switch_rate", c.false_switch_rate}};
}

}  // namespace

Json routing_report_to_json(const RoutingMetricsReport& r) {
  Json layers = Json::object();
  for (const auto& [layer, c] : r.by_layer) layers[std::to_string(layer)] = counts_json(c);
  return Json{{"overall", counts_json(r.overall)},
              {"by_layer", layers},
              {"unlabeled", r.unlabeled},
              {"mean_classify_latency_ms", r.mean_classify_latency_ms},
              {"timed_turns", r.timed_turns},
              {"mean_turn_overhead_ms", r.mean_turn_overhead_ms}};
}

}  // namespace agentcollab
