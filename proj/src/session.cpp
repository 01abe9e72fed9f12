#include "agentcollab/session.hpp"

#include <algorithm>
#include <future>

#include "agentcollab/tokenizer.hpp"

namespace agentcollab {

std::string payload_instructions() {
  return "Code blocks you receive from other agents arrive wrapped as "
         "<payload id=\"pN\">...</payload>. To pass such a block on, write "
         "<payload_ref id=\"pN\"/> instead of repeating it. The reference is replaced "
         "by the exact block before your message is delivered.";
}

ToolSchema send_message_schema(const AgentGraph& graph, const AgentId& agent) {
  ToolSchema tool;
  tool.name = std::string(kSendMessageTool);
  tool.description = "Send a message to one of your agents and wait for its reply.";
  ToolParameter recipient;
  recipient.name = "recipient";
  recipient.description = "Agent to send the message to.";
  recipient.allowed_values = graph.profile(agent).sub_agents;
  ToolParameter content;
  content.name = "content";
  content.description = "The message.";
  tool.parameters = {recipient, content};
  return tool;
}

Session::Session(std::string session_id, const AgentGraph& graph, ModelBackend& backend,
                 ActionExecutor* actions, SessionConfig config)
    : session_id_(std::move(session_id)),
      graph_(graph),
      backend_(backend),
      actions_(actions),
      config_(std::move(config)),
      max_depth_(config_.max_delegation_depth < 0 ? graph.depth()
                                                  : config_.max_delegation_depth) {
  if (config_.iteration_cap < 1) fail(ErrorCode::InvalidConfig, "iteration_cap must be >= 1");
  if (config_.routing.enabled && config_.routing.classifier == nullptr) {
    fail(ErrorCode::InvalidConfig, "routing enabled without a classifier");
  }
  for (const auto& id : graph_.preorder()) agents_.emplace(id, AgentState{AgentMemory(id)});
}

Session::AgentState& Session::state(const AgentId& agent) {
  auto it = agents_.find(agent);
  if (it == agents_.end()) fail(ErrorCode::UnknownAgent, agent);
  return it->second;
}

const Session::AgentState& Session::state(const AgentId& agent) const {
  auto it = agents_.find(agent);
  if (it == agents_.end()) fail(ErrorCode::UnknownAgent, agent);
  return it->second;
}

const AgentMemory& Session::memory(const AgentId& agent) const { return state(agent).memory; }

std::map<AgentId, AgentMemory> Session::memories() const {
  std::map<AgentId, AgentMemory> out;
  for (const auto& [id, st] : agents_) out.emplace(id, st.memory);
  return out;
}

std::vector<RoutingDecision> Session::routing_decisions() const {
  return routing_decisions_from_log(events_);
}

TrajectoryEvent Session::make_event(EventKind kind, const AgentId& agent, std::int64_t start,
                                    std::int64_t end) const {
  TrajectoryEvent e;
  e.kind = kind;
  e.agent = agent;
  e.sender = agent;
  e.start_ms = start;
  e.end_ms = end;
  return e;
}

void Session::record(Ctx& ctx, TrajectoryEvent event) {
  event.turn = turn_;
  for (const auto& owner : memory_owners(event)) {
    auto it = agents_.find(owner);
    if (it != agents_.end()) it->second.memory.append(event);
  }
  ctx.out->push_back(std::move(event));
}

void Session::commit() {
  for (; committed_ < events_.size(); ++committed_) {
    events_[committed_].session_id = session_id_;
    events_[committed_].seq = static_cast<std::int64_t>(committed_) + 1;
  }
}

std::string Session::system_prompt(const AgentId& agent) const {
  const auto& profile = graph_.profile(agent);
  std::string prompt = profile.instruction;
  if (!profile.sub_agents.empty()) {
    prompt +=
        "\n\nYou coordinate the agents below. Use the send_message tool to ask one of them "
        "for help; several send_message calls in one response run in parallel. Messages "
        "from other agents arrive as <message from=\"...\"> blocks.";
    for (const auto& sub : profile.sub_agents) {
      prompt += "\n- " + sub + ": " + graph_.profile(sub).display_name;
    }
  }
  if (graph_.is_root(agent) && config_.payload_referencing) {
    prompt += "\n\n" + payload_instructions();
  }
  return prompt;
}

ModelRequest Session::build_request(const AgentId& agent) const {
  ModelRequest req;
  req.caller = agent;
  req.system_prompt = system_prompt(agent);
  req.messages = state(agent).memory.render();
  req.tools = graph_.tools_for(agent);
  if (!graph_.profile(agent).sub_agents.empty()) {
    req.tools.push_back(send_message_schema(graph_, agent));
  }
  req.temperature = config_.temperature;
  req.seed = config_.seed;
  return req;
}

std::string Session::agent_loop(const AgentId& agent, Ctx& ctx) {
  for (int iter = 0; iter < config_.iteration_cap; ++iter) {
    auto response = invoke(backend_, build_request(agent));
    auto call_no = ++state(agent).model_calls;
    for (std::size_t k = 0; k < response.tool_calls.size(); ++k) {
      auto& call = response.tool_calls[k];
      if (call.call_id.empty()) {
        call.call_id = agent + "." + std::to_string(call_no) + "." + std::to_string(k + 1);
      }
    }
    auto e = make_event(EventKind::model_call, agent, ctx.now, ctx.now + response.wall_time_ms);
    if (response.kind == ResponseKind::text) {
      e.content = *response.text;
    } else {
      e.content = render_tool_calls(response.tool_calls);
      e.has_tool_calls = true;
    }
    e.output_token_count = response.output_token_count;
    record(ctx, std::move(e));
    ctx.now += response.wall_time_ms;
    if (response.kind == ResponseKind::text) return *response.text;
    run_tool_calls(agent, response.tool_calls, ctx);
  }
  fail(ErrorCode::IterationCapExceeded,
       agent + " made " + std::to_string(config_.iteration_cap) +
           " model calls without a final answer");
}

void Session::run_tool_calls(const AgentId& agent, const std::vector<ToolCall>& calls, Ctx& ctx) {
  std::vector<SendRequest> batch;
  auto flush = [&] {
    if (batch.empty()) return;
    dispatch(agent, batch, ctx);
    batch.clear();
  };
  for (const auto& call : calls) {
    if (call.tool_name != kSendMessageTool) {
      flush();
      run_action(agent, call, ctx);
      continue;
    }
    const auto& args = call.arguments;
    auto recipient = args.find("recipient");
    auto content = args.find("content");
    if (!args.is_object() || recipient == args.end() || !recipient->is_string() ||
        content == args.end() || !content->is_string()) {
      flush();
      auto c = make_event(EventKind::tool_call, agent, ctx.now, ctx.now);
      c.tool_name = call.tool_name;
      c.call_id = call.call_id;
      c.content = args.dump();
      record(ctx, c);
      auto r = make_event(EventKind::tool_result, agent, ctx.now, ctx.now);
      r.tool_name = call.tool_name;
      r.call_id = call.call_id;
      r.error = true;
      r.content = Error(ErrorCode::MalformedToolCall,
                        "send_message needs string recipient and content")
                      .what();
      record(ctx, std::move(r));
      continue;
    }
    batch.push_back({recipient->get<std::string>(), content->get<std::string>(), call.call_id});
  }
  flush();
}

void Session::run_action(const AgentId& agent, const ToolCall& call, Ctx& ctx) {
  auto c = make_event(EventKind::tool_call, agent, ctx.now, ctx.now);
  c.tool_name = call.tool_name;
  c.call_id = call.call_id;
  c.content = call.arguments.dump();
  record(ctx, std::move(c));

  ToolResult result;
  try {
    auto schema = graph_.find_tool(agent, call.tool_name);
    if (!schema) fail(ErrorCode::UnknownTool, call.tool_name + " is not available to " + agent);
    if (actions_ == nullptr) fail(ErrorCode::UnknownTool, "no action executor for " + call.tool_name);
    result = actions_->execute(agent, call, *schema);
  } catch (const Error& e) {
    result = ToolResult{e.what(), true, 0};
  }
  auto latency = std::max<std::int64_t>(result.latency_ms, 0);
  auto r = make_event(EventKind::tool_result, agent, ctx.now, ctx.now + latency);
  r.tool_name = call.tool_name;
  r.call_id = call.call_id;
  r.content = std::move(result.content);
  r.error = result.error;
  record(ctx, std::move(r));
  ctx.now += latency;
}

std::vector<ChannelOutcome> Session::dispatch(const AgentId& sender,
                                              const std::vector<SendRequest>& requests, Ctx& ctx) {
  std::vector<ChannelOutcome> outcomes(requests.size());
  if (!config_.concurrent_dispatch) {
    for (std::size_t i = 0; i < requests.size(); ++i) {
      outcomes[i] = std::move(dispatch_wave(sender, {requests[i]}, ctx).front());
    }
    return outcomes;
  }
  // The k-th request to a recipient goes in wave k.
  std::vector<std::size_t> wave_of(requests.size());
  std::map<AgentId, std::size_t> seen;
  std::size_t waves = 0;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    wave_of[i] = seen[requests[i].recipient]++;
    waves = std::max(waves, wave_of[i] + 1);
  }
  for (std::size_t w = 0; w < waves; ++w) {
    std::vector<SendRequest> wave;
    std::vector<std::size_t> index;
    for (std::size_t i = 0; i < requests.size(); ++i) {
      if (wave_of[i] == w) {
        wave.push_back(requests[i]);
        index.push_back(i);
      }
    }
    auto results = dispatch_wave(sender, wave, ctx);
    for (std::size_t k = 0; k < index.size(); ++k) outcomes[index[k]] = std::move(results[k]);
  }
  return outcomes;
}

std::vector<ChannelOutcome> Session::dispatch_wave(const AgentId& sender,
                                                   const std::vector<SendRequest>& requests,
                                                   Ctx& ctx) {
  const auto n = requests.size();
  const auto t0 = ctx.now;
  const bool root_payloads = config_.payload_referencing && graph_.is_root(sender);
  const auto& subs = graph_.profile(sender).sub_agents;
  std::vector<ChannelOutcome> outcomes(n);
  std::vector<bool> live(n, false);

  // Validate and record every outgoing message before any channel starts.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& req = requests[i];
    outcomes[i].recipient = req.recipient;
    std::string content;
    try {
      if (!graph_.contains(req.recipient)) fail(ErrorCode::UnknownRecipient, req.recipient);
      if (std::find(subs.begin(), subs.end(), req.recipient) == subs.end()) {
        fail(ErrorCode::RecipientNotVisible, sender + " cannot message " + req.recipient);
      }
      if (ctx.depth + 1 > max_depth_) {
        fail(ErrorCode::DepthExceeded,
             req.recipient + " would be at depth " + std::to_string(ctx.depth + 1));
      }
      auto& st = state(sender);
      if (st.sends_this_turn >= config_.message_budget) {
        fail(ErrorCode::TurnBudgetExceeded,
             sender + " already sent " + std::to_string(st.sends_this_turn) + " messages");
      }
      ++st.sends_this_turn;
      content = root_payloads ? expand_references(payloads_, req.content).text : req.content;
    } catch (const Error& err) {
      outcomes[i].error = err;
      auto c = make_event(EventKind::tool_call, sender, t0, t0);
      c.tool_name = std::string(kSendMessageTool);
      c.call_id = req.call_id;
      c.content = Json{{"recipient", req.recipient}, {"content", req.content}}.dump();
      record(ctx, c);
      auto r = make_event(EventKind::tool_result, sender, t0, t0);
      r.tool_name = c.tool_name;
      r.call_id = req.call_id;
      r.error = true;
      r.content = err.what();
      record(ctx, std::move(r));
      continue;
    }
    live[i] = true;
    auto out = make_event(EventKind::chat, sender, t0, t0);
    out.recipient = req.recipient;
    out.call_id = req.call_id;
    // Tokens the sender generated, not the expanded text.
    out.output_token_count = count_output_tokens(req.content);
    out.content = std::move(content);
    record(ctx, std::move(out));
  }

  std::vector<std::vector<TrajectoryEvent>> buffers(n);
  std::vector<std::int64_t> ends(n, t0);
  std::vector<std::optional<std::string>> texts(n);
  std::vector<std::optional<Error>> errors(n);
  auto run = [&](std::size_t i) {
    Ctx child{t0, ctx.depth + 1, &buffers[i]};
    try {
      texts[i] = agent_loop(requests[i].recipient, child);
    } catch (const Error& err) {
      errors[i] = err;
    }
    ends[i] = child.now;
  };
  auto live_count = std::count(live.begin(), live.end(), true);
  if (config_.concurrent_dispatch && live_count > 1) {
    std::vector<std::future<void>> running;
    for (std::size_t i = 0; i < n; ++i) {
      if (live[i]) running.push_back(std::async(std::launch::async, run, i));
    }
    for (auto& f : running) f.wait();
    for (auto& f : running) f.get();
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (live[i]) run(i);
    }
  }

  // Merge in request order so the log does not depend on completion order.
  auto end = t0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!live[i]) continue;
    ctx.out->insert(ctx.out->end(), std::make_move_iterator(buffers[i].begin()),
                    std::make_move_iterator(buffers[i].end()));
    end = std::max(end, ends[i]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!live[i]) continue;
    const auto& recipient = requests[i].recipient;
    auto reply = make_event(EventKind::chat, recipient, t0, ends[i]);
    reply.recipient = sender;
    reply.call_id = requests[i].call_id;
    reply.reply = true;
    if (texts[i]) {
      Message m{recipient, sender, *texts[i], MessageKind::chat, ends[i]};
      if (root_payloads) m = wrap_payloads(payloads_, m);
      reply.content = m.content;
      reply.output_token_count = count_output_tokens(*texts[i]);
      outcomes[i].response = std::move(m);
    } else {
      reply.content = errors[i]->what();
      reply.error = true;
      outcomes[i].error = std::move(errors[i]);
    }
    record(ctx, std::move(reply));
  }
  ctx.now = end;
  return outcomes;
}

std::string Session::route_or_run(const AgentId& agent, const Message& incoming, int layer,
                                  Ctx& ctx, bool& relayed) {
  relayed = false;
  const auto& routing = config_.routing;
  const auto& subs = graph_.profile(agent).sub_agents;
  if (routing.enabled && !subs.empty() && (layer == 1 || routing.multi_layer)) {
    std::vector<AgentProfile> candidates;
    for (const auto& s : subs) candidates.push_back(graph_.profile(s));
    Message in = incoming;
    in.recipient = agent;
    auto d = classify_route(*routing.classifier, state(agent).memory, in, candidates,
                            routing.threshold);
    auto latency = std::max<std::int64_t>(d.classify_latency_ms, 0);
    auto de = make_event(EventKind::routing_decision, agent, ctx.now, ctx.now + latency);
    de.sender = incoming.sender;
    de.recipient = agent;
    de.layer = layer;
    de.decision = d.decision;
    de.confidence = d.confidence;
    record(ctx, std::move(de));
    ctx.now += latency;

    if (d.routed() && ctx.depth + 1 <= max_depth_) {
      const auto t0 = ctx.now;
      auto out = make_event(EventKind::routing_relay, agent, t0, t0);
      out.sender = incoming.sender;
      out.recipient = d.decision;
      out.content = incoming.content;
      out.layer = layer;
      record(ctx, std::move(out));

      Ctx child{t0, ctx.depth + 1, ctx.out};
      auto back = make_event(EventKind::routing_relay, agent, t0, t0);
      back.sender = d.decision;
      back.recipient = incoming.sender;
      back.reply = true;
      back.layer = layer;
      try {
        bool inner = false;
        auto text = route_or_run(d.decision, incoming, layer + 1, child, inner);
        ctx.now = child.now;
        back.end_ms = ctx.now;
        back.content = text;
        back.output_token_count = count_output_tokens(text);
        record(ctx, std::move(back));
        relayed = true;
        return text;
      } catch (const Error& err) {
        ctx.now = child.now;
        back.end_ms = ctx.now;
        back.error = true;
        back.content = Error(ErrorCode::RelayFailure, d.decision + ": " + err.what()).what();
        record(ctx, std::move(back));
      }
    }
  }
  return agent_loop(agent, ctx);
}

Message Session::handle_user_message(const std::string& content) {
  ++turn_;
  for (auto& [_, st] : agents_) st.sends_this_turn = 0;
  const auto& root = graph_.root();
  Ctx ctx{now_ms_, 0, &events_};
  const auto t0 = ctx.now;
  Message incoming{std::string(kUserAgent), root, content, MessageKind::chat, t0};
  auto in = make_event(EventKind::chat, std::string(kUserAgent), t0, t0);
  in.recipient = root;
  in.content = content;
  in.output_token_count = count_output_tokens(content);
  record(ctx, std::move(in));

  std::string text;
  bool relayed = false;
  try {
    text = route_or_run(root, incoming, 1, ctx, relayed);
  } catch (...) {
    now_ms_ = ctx.now;
    commit();
    throw;
  }
  if (!relayed) {
    auto reply = make_event(EventKind::chat, root, t0, ctx.now);
    reply.recipient = std::string(kUserAgent);
    reply.reply = true;
    reply.content = text;
    reply.output_token_count = count_output_tokens(text);
    record(ctx, std::move(reply));
  }
  now_ms_ = ctx.now;
  commit();
  return Message{root, std::string(kUserAgent), text, MessageKind::chat, now_ms_};
}

Message Session::send_message(const AgentId& sender, const AgentId& recipient,
                               const std::string& content) {
  Ctx ctx{now_ms_, graph_.depth_of(sender), &events_};
  auto outcomes = dispatch_wave(sender, {SendRequest{recipient, content, ""}}, ctx);
  now_ms_ = ctx.now;
  commit();
  auto& outcome = outcomes.front();
  if (outcome.error) throw *outcome.error;
  return *outcome.response;
}

std::vector<ChannelOutcome> Session::dispatch_parallel(const AgentId& sender,
                                                       const std::vector<SendRequest>& requests) {
  Ctx ctx{now_ms_, graph_.depth_of(sender), &events_};
  auto outcomes = dispatch(sender, requests, ctx);
  now_ms_ = ctx.now;
  commit();
  return outcomes;
}

Message Session::run_agent_turn(const AgentId& agent, const Message& incoming) {
  if (!graph_.contains(agent)) fail(ErrorCode::UnknownAgent, agent);
  if (incoming.recipient != agent) {
    fail(ErrorCode::UnknownRecipient, "message for " + incoming.recipient + " given to " + agent);
  }
  Ctx ctx{now_ms_, graph_.depth_of(agent), &events_};
  const auto t0 = ctx.now;
  auto in = make_event(EventKind::chat, incoming.sender, t0, t0);
  in.recipient = agent;
  in.content = incoming.content;
  in.output_token_count = count_output_tokens(incoming.content);
  record(ctx, std::move(in));
  std::string text;
  try {
    text = agent_loop(agent, ctx);
  } catch (...) {
    now_ms_ = ctx.now;
    commit();
    throw;
  }
  auto reply = make_event(EventKind::chat, agent, t0, ctx.now);
  reply.recipient = incoming.sender;
  reply.reply = true;
  reply.content = text;
  reply.output_token_count = count_output_tokens(text);
  record(ctx, std::move(reply));
  now_ms_ = ctx.now;
  commit();
  return Message{agent, incoming.sender, text, MessageKind::chat, now_ms_};
}

}  // namespace agentcollab
