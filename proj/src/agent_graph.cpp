#include "agentcollab/agent_graph.hpp"

#include <algorithm>
#include <functional>

#include "agentcollab/error.hpp"

namespace agentcollab {

const ToolParameter* ToolSchema::find_parameter(std::string_view param) const {
  for (const auto& p : parameters) {
    if (p.name == param) return &p;
  }
  return nullptr;
}

bool is_valid_agent_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

bool AgentGraph::contains(std::string_view agent_id) const {
  return profiles_.find(agent_id) != profiles_.end();
}

const AgentProfile& AgentGraph::profile(std::string_view agent_id) const {
  auto it = profiles_.find(agent_id);
  if (it == profiles_.end()) fail(ErrorCode::UnknownAgent, std::string(agent_id));
  return it->second;
}

std::optional<AgentId> AgentGraph::parent(std::string_view agent_id) const {
  if (!contains(agent_id)) fail(ErrorCode::UnknownAgent, std::string(agent_id));
  auto it = parents_.find(agent_id);
  if (it == parents_.end()) return std::nullopt;
  return it->second;
}

int AgentGraph::depth_of(std::string_view agent_id) const {
  auto it = depths_.find(agent_id);
  if (it == depths_.end()) fail(ErrorCode::UnknownAgent, std::string(agent_id));
  return it->second;
}

const ActionGroup& AgentGraph::action_group(std::string_view group_id) const {
  auto it = groups_.find(group_id);
  if (it == groups_.end()) fail(ErrorCode::UnknownActionGroup, std::string(group_id));
  return it->second;
}

std::vector<ToolSchema> AgentGraph::tools_for(std::string_view agent_id) const {
  std::vector<ToolSchema> tools;
  for (const auto& gid : profile(agent_id).action_groups) {
    const auto& group = action_group(gid);
    tools.insert(tools.end(), group.tools.begin(), group.tools.end());
  }
  return tools;
}

std::optional<ToolSchema> AgentGraph::find_tool(std::string_view agent_id,
                                                std::string_view tool) const {
  for (const auto& gid : profile(agent_id).action_groups) {
    for (const auto& t : action_group(gid).tools) {
      if (t.name == tool) return t;
    }
  }
  return std::nullopt;
}

std::vector<AgentProfile> AgentGraph::profiles() const {
  std::vector<AgentProfile> out;
  out.reserve(preorder_.size());
  for (const auto& id : preorder_) out.push_back(profiles_.find(id)->second);
  return out;
}

std::vector<ActionGroup> AgentGraph::groups_in_order() const {
  std::vector<ActionGroup> out;
  for (const auto& gid : group_order_) out.push_back(groups_.find(gid)->second);
  return out;
}

namespace {

void validate_group(const ActionGroup& group) {
  if (group.group_id.empty()) fail(ErrorCode::SchemaViolation, "action group without group_id");
  std::set<std::string> names;
  for (const auto& tool : group.tools) {
    if (tool.name.empty()) {
      fail(ErrorCode::SchemaViolation, "tool without name in group " + group.group_id);
    }
    if (!names.insert(tool.name).second) {
      fail(ErrorCode::DuplicateToolName, tool.name + " in group " + group.group_id);
    }
    std::set<std::string> params;
    for (const auto& p : tool.parameters) {
      if (!params.insert(p.name).second) {
        fail(ErrorCode::SchemaViolation,
             "duplicate parameter " + p.name + " on tool " + tool.name);
      }
    }
  }
}

}  // namespace

AgentGraph build_agent_graph(std::vector<AgentProfile> profiles,
                             std::vector<ActionGroup> action_groups, std::string domain) {
  if (profiles.empty()) fail(ErrorCode::SchemaViolation, "no agent profiles");

  AgentGraph g;
  g.domain_ = std::move(domain);

  std::vector<std::string> declared_groups;
  for (auto& group : action_groups) {
    validate_group(group);
    declared_groups.push_back(group.group_id);
    auto id = group.group_id;
    if (!g.groups_.emplace(id, std::move(group)).second) {
      fail(ErrorCode::SchemaViolation, "duplicate action group " + id);
    }
  }

  std::vector<AgentId> declared;
  for (auto& p : profiles) {
    if (p.agent_id == kUserAgent) fail(ErrorCode::ReservedAgentId, p.agent_id);
    if (!is_valid_agent_id(p.agent_id)) {
      fail(ErrorCode::SchemaViolation, "invalid agent id '" + p.agent_id + "'");
    }
    declared.push_back(p.agent_id);
    auto id = p.agent_id;
    if (!g.profiles_.emplace(id, std::move(p)).second) fail(ErrorCode::DuplicateAgentId, id);
  }

  for (const auto& [id, p] : g.profiles_) {
    for (const auto& gid : p.action_groups) {
      if (!g.groups_.contains(gid)) fail(ErrorCode::UnknownActionGroup, gid + " on " + id);
    }
    for (const auto& child : p.sub_agents) {
      if (!g.profiles_.contains(child)) fail(ErrorCode::UnknownSubAgent, child + " under " + id);
      if (child == id) fail(ErrorCode::CycleDetected, id + " lists itself as a sub-agent");
      auto [it, inserted] = g.parents_.emplace(child, id);
      if (!inserted) {
        if (it->second == id) fail(ErrorCode::SchemaViolation, "repeated sub-agent " + child);
        fail(ErrorCode::MultipleParents, child + " under " + it->second + " and " + id);
      }
    }
  }

  std::vector<AgentId> roots;
  for (const auto& id : declared) {
    if (!g.parents_.contains(id)) roots.push_back(id);
  }
  if (roots.empty()) fail(ErrorCode::CycleDetected, "no agent without a parent");
  if (roots.size() > 1) {
    std::string list;
    for (const auto& r : roots) list += (list.empty() ? "" : ", ") + r;
    fail(ErrorCode::MultipleRoots, list);
  }
  g.root_ = roots.front();

  std::function<void(const AgentId&, int)> visit = [&](const AgentId& id, int depth) {
    g.preorder_.push_back(id);
    g.depths_[id] = depth;
    g.depth_ = std::max(g.depth_, depth);
    for (const auto& child : g.profiles_.find(id)->second.sub_agents) visit(child, depth + 1);
  };
  visit(g.root_, 0);
  if (g.preorder_.size() != g.profiles_.size()) {
    for (const auto& id : declared) {
      if (!g.depths_.contains(id)) fail(ErrorCode::CycleDetected, "unreachable cycle through " + id);
    }
  }

  std::set<std::string> seen;
  for (const auto& id : g.preorder_) {
    for (const auto& gid : g.profiles_.find(id)->second.action_groups) {
      if (seen.insert(gid).second) g.group_order_.push_back(gid);
    }
  }
  for (const auto& gid : declared_groups) {
    if (seen.insert(gid).second) g.group_order_.push_back(gid);
  }
  return g;
}

std::set<AgentId> visible_agents(const AgentGraph& graph, std::string_view agent_id) {
  const auto& p = graph.profile(agent_id);
  std::set<AgentId> out(p.sub_agents.begin(), p.sub_agents.end());
  auto parent = graph.parent(agent_id);
  out.insert(parent ? *parent : AgentId(kUserAgent));
  return out;
}

AgentProfile flatten_to_single_agent(const AgentGraph& graph) {
  const auto& root = graph.profile(graph.root());
  AgentProfile flat;
  flat.agent_id = root.agent_id;
  flat.display_name = root.display_name;

  std::set<std::string> groups_seen;
  std::map<std::string, std::string> tool_owner;
  for (const auto& id : graph.preorder()) {
    const auto& p = graph.profile(id);
    if (!p.instruction.empty()) {
      if (!flat.instruction.empty()) flat.instruction += "\n\n";
      flat.instruction += p.instruction;
    }
    for (const auto& gid : p.action_groups) {
      if (!groups_seen.insert(gid).second) continue;
      for (const auto& tool : graph.action_group(gid).tools) {
        auto [it, inserted] = tool_owner.emplace(tool.name, gid);
        if (!inserted) {
          fail(ErrorCode::DuplicateToolName,
               tool.name + " exposed by both " + it->second + " and " + gid);
        }
      }
      flat.action_groups.push_back(gid);
    }
  }
  return flat;
}

AgentGraph single_agent_graph(const AgentGraph& graph) {
  auto flat = flatten_to_single_agent(graph);
  std::vector<ActionGroup> groups;
  for (const auto& gid : flat.action_groups) groups.push_back(graph.action_group(gid));
  return build_agent_graph({std::move(flat)}, std::move(groups), graph.domain());
}

}  // namespace agentcollab
