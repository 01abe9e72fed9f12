#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace agentcollab {

using AgentId = std::string;

/// Pseudo-agent standing in for the human. Profiles may not claim this id.
inline constexpr std::string_view kUserAgent = "user";

struct ToolParameter {
  std::string name;
  std::string type = "string";
  bool required = true;
  std::string description;
  // Non-empty means the value must be one of these strings.
  std::vector<std::string> allowed_values;

  bool operator==(const ToolParameter&) const = default;
};

struct ToolSchema {
  std::string name;
  std::string description;
  std::vector<ToolParameter> parameters;

  const ToolParameter* find_parameter(std::string_view param) const;

  bool operator==(const ToolSchema&) const = default;
};

struct ActionGroup {
  std::string group_id;
  std::vector<ToolSchema> tools;

  bool operator==(const ActionGroup&) const = default;
};

struct AgentProfile {
  AgentId agent_id;
  std::string display_name;
  std::string instruction;
  std::vector<std::string> action_groups;
  std::vector<AgentId> sub_agents;

  bool operator==(const AgentProfile&) const = default;
};

/// Validated, immutable supervisor/specialist tree.
///
/// Every agent except the root has exactly one parent. The root sees the
/// "user" pseudo-agent in place of a parent. Safe to share across sessions.
class AgentGraph {
 public:
  AgentGraph() = default;

  const AgentId& root() const noexcept { return root_; }
  const std::string& domain() const noexcept { return domain_; }
  std::size_t size() const noexcept { return profiles_.size(); }

  bool contains(std::string_view agent_id) const;
  const AgentProfile& profile(std::string_view agent_id) const;
  std::optional<AgentId> parent(std::string_view agent_id) const;
  bool is_root(std::string_view agent_id) const { return agent_id == root_; }

  /// Number of edges on the longest root-to-leaf path.
  int depth() const noexcept { return depth_; }
  int depth_of(std::string_view agent_id) const;

  /// Agents in pre-order, children visited in declaration order.
  const std::vector<AgentId>& preorder() const noexcept { return preorder_; }

  const std::map<std::string, ActionGroup, std::less<>>& action_groups() const noexcept {
    return groups_;
  }
  const ActionGroup& action_group(std::string_view group_id) const;

  /// Tools bound to an agent, in action-group order.
  std::vector<ToolSchema> tools_for(std::string_view agent_id) const;
  std::optional<ToolSchema> find_tool(std::string_view agent_id, std::string_view tool) const;

  /// Profiles in pre-order.
  std::vector<AgentProfile> profiles() const;

  /// Action groups in first-use pre-order followed by unreferenced ones.
  std::vector<ActionGroup> groups_in_order() const;

 private:
  friend AgentGraph build_agent_graph(std::vector<AgentProfile>, std::vector<ActionGroup>,
                                      std::string);

  std::map<AgentId, AgentProfile, std::less<>> profiles_;
  std::map<AgentId, AgentId, std::less<>> parents_;
  std::map<AgentId, int, std::less<>> depths_;
  std::map<std::string, ActionGroup, std::less<>> groups_;
  std::vector<AgentId> preorder_;
  std::vector<std::string> group_order_;
  AgentId root_;
  std::string domain_;
  int depth_ = 0;
};

/// Validates profiles into a rooted tree.
///
/// Throws Error with DuplicateAgentId, ReservedAgentId, UnknownSubAgent,
/// UnknownActionGroup, MultipleParents, MultipleRoots, CycleDetected,
/// DuplicateToolName or SchemaViolation.
AgentGraph build_agent_graph(std::vector<AgentProfile> profiles,
                             std::vector<ActionGroup> action_groups,
                             std::string domain = {});

/// Parent (or "user" for the root) plus direct sub-agents.
std::set<AgentId> visible_agents(const AgentGraph& graph, std::string_view agent_id);

/// Single-agent baseline: every action group of the tree on one profile.
///
/// The profile keeps the root's id and display name. Instructions are joined
/// in pre-order. Groups are de-duplicated by id; two distinct groups
/// exposing the same tool name raise DuplicateToolName.
AgentProfile flatten_to_single_agent(const AgentGraph& graph);

/// The flattened profile wrapped in a one-node graph.
AgentGraph single_agent_graph(const AgentGraph& graph);

bool is_valid_agent_id(std::string_view id);

}  // namespace agentcollab
