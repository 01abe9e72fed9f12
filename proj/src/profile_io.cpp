#include "agentcollab/profile_io.hpp"

#include "agentcollab/error.hpp"

namespace agentcollab {

namespace {

std::string idx(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

const Json& array_field(const Json& obj, std::string_view key, const std::string& path,
                        bool required) {
  static const Json kEmpty = Json::array();
  auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) {
    if (required) {
      fail(ErrorCode::SchemaViolation, path + "." + std::string(key) + ": missing required field");
    }
    return kEmpty;
  }
  if (!it->is_array()) {
    fail(ErrorCode::SchemaViolation, path + "." + std::string(key) + ": expected an array");
  }
  return *it;
}

}  // namespace

ToolSchema tool_schema_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  ToolSchema tool;
  tool.name = require_string(j, "name", path);
  tool.description = optional_string(j, "description", path);
  const auto& params = array_field(j, "parameters", path, false);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto ppath = idx(path + ".parameters", i);
    const auto& pj = params[i];
    require_object(pj, ppath);
    ToolParameter p;
    p.name = require_string(pj, "name", ppath);
    p.type = optional_string(pj, "type", ppath, "string");
    p.required = optional_bool(pj, "required", ppath, true);
    p.description = optional_string(pj, "description", ppath);
    p.allowed_values = string_list(pj, "enum", ppath, false);
    tool.parameters.push_back(std::move(p));
  }
  return tool;
}

Json tool_schema_to_json(const ToolSchema& tool) {
  Json params = Json::array();
  for (const auto& p : tool.parameters) {
    Json pj = {{"name", p.name}, {"type", p.type}, {"required", p.required}};
    if (!p.description.empty()) pj["description"] = p.description;
    if (!p.allowed_values.empty()) pj["enum"] = p.allowed_values;
    params.push_back(std::move(pj));
  }
  return Json{{"name", tool.name}, {"description", tool.description}, {"parameters", params}};
}

AgentGraph graph_from_json(const Json& doc) {
  const std::string root = "$";
  require_object(doc, root);
  auto domain = optional_string(doc, "domain", root);

  std::vector<ActionGroup> groups;
  const auto& gj = array_field(doc, "action_groups", root, false);
  for (std::size_t i = 0; i < gj.size(); ++i) {
    auto gpath = idx("$.action_groups", i);
    require_object(gj[i], gpath);
    ActionGroup g;
    g.group_id = require_string(gj[i], "group_id", gpath);
    const auto& tools = array_field(gj[i], "tools", gpath, false);
    for (std::size_t t = 0; t < tools.size(); ++t) {
      g.tools.push_back(tool_schema_from_json(tools[t], idx(gpath + ".tools", t)));
    }
    groups.push_back(std::move(g));
  }

  std::vector<AgentProfile> profiles;
  const auto& aj = array_field(doc, "agents", root, true);
  for (std::size_t i = 0; i < aj.size(); ++i) {
    auto apath = idx("$.agents", i);
    require_object(aj[i], apath);
    AgentProfile p;
    p.agent_id = require_string(aj[i], "agent_id", apath);
    p.display_name = optional_string(aj[i], "display_name", apath, p.agent_id);
    p.instruction = optional_string(aj[i], "instruction", apath);
    p.action_groups = string_list(aj[i], "action_groups", apath, false);
    p.sub_agents = string_list(aj[i], "sub_agents", apath, false);
    profiles.push_back(std::move(p));
  }
  return build_agent_graph(std::move(profiles), std::move(groups), std::move(domain));
}

Json graph_to_json(const AgentGraph& graph) {
  Json groups = Json::array();
  for (const auto& g : graph.groups_in_order()) {
    Json tools = Json::array();
    for (const auto& t : g.tools) tools.push_back(tool_schema_to_json(t));
    groups.push_back(Json{{"group_id", g.group_id}, {"tools", tools}});
  }
  Json agents = Json::array();
  for (const auto& p : graph.profiles()) {
    agents.push_back(Json{{"agent_id", p.agent_id},
                          {"display_name", p.display_name},
                          {"instruction", p.instruction},
                          {"action_groups", p.action_groups},
                          {"sub_agents", p.sub_agents}});
  }
  return Json{{"domain", graph.domain()}, {"action_groups", groups}, {"agents", agents}};
}

AgentGraph load_profiles(const std::filesystem::path& path) {
  auto doc = read_json_file(path);
  try {
    return graph_from_json(doc);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace agentcollab
