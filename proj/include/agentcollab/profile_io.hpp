#pragma once

#include <filesystem>

#include "agentcollab/agent_graph.hpp"
#include "agentcollab/json_util.hpp"

namespace agentcollab {

// Profile documents are JSON:
//
//   { "domain": "...",
//     "action_groups": [ { "group_id": "...",
//                          "tools": [ { "name": "...", "description": "...",
//                                       "parameters": [ { "name": "...", "type": "...",
//                                                         "required": true } ] } ] } ],
//     "agents": [ { "agent_id": "...", "display_name": "...", "instruction": "...",
//                   "action_groups": [...], "sub_agents": [...] } ] }

ToolSchema tool_schema_from_json(const Json& j, const std::string& path);
Json tool_schema_to_json(const ToolSchema& tool);

AgentGraph graph_from_json(const Json& doc);
Json graph_to_json(const AgentGraph& graph);
AgentGraph load_profiles(const std::filesystem::path& path);

}  // namespace agentcollab
