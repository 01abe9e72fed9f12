#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "agentcollab/json_util.hpp"

namespace agentcollab {

enum class AssertionSide { user, system };

std::string_view to_string(AssertionSide side) noexcept;

struct Assertion {
  std::string assertion_id;
  AssertionSide side = AssertionSide::user;
  std::string statement;
  // Optional machine-checkable form used by the oracle judge.
  std::optional<Json> check;
};

struct Scenario {
  std::string scenario_id;
  std::string domain;
  std::vector<std::string> goals;
  std::vector<std::string> background;
  std::string input_problem;
  std::vector<Assertion> assertions;

  std::size_t count(AssertionSide side) const;
  std::vector<Assertion> assertions_on(AssertionSide side) const;
};

// Scenario documents are JSON objects:
//
//   scenario_id, domain       strings
//   goals, background         string arrays, or one "scenario" text block
//                             with "Goals:" and "Background:" bullet lists
//   input_problem             string
//   assertions                {"user_side": [...], "system_side": [...]}
//                             where items are statements or objects
//                             {id?, statement, check?}; or a flat array of
//                             {id?, side, statement, check?}; or a text block
//                             with "User-side assertions:" and
//                             "System-side assertions:" bullet lists
//
// Missing ids are filled as u1, u2, ... and s1, s2, ...

/// SchemaViolation naming the offending field path.
Scenario load_scenario(const Json& doc);
Scenario read_scenario(const std::filesystem::path& path);
Json scenario_to_json(const Scenario& scenario);

/// Bullet items ("*", "-" or "•") under each heading of a text block.
/// Lines that are not bullets continue the previous item.
std::vector<std::string> bullet_section(const std::string& text, const std::string& heading);

/// Scenario files under a path: the file itself, or *.json in a directory
/// sorted by name.
std::vector<std::filesystem::path> scenario_files(const std::filesystem::path& path);

}  // namespace agentcollab
