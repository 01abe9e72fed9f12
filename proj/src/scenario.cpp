#include "agentcollab/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "agentcollab/error.hpp"

namespace agentcollab {

std::string_view to_string(AssertionSide side) noexcept {
  return side == AssertionSide::user ? "user" : "system";
}

std::size_t Scenario::count(AssertionSide side) const {
  return static_cast<std::size_t>(std::count_if(
      assertions.begin(), assertions.end(), [&](const Assertion& a) { return a.side == side; }));
}

std::vector<Assertion> Scenario::assertions_on(AssertionSide side) const {
  std::vector<Assertion> out;
  for (const auto& a : assertions) {
    if (a.side == side) out.push_back(a);
  }
  return out;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Returns the item text if the line is a bullet.
std::optional<std::string> bullet_text(const std::string& line) {
  static const std::string kDot = "\xE2\x80\xA2";  // U+2022
  if (line.starts_with("* ") || line.starts_with("- ") || line == "*" || line == "-") {
    return trim(line.substr(1));
  }
  if (line.starts_with(kDot)) return trim(line.substr(kDot.size()));
  return std::nullopt;
}

}  // namespace

std::vector<std::string> bullet_section(const std::string& text, const std::string& heading) {
  std::vector<std::string> items;
  std::istringstream in(text);
  std::string raw;
  bool inside = false;
  auto want = lower(heading);
  while (std::getline(in, raw)) {
    auto line = trim(raw);
    if (line.empty()) continue;
    auto item = bullet_text(line);
    if (!item && line.back() == ':') {
      inside = lower(line) == want;
      continue;
    }
    if (!inside) continue;
    if (item) {
      items.push_back(*item);
    } else if (!items.empty()) {
      items.back() += " " + line;
    } else {
      items.push_back(line);
    }
  }
  return items;
}

namespace {

AssertionSide side_from(const Json& value, const std::string& path) {
  if (value.is_string()) {
    auto s = lower(value.get<std::string>());
    if (s == "user" || s == "user_side" || s == "user-side") return AssertionSide::user;
    if (s == "system" || s == "system_side" || s == "system-side") return AssertionSide::system;
  }
  fail(ErrorCode::SchemaViolation, path + ": side must be \"user\" or \"system\", got " + value.dump());
}

Assertion assertion_from(const Json& item, AssertionSide side, const std::string& path) {
  Assertion a;
  a.side = side;
  if (item.is_string()) {
    a.statement = item.get<std::string>();
  } else {
    require_object(item, path);
    a.statement = require_string(item, "statement", path);
    a.assertion_id = optional_string(item, "id", path, "");
    if (auto it = item.find("check"); it != item.end() && !it->is_null()) {
      if (!it->is_object()) fail(ErrorCode::SchemaViolation, path + ".check: expected an object");
      a.check = *it;
    }
  }
  if (trim(a.statement).empty()) fail(ErrorCode::SchemaViolation, path + ": empty statement");
  return a;
}

void add_side_list(const Json& obj, const std::string& key, AssertionSide side,
                   const std::string& path, std::vector<Assertion>& out) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return;
  auto p = path + "." + key;
  if (!it->is_array()) fail(ErrorCode::SchemaViolation, p + ": expected an array");
  for (std::size_t i = 0; i < it->size(); ++i) {
    out.push_back(assertion_from((*it)[i], side, p + "[" + std::to_string(i) + "]"));
  }
}

}  // namespace

Scenario load_scenario(const Json& doc) {
  require_object(doc, "$");
  Scenario s;
  s.scenario_id = require_string(doc, "scenario_id", "$");
  if (s.scenario_id.empty() ||
      s.scenario_id.find_first_of("/\\ \t\n") != std::string::npos) {
    fail(ErrorCode::SchemaViolation, "$.scenario_id: must be non-empty without slashes or spaces");
  }
  s.domain = optional_string(doc, "domain", "$", "");

  if (doc.contains("goals") || doc.contains("background") || !doc.contains("scenario")) {
    s.goals = string_list(doc, "goals", "$", true);
    s.background = string_list(doc, "background", "$", false);
  } else {
    auto block = require_string(doc, "scenario", "$");
    s.goals = bullet_section(block, "Goals:");
    s.background = bullet_section(block, "Background:");
  }
  if (s.goals.empty()) fail(ErrorCode::SchemaViolation, "$.goals: at least one goal is required");

  s.input_problem = require_string(doc, "input_problem", "$");
  if (trim(s.input_problem).empty()) {
    fail(ErrorCode::SchemaViolation, "$.input_problem: must be non-empty");
  }

  const auto& assertions = require_field(doc, "assertions", "$");
  if (assertions.is_object()) {
    for (const auto& [key, _] : assertions.items()) {
      if (key != "user_side" && key != "system_side") {
        fail(ErrorCode::SchemaViolation, "$.assertions." + key + ": unknown side");
      }
    }
    add_side_list(assertions, "user_side", AssertionSide::user, "$.assertions", s.assertions);
    add_side_list(assertions, "system_side", AssertionSide::system, "$.assertions", s.assertions);
  } else if (assertions.is_array()) {
    for (std::size_t i = 0; i < assertions.size(); ++i) {
      auto p = "$.assertions[" + std::to_string(i) + "]";
      const auto& item = assertions[i];
      require_object(item, p);
      auto side = side_from(require_field(item, "side", p), p + ".side");
      s.assertions.push_back(assertion_from(item, side, p));
    }
  } else if (assertions.is_string()) {
    auto block = assertions.get<std::string>();
    for (auto& st : bullet_section(block, "User-side assertions:")) {
      s.assertions.push_back({"", AssertionSide::user, st, std::nullopt});
    }
    for (auto& st : bullet_section(block, "System-side assertions:")) {
      s.assertions.push_back({"", AssertionSide::system, st, std::nullopt});
    }
  } else {
    fail(ErrorCode::SchemaViolation, "$.assertions: expected an object, array or text block");
  }
  if (s.assertions.empty()) {
    fail(ErrorCode::SchemaViolation, "$.assertions: at least one assertion is required");
  }

  int next_user = 0;
  int next_system = 0;
  std::set<std::string> ids;
  for (auto& a : s.assertions) {
    if (a.side == AssertionSide::user) ++next_user;
    else ++next_system;
    if (a.assertion_id.empty()) {
      a.assertion_id = a.side == AssertionSide::user ? "u" + std::to_string(next_user)
                                                     : "s" + std::to_string(next_system);
    }
    if (!ids.insert(a.assertion_id).second) {
      fail(ErrorCode::SchemaViolation, "$.assertions: duplicate id " + a.assertion_id);
    }
  }
  return s;
}

Scenario read_scenario(const std::filesystem::path& path) {
  try {
    return load_scenario(read_json_file(path));
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.detail());
  }
}

Json scenario_to_json(const Scenario& s) {
  Json user = Json::array();
  Json system = Json::array();
  for (const auto& a : s.assertions) {
    Json j{{"id", a.assertion_id}, {"statement", a.statement}};
    if (a.check) j["check"] = *a.check;
    (a.side == AssertionSide::user ? user : system).push_back(std::move(j));
  }
  return Json{{"scenario_id", s.scenario_id},
              {"domain", s.domain},
              {"goals", s.goals},
              {"background", s.background},
              {"input_problem", s.input_problem},
              {"assertions", {{"user_side", user}, {"system_side", system}}}};
}

std::vector<std::filesystem::path> scenario_files(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) fail(ErrorCode::Io, path.string() + " does not exist");
  if (!fs::is_directory(path)) return {path};
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace agentcollab
