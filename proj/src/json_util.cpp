#include "agentcollab/json_util.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "agentcollab/error.hpp"

namespace agentcollab {

namespace {

std::string child(const std::string& path, std::string_view key) {
  return path + "." + std::string(key);
}

}  // namespace

void require_object(const Json& value, const std::string& path) {
  if (!value.is_object()) fail(ErrorCode::SchemaViolation, path + ": expected an object");
}

const Json& require_field(const Json& obj, std::string_view key, const std::string& path) {
  require_object(obj, path);
  auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) {
    fail(ErrorCode::SchemaViolation, child(path, key) + ": missing required field");
  }
  return *it;
}

std::string require_string(const Json& obj, std::string_view key, const std::string& path) {
  const auto& v = require_field(obj, key, path);
  if (!v.is_string()) fail(ErrorCode::SchemaViolation, child(path, key) + ": expected a string");
  return v.get<std::string>();
}

std::string optional_string(const Json& obj, std::string_view key, const std::string& path,
                            std::string fallback) {
  auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_string()) fail(ErrorCode::SchemaViolation, child(path, key) + ": expected a string");
  return it->get<std::string>();
}

bool optional_bool(const Json& obj, std::string_view key, const std::string& path,
                   bool fallback) {
  auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_boolean()) fail(ErrorCode::SchemaViolation, child(path, key) + ": expected a boolean");
  return it->get<bool>();
}

double optional_number(const Json& obj, std::string_view key, const std::string& path,
                       double fallback) {
  auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number()) fail(ErrorCode::SchemaViolation, child(path, key) + ": expected a number");
  return it->get<double>();
}

std::vector<std::string> string_list(const Json& obj, std::string_view key,
                                     const std::string& path, bool required) {
  auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) {
    if (required) fail(ErrorCode::SchemaViolation, child(path, key) + ": missing required field");
    return {};
  }
  if (!it->is_array()) fail(ErrorCode::SchemaViolation, child(path, key) + ": expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& v = (*it)[i];
    if (!v.is_string()) {
      fail(ErrorCode::SchemaViolation,
           child(path, key) + "[" + std::to_string(i) + "]: expected a string");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::filesystem::path& path) {
  auto text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string format_fixed(double value, int decimals) {
  if (std::isnan(value)) return "nan";
  // Round half away from zero at the requested precision so that exact
  // rationals like 27/30 render identically on every platform.
  double scale = std::pow(10.0, decimals);
  double rounded = std::round(value * scale) / scale;
  if (rounded == 0.0) rounded = 0.0;  // drop negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded);
  return buf;
}

}  // namespace agentcollab
