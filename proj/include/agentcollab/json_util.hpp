#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace agentcollab {

using Json = nlohmann::ordered_json;

// Field accessors that raise SchemaViolation naming the JSON path.
const Json& require_field(const Json& obj, std::string_view key, const std::string& path);
std::string require_string(const Json& obj, std::string_view key, const std::string& path);
std::string optional_string(const Json& obj, std::string_view key, const std::string& path,
                            std::string fallback = {});
bool optional_bool(const Json& obj, std::string_view key, const std::string& path,
                   bool fallback);
double optional_number(const Json& obj, std::string_view key, const std::string& path,
                       double fallback);
std::vector<std::string> string_list(const Json& obj, std::string_view key,
                                     const std::string& path, bool required);
void require_object(const Json& value, const std::string& path);

Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Stable rendering for fixed-precision report numbers ("0.90", "13.00").
std::string format_fixed(double value, int decimals);

}  // namespace agentcollab
