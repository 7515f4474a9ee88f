#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace vinci {

/// One JSON value per non-blank line. Parse failures raise SchemaViolation
/// naming the offending line.
std::vector<nlohmann::json> read_json_lines(const std::filesystem::path& path);
std::vector<nlohmann::json> parse_json_lines(const std::string& content);

void write_json_lines(const std::filesystem::path& path, const std::vector<nlohmann::json>& records);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace vinci
