#include "vinci/common/json_lines.hpp"

#include <fstream>
#include <sstream>

#include "vinci/common/error.hpp"
#include "vinci/common/text.hpp"

namespace vinci {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << content;
  if (!out) fail(ErrorCode::Io, "short write to " + path.string());
}

std::vector<nlohmann::json> parse_json_lines(const std::string& content) {
  std::vector<nlohmann::json> records;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      records.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::SchemaViolation, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::vector<nlohmann::json> read_json_lines(const std::filesystem::path& path) {
  return parse_json_lines(read_file(path));
}

void write_json_lines(const std::filesystem::path& path, const std::vector<nlohmann::json>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump();
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace vinci
