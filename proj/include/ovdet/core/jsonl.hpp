#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace ovdet {

using json = nlohmann::json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
}

// Calls fn(line_number, parsed_json) per nonempty line. Parse failures
// carry the 1-based line number.
inline void for_each_jsonl(const std::string& path,
                           const std::function<void(size_t, const json&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw std::runtime_error(path + ": malformed line " + std::to_string(lineno));
    }
    fn(lineno, j);
  }
}

inline std::vector<json> load_jsonl(const std::string& path) {
  std::vector<json> rows;
  for_each_jsonl(path, [&](size_t, const json& j) { rows.push_back(j); });
  return rows;
}

class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path, bool append = false) {
    auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    out_.open(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
    if (!out_) throw std::runtime_error("cannot write file: " + path);
  }
  void write(const json& j) { out_ << j.dump() << "\n"; }
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

}  // namespace ovdet
