#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace ovdet {

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string normalize_name(std::string_view s) {
  // lowercase, trim, collapse internal whitespace runs to single spaces
  std::string lowered = to_lower(trim(s));
  std::string out;
  out.reserve(lowered.size());
  bool prev_space = false;
  for (char c : lowered) {
    bool sp = std::isspace(static_cast<unsigned char>(c));
    if (sp && prev_space) continue;
    out.push_back(sp ? ' ' : c);
    prev_space = sp;
  }
  return out;
}

// Splits on anything that is not a letter, digit or apostrophe.
inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || c == '\'') {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace ovdet
