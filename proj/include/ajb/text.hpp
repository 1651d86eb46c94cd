#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace ajb {

// Lowercase, drop punctuation, split on whitespace.
inline std::vector<std::string> normalize_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else if (std::ispunct(u)) {
      continue;
    } else {
      current.push_back(static_cast<char>(std::tolower(u)));
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

inline std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

}  // namespace ajb
