#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "curvopt/types.hpp"

namespace curvopt {

// Flat "key = value" document: one assignment per line, '#' starts a comment,
// values may be double-quoted (needed for '#' or leading/trailing spaces
// inside a value), duplicate keys are an error. Parse problems are collected
// and thrown together, one per line.
class ConfigMap {
 public:
  static ConfigMap parse_string(const std::string& text, const std::string& origin = "<string>");
  static ConfigMap parse_file(const std::string& path);

  // Insert-or-overwrite; CLI flags come through here and win over the file.
  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return items_; }

  // Getters mark keys consumed; typed ones throw naming the key on a bad
  // value. Integer getters also accept exact doubles ("1e7" for a budget).
  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  Index get_index(const std::string& key, Index def) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<std::string> get_list(const std::string& key) const;  // comma-split

  std::vector<std::string> unconsumed() const;

 private:
  const std::string* find(const std::string& key) const;
  std::vector<std::pair<std::string, std::string>> items_;
  mutable std::set<std::string> consumed_;
};

}  // namespace curvopt
