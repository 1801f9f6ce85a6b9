#include "curvopt/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace curvopt {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

bool key_ok(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.' && c != '-')
      return false;
  return true;
}

}  // namespace

ConfigMap ConfigMap::parse_string(const std::string& text, const std::string& origin) {
  ConfigMap cm;
  std::vector<std::string> errors;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto fail = [&](const std::string& what) {
      errors.push_back(origin + ":" + std::to_string(lineno) + ": " + what);
    };
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      fail("expected 'key = value', got '" + s + "'");
      continue;
    }
    std::string key = trim(s.substr(0, eq));
    std::string raw = trim(s.substr(eq + 1));
    if (!key_ok(key)) {
      fail("bad key '" + key + "'");
      continue;
    }
    std::string value;
    if (!raw.empty() && raw[0] == '"') {
      std::size_t close = raw.find('"', 1);
      if (close == std::string::npos) {
        fail("unterminated quote in value for '" + key + "'");
        continue;
      }
      value = raw.substr(1, close - 1);
      std::string rest = trim(raw.substr(close + 1));
      if (!rest.empty() && rest[0] != '#') {
        fail("trailing junk after quoted value for '" + key + "'");
        continue;
      }
    } else {
      std::size_t hash = raw.find('#');
      value = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (value.empty()) {
        fail("empty value for '" + key + "' (quote it if intentional)");
        continue;
      }
    }
    if (!seen.insert(key).second) {
      fail("duplicate key '" + key + "'");
      continue;
    }
    cm.items_.emplace_back(key, value);
  }
  if (!errors.empty()) {
    std::string all;
    for (const std::string& e : errors) {
      if (!all.empty()) all += "\n";
      all += e;
    }
    throw std::runtime_error(all);
  }
  return cm;
}

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

void ConfigMap::set(const std::string& key, const std::string& value) {
  for (auto& kv : items_) {
    if (kv.first == key) {
      kv.second = value;
      return;
    }
  }
  items_.emplace_back(key, value);
}

bool ConfigMap::has(const std::string& key) const { return find(key) != nullptr; }

const std::string* ConfigMap::find(const std::string& key) const {
  for (const auto& kv : items_) {
    if (kv.first == key) {
      consumed_.insert(key);
      return &kv.second;
    }
  }
  return nullptr;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& def) const {
  const std::string* v = find(key);
  return v ? *v : def;
}

double ConfigMap::get_double(const std::string& key, double def) const {
  const std::string* v = find(key);
  if (!v) return def;
  errno = 0;
  char* end = nullptr;
  double x = std::strtod(v->c_str(), &end);
  if (end == v->c_str() || *end != '\0' || errno == ERANGE)
    throw std::runtime_error("config key '" + key + "': expected a number, got '" + *v + "'");
  return x;
}

Index ConfigMap::get_index(const std::string& key, Index def) const {
  const std::string* v = find(key);
  if (!v) return def;
  double x = get_double(key, 0.0);
  Index i = static_cast<Index>(std::llround(x));
  if (static_cast<double>(i) != x)
    throw std::runtime_error("config key '" + key + "': expected an integer, got '" + *v + "'");
  return i;
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t def) const {
  const std::string* v = find(key);
  if (!v) return def;
  double x = get_double(key, 0.0);
  if (!(x >= 0.0) || x > 1.8e19 || std::floor(x) != x)
    throw std::runtime_error("config key '" + key +
                             "': expected a non-negative integer, got '" + *v + "'");
  return static_cast<std::uint64_t>(x);
}

bool ConfigMap::get_bool(const std::string& key, bool def) const {
  const std::string* v = find(key);
  if (!v) return def;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw std::runtime_error("config key '" + key + "': expected a boolean, got '" + *v + "'");
}

std::vector<std::string> ConfigMap::get_list(const std::string& key) const {
  const std::string* v = find(key);
  std::vector<std::string> out;
  if (!v) return out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = v->find(',', start);
    std::string piece = trim(pos == std::string::npos ? v->substr(start)
                                                      : v->substr(start, pos - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> ConfigMap::unconsumed() const {
  std::vector<std::string> out;
  for (const auto& kv : items_)
    if (!consumed_.count(kv.first)) out.push_back(kv.first);
  return out;
}

}  // namespace curvopt
