#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "flowfuse/error.hpp"

namespace flowfuse {

/// Flat `key = value` text with optional `[section]` headers.
///
/// Keys inside a section are stored as "section.key". '#' starts a comment.
class KeyValueConfig {
public:
  static KeyValueConfig parse(std::istream& is, const std::string& origin = "<config>") {
    KeyValueConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') fail(ErrorKind::InvalidArgument, origin + ":" + std::to_string(lineno) + ": bad section");
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        fail(ErrorKind::InvalidArgument, origin + ":" + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) fail(ErrorKind::InvalidArgument, origin + ":" + std::to_string(lineno) + ": empty key");
      cfg.values_[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::InvalidArgument, "cannot read config " + path);
    return parse(is, path);
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) fail(ErrorKind::InvalidArgument, "missing config key '" + key + "'");
    return it->second;
  }

  std::string get(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
  }

  double get_double(const std::string& key) const { return to_double(key, get(key)); }
  double get_double(const std::string& key, double fallback) const { return has(key) ? get_double(key) : fallback; }

  long get_int(const std::string& key) const {
    const double v = get_double(key);
    if (v != static_cast<double>(static_cast<long>(v)))
      fail(ErrorKind::InvalidArgument, "config key '" + key + "' must be an integer");
    return static_cast<long>(v);
  }
  long get_int(const std::string& key, long fallback) const { return has(key) ? get_int(key) : fallback; }

  bool get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto v = get(key);
    if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "off" || v == "no") return false;
    fail(ErrorKind::InvalidArgument, "config key '" + key + "' must be a boolean");
  }

  std::vector<double> get_doubles(const std::string& key) const {
    std::istringstream ss(get(key));
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(to_double(key, tok));
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  void write(std::ostream& os) const {
    std::string section;
    for (const auto& [key, value] : values_) {
      const auto dot = key.find('.');
      const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
      const std::string name = dot == std::string::npos ? key : key.substr(dot + 1);
      if (sec != section) {
        os << '[' << sec << "]\n";
        section = sec;
      }
      os << name << " = " << value << '\n';
    }
  }

private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static double to_double(const std::string& key, const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::InvalidArgument, "config key '" + key + "': '" + s + "' is not a number");
  }

  std::map<std::string, std::string> values_;
};

}  // namespace flowfuse
