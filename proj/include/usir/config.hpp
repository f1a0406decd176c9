#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "usir/errors.hpp"

namespace usir {

/// Sectioned key-value configuration.
///
/// Grammar (one entry per line):
///   [section]          starts a section
///   key = value        assigns; repeating a key within a section appends,
///                      forming a list
///   # comment          full-line comments; blank lines ignored
/// Keys and values are whitespace-trimmed; values may contain spaces.
class Config {
public:
  static Config parse_string(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string t = trim(line);
      if (t.empty() || t.front() == '#')
        continue;
      if (t.front() == '[') {
        if (t.back() != ']' || t.size() < 3)
          throw ConfigError("config line " + std::to_string(line_no) +
                            ": malformed section header");
        section = trim(t.substr(1, t.size() - 2));
        continue;
      }
      const std::size_t eq = t.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": expected key = value");
      const std::string key = trim(t.substr(0, eq));
      if (key.empty())
        throw ConfigError("config line " + std::to_string(line_no) +
                          ": empty key");
      cfg.entries_[section][key].push_back(trim(t.substr(eq + 1)));
    }
    return cfg;
  }

  static Config parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
      throw IoError(IoError::Kind::OpenFailed,
                    "config: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str());
  }

  [[nodiscard]] bool has(const std::string& section,
                         const std::string& key) const {
    const auto s = entries_.find(section);
    return s != entries_.end() && s->second.find(key) != s->second.end();
  }

  [[nodiscard]] const std::vector<std::string>&
  get_list(const std::string& section, const std::string& key) const {
    const auto s = entries_.find(section);
    if (s == entries_.end())
      throw ConfigError("config: missing section [" + section + "]");
    const auto k = s->second.find(key);
    if (k == s->second.end())
      throw ConfigError("config: missing key '" + key + "' in [" + section + "]");
    return k->second;
  }

  [[nodiscard]] std::string get_string(const std::string& section,
                                       const std::string& key) const {
    const std::vector<std::string>& values = get_list(section, key);
    if (values.size() != 1)
      throw ConfigError("config: key '" + key + "' in [" + section +
                        "] given " + std::to_string(values.size()) +
                        " times, expected once");
    return values.front();
  }

  [[nodiscard]] std::string get_string_or(const std::string& section,
                                          const std::string& key,
                                          const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
  }

  [[nodiscard]] double get_double(const std::string& section,
                                  const std::string& key) const {
    return to_double(section, key, get_string(section, key));
  }

  [[nodiscard]] double get_double_or(const std::string& section,
                                     const std::string& key,
                                     double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
  }

  [[nodiscard]] int get_int(const std::string& section,
                            const std::string& key) const {
    const std::string v = get_string(section, key);
    try {
      std::size_t used = 0;
      const long n = std::stol(v, &used);
      if (used != v.size() || n < INT32_MIN || n > INT32_MAX)
        throw std::invalid_argument(v);
      return static_cast<int>(n);
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' in [" + section +
                        "] is not an integer: '" + v + "'");
    }
  }

  [[nodiscard]] int get_int_or(const std::string& section,
                               const std::string& key, int fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
  }

  [[nodiscard]] std::uint64_t get_seed_or(const std::string& section,
                                          const std::string& key,
                                          std::uint64_t fallback) const {
    if (!has(section, key))
      return fallback;
    const std::string v = get_string(section, key);
    try {
      std::size_t used = 0;
      const unsigned long long n = std::stoull(v, &used);
      if (used != v.size())
        throw std::invalid_argument(v);
      return static_cast<std::uint64_t>(n);
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' in [" + section +
                        "] is not a seed: '" + v + "'");
    }
  }

  [[nodiscard]] std::vector<double>
  get_double_list(const std::string& section, const std::string& key) const {
    const std::vector<std::string>& raw = get_list(section, key);
    std::vector<double> out;
    out.reserve(raw.size());
    for (const std::string& v : raw)
      out.push_back(to_double(section, key, v));
    return out;
  }

private:
  static std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
      return {};
    const std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  }

  static double to_double(const std::string& section, const std::string& key,
                          const std::string& v) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size())
        throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + key + "' in [" + section +
                        "] is not a number: '" + v + "'");
    }
  }

  std::map<std::string, std::map<std::string, std::vector<std::string>>> entries_;
};

} // namespace usir
