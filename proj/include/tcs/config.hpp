#pragma once

// Minimal structured-config reader: named sections, scalar and flat-array
// values, full-line or trailing comments.  Covers the subset of TOML the
// scenario files use; anything outside that subset is a parse error with a
// file:line diagnostic rather than a silent guess.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tcs/errors.hpp"

namespace tcs {

struct ConfigValue {
  enum class Kind { number, text, boolean, number_list, text_list };
  Kind kind = Kind::number;
  double num = 0.0;
  std::string str;
  bool flag = false;
  std::vector<double> nums;
  std::vector<std::string> strs;
  int line = 0;
};

class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text, const std::string& origin = "<config>") {
    Config c;
    c.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = strip_comment(raw, origin, line_no);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ConfigError(where(origin, line_no) + "unterminated section header");
        section = trim(line.substr(1, line.size() - 2));
        if (section.empty() || !valid_key(section))
          throw ConfigError(where(origin, line_no) + "invalid section name '" + section + "'");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(where(origin, line_no) + "expected 'key = value'");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (key.empty() || !valid_key(key))
        throw ConfigError(where(origin, line_no) + "invalid key '" + key + "'");
      if (val.empty()) throw ConfigError(where(origin, line_no) + "missing value for '" + key + "'");
      const std::string full = section.empty() ? key : section + "." + key;
      if (c.entries_.count(full))
        throw ConfigError(where(origin, line_no) + "duplicate key '" + full + "' (first set on line " +
                          std::to_string(c.entries_.at(full).line) + ")");
      c.entries_[full] = parse_value(val, origin, line_no);
    }
    return c;
  }

  static Config parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  double number(const std::string& key) const {
    const ConfigValue& v = fetch(key);
    if (v.kind != ConfigValue::Kind::number)
      throw ConfigError(where_key(key) + "expected a number");
    return v.num;
  }
  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  long long integer(const std::string& key) const {
    const double d = number(key);
    const long long n = static_cast<long long>(d);
    if (static_cast<double>(n) != d)
      throw ConfigError(where_key(key) + "expected an integer");
    return n;
  }
  long long integer_or(const std::string& key, long long fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  const std::string& text(const std::string& key) const {
    const ConfigValue& v = fetch(key);
    if (v.kind != ConfigValue::Kind::text)
      throw ConfigError(where_key(key) + "expected a quoted string");
    return v.str;
  }
  std::string text_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  bool boolean(const std::string& key) const {
    const ConfigValue& v = fetch(key);
    if (v.kind != ConfigValue::Kind::boolean)
      throw ConfigError(where_key(key) + "expected true or false");
    return v.flag;
  }
  bool boolean_or(const std::string& key, bool fallback) const {
    return has(key) ? boolean(key) : fallback;
  }

  std::vector<double> numbers(const std::string& key) const {
    const ConfigValue& v = fetch(key);
    if (v.kind == ConfigValue::Kind::number) return {v.num};
    if (v.kind != ConfigValue::Kind::number_list)
      throw ConfigError(where_key(key) + "expected an array of numbers");
    return v.nums;
  }
  std::vector<double> numbers_or(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? numbers(key) : std::move(fallback);
  }

  // Either "t_star"-style keywords or a plain number; the caller branches.
  bool is_number(const std::string& key) const {
    return fetch(key).kind == ConfigValue::Kind::number;
  }

  int line_of(const std::string& key) const { return fetch(key).line; }

  // Keys present in the file but never read by the consumer; each one is a
  // typo or an unsupported option, so scenario loading reports them.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
      if (!used_.count(k)) out.push_back(k + " (line " + std::to_string(v.line) + ")");
    return out;
  }

  const std::string& origin() const { return origin_; }

 private:
  const ConfigValue& fetch(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  std::string where_key(const std::string& key) const {
    auto it = entries_.find(key);
    const int ln = it == entries_.end() ? 0 : it->second.line;
    return where(origin_, ln) + "key '" + key + "': ";
  }

  static std::string where(const std::string& origin, int line) {
    return origin + ":" + std::to_string(line) + ": ";
  }

  static std::string trim(const std::string& s) {
    auto b = s.begin(), e = s.end();
    while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
    while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
    return std::string(b, e);
  }

  static bool valid_key(const std::string& k) {
    return std::all_of(k.begin(), k.end(), [](unsigned char c) {
      return std::isalnum(c) || c == '_' || c == '-' || c == '.';
    });
  }

  static std::string strip_comment(const std::string& line, const std::string& origin,
                                   int line_no) {
    std::string out;
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (ch == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
      if (ch == '#' && !in_string) return out;
      out.push_back(ch);
    }
    if (in_string) throw ConfigError(where(origin, line_no) + "unterminated string");
    return out;
  }

  static bool parse_number(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.data();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + s.size();
  }

  static std::string parse_quoted(const std::string& s, const std::string& origin, int line_no) {
    if (s.size() < 2 || s.back() != '"')
      throw ConfigError(where(origin, line_no) + "unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      if (s[i] == '\\') {
        ++i;
        if (i + 1 >= s.size() || (s[i] != '"' && s[i] != '\\'))
          throw ConfigError(where(origin, line_no) + "unsupported escape in string");
        out.push_back(s[i]);
      } else if (s[i] == '"') {
        throw ConfigError(where(origin, line_no) + "unexpected '\"' inside string");
      } else {
        out.push_back(s[i]);
      }
    }
    return out;
  }

  static std::vector<std::string> split_top_level(const std::string& body,
                                                  const std::string& origin, int line_no) {
    std::vector<std::string> parts;
    std::string cur;
    bool in_string = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
      const char ch = body[i];
      if (ch == '"' && (i == 0 || body[i - 1] != '\\')) in_string = !in_string;
      if (ch == ',' && !in_string) {
        parts.push_back(trim(cur));
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    if (in_string) throw ConfigError(where(origin, line_no) + "unterminated string in array");
    const std::string last = trim(cur);
    if (!last.empty()) parts.push_back(last);
    return parts;
  }

  static ConfigValue parse_value(const std::string& val, const std::string& origin, int line_no) {
    ConfigValue v;
    v.line = line_no;
    if (val.front() == '"') {
      v.kind = ConfigValue::Kind::text;
      v.str = parse_quoted(val, origin, line_no);
      return v;
    }
    if (val == "true" || val == "false") {
      v.kind = ConfigValue::Kind::boolean;
      v.flag = val == "true";
      return v;
    }
    if (val.front() == '[') {
      if (val.back() != ']') throw ConfigError(where(origin, line_no) + "unterminated array");
      const auto parts = split_top_level(val.substr(1, val.size() - 2), origin, line_no);
      if (parts.empty()) throw ConfigError(where(origin, line_no) + "empty array");
      if (parts.front().front() == '"') {
        v.kind = ConfigValue::Kind::text_list;
        for (const auto& p : parts) {
          if (p.empty() || p.front() != '"')
            throw ConfigError(where(origin, line_no) + "mixed array element types");
          v.strs.push_back(parse_quoted(p, origin, line_no));
        }
      } else {
        v.kind = ConfigValue::Kind::number_list;
        for (const auto& p : parts) {
          double d = 0.0;
          if (!parse_number(p, d))
            throw ConfigError(where(origin, line_no) + "bad number '" + p + "' in array");
          v.nums.push_back(d);
        }
      }
      return v;
    }
    double d = 0.0;
    if (parse_number(val, d)) {
      v.kind = ConfigValue::Kind::number;
      v.num = d;
      return v;
    }
    throw ConfigError(where(origin, line_no) + "cannot parse value '" + val + "'");
  }

  std::string origin_ = "<config>";
  std::map<std::string, ConfigValue> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace tcs
