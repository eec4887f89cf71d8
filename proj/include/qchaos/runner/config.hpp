#pragma once

// Experiment configuration: a nested key/value text format with explicit types.
//
//   # comment
//   experiment: string = kho-otoc
//   seed: int = 7
//   [params]
//   R: double = 2
//   K: double = 0.1
//
// Section headers prefix the keys that follow them ("params.R"). Dotted keys
// may also be written out in full. Types: int, double, bool, string.

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>

#include "../types.hpp"

namespace qchaos::runner {

struct ConfigError : Error {
  std::string key;
  ConfigError(std::string k, const std::string& msg) : Error(msg), key(std::move(k)) {}
};

using Value = std::variant<std::int64_t, double, bool, std::string>;

inline const char* type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "int";
    case 1: return "double";
    case 2: return "bool";
    default: return "string";
  }
}

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string value_text(const Value& v) {
  switch (v.index()) {
    case 0: return std::to_string(std::get<std::int64_t>(v));
    case 1: return format_double(std::get<double>(v));
    case 2: return std::get<bool>(v) ? "true" : "false";
    default: return std::get<std::string>(v);
  }
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline Value parse_value(const std::string& key, const std::string& type, const std::string& text) {
  try {
    std::size_t used = 0;
    if (type == "int") {
      const long long x = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing");
      return static_cast<std::int64_t>(x);
    }
    if (type == "double") {
      const double x = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing");
      return x;
    }
  } catch (const std::exception&) {
    throw ConfigError(key, "invalid " + type + " value '" + text + "' for key '" + key + "'");
  }
  if (type == "bool") {
    if (text == "true") return true;
    if (text == "false") return false;
    throw ConfigError(key, "invalid bool value '" + text + "' for key '" + key + "'");
  }
  if (type == "string") return text;
  throw ConfigError(key, "unknown type '" + type + "' for key '" + key + "'");
}

// Flat view of the tree: keys are dotted paths, kept sorted.
using ParamTree = std::map<std::string, Value>;

inline ParamTree parse_tree(const std::string& text) {
  ParamTree out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("", "line " + std::to_string(lineno) + ": malformed section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto colon = s.find(':'), eq = s.find('=');
    if (colon == std::string::npos || eq == std::string::npos || colon > eq)
      throw ConfigError(trim(s.substr(0, std::min(colon, eq))),
                        "line " + std::to_string(lineno) + ": expected 'key: type = value'");
    const std::string name = trim(s.substr(0, colon));
    const std::string key = section.empty() ? name : section + "." + name;
    if (name.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
    if (out.count(key)) throw ConfigError(key, "duplicate key '" + key + "'");
    out[key] = parse_value(key, trim(s.substr(colon + 1, eq - colon - 1)), trim(s.substr(eq + 1)));
  }
  return out;
}

inline std::string serialize_tree(const ParamTree& t) {
  std::ostringstream os;
  for (const auto& [k, v] : t) os << k << ": " << type_name(v) << " = " << value_text(v) << "\n";
  return os.str();
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

enum class Format { CSV, JSON };

struct ExperimentConfig {
  std::string experiment;
  ParamTree params;  // keys without the "params." prefix
  std::uint64_t seed = 0;
  std::string output_path;  // empty: stdout
  Format format = Format::CSV;

  // Everything that determines the data section. The output path is excluded.
  ParamTree tree() const {
    ParamTree t;
    t["experiment"] = experiment;
    t["seed"] = static_cast<std::int64_t>(seed);
    t["format"] = std::string(format == Format::CSV ? "csv" : "json");
    for (const auto& [k, v] : params) t["params." + k] = v;
    return t;
  }
  std::string serialize() const { return serialize_tree(tree()); }
  std::uint64_t hash() const { return fnv1a(serialize()); }
  std::string hash_hex() const {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
  }
};

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::CSV;
  if (s == "json") return Format::JSON;
  throw ConfigError("format", "format must be csv or json, got '" + s + "'");
}

template <class T>
const T& expect_type(const ParamTree& t, const std::string& key) {
  const auto& v = t.at(key);
  if (!std::holds_alternative<T>(v)) throw ConfigError(key, std::string("wrong type for key '") + key + "'");
  return std::get<T>(v);
}

inline ExperimentConfig config_from_tree(const ParamTree& t) {
  ExperimentConfig c;
  for (const auto& [k, v] : t) {
    if (k == "experiment") {
      c.experiment = expect_type<std::string>(t, k);
    } else if (k == "seed") {
      const auto s = expect_type<std::int64_t>(t, k);
      if (s < 0) throw ConfigError(k, "seed must be non-negative");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (k == "output") {
      c.output_path = expect_type<std::string>(t, k);
    } else if (k == "format") {
      c.format = parse_format(expect_type<std::string>(t, k));
    } else if (k.rfind("params.", 0) == 0 && k.size() > 7) {
      c.params[k.substr(7)] = v;
    } else {
      throw ConfigError(k, "unknown key '" + k + "'");
    }
  }
  return c;
}

inline ExperimentConfig parse_config(const std::string& text) { return config_from_tree(parse_tree(text)); }

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace qchaos::runner
