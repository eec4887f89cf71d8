#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace qchaos::runner {

using Cell = std::variant<std::int64_t, double, std::string>;

// Long-form result table.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> r) {
    if (r.size() != columns.size()) throw DimensionError("ResultTable: row width does not match header");
    rows.push_back(std::move(r));
  }
  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw DomainError("ResultTable: no column '" + name + "'");
  }
};

struct Metadata {
  std::string version;
  std::string experiment;
  std::string config_hash;
  std::uint64_t seed = 0;
  double wall_time_s = 0.0;
  int workers = 1;
  std::string config;  // canonical serialization
};

inline std::string csv_cell(const Cell& c) {
  switch (c.index()) {
    case 0: return std::to_string(std::get<std::int64_t>(c));
    case 1: {
      const double x = std::get<double>(c);
      return std::isfinite(x) ? format_double(x) : (std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf"));
    }
    default: {
      const std::string& s = std::get<std::string>(c);
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      return q + "\"";
    }
  }
}

inline std::string csv_data(const ResultTable& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_cell(r[i]);
    os << "\n";
  }
  return os.str();
}

inline std::string csv_metadata(const Metadata& m) {
  std::ostringstream os;
  os << "# qchaos " << m.version << "\n"
     << "# experiment: " << m.experiment << "\n"
     << "# config_hash: " << m.config_hash << "\n"
     << "# seed: " << m.seed << "\n"
     << "# workers: " << m.workers << "\n"
     << "# wall_time_s: " << format_double(m.wall_time_s) << "\n";
  std::istringstream cfg(m.config);
  for (std::string line; std::getline(cfg, line);) os << "# config " << line << "\n";
  return os.str();
}

inline nlohmann::json json_data(const ResultTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json row = nlohmann::json::array();
    for (const auto& c : r) {
      if (c.index() == 0) row.push_back(std::get<std::int64_t>(c));
      else if (c.index() == 1) {
        const double x = std::get<double>(c);
        if (std::isfinite(x)) row.push_back(x);
        else row.push_back(nullptr);
      } else row.push_back(std::get<std::string>(c));
    }
    rows.push_back(std::move(row));
  }
  return {{"columns", t.columns}, {"rows", rows}};
}

inline std::string render(const ResultTable& t, const Metadata& m, Format f) {
  if (f == Format::CSV) return csv_metadata(m) + csv_data(t);
  nlohmann::json j;
  j["meta"] = {{"version", m.version},         {"experiment", m.experiment}, {"config_hash", m.config_hash},
               {"seed", m.seed},               {"workers", m.workers},       {"wall_time_s", m.wall_time_s},
               {"config", m.config}};
  j["data"] = json_data(t);
  return j.dump(1) + "\n";
}

// Data section of rendered output: non-'#' lines for CSV, the "data" member for JSON.
inline std::string data_section(const std::string& rendered) {
  const auto first = rendered.find_first_not_of(" \n");
  if (first != std::string::npos && rendered[first] == '{') return nlohmann::json::parse(rendered).at("data").dump();
  std::istringstream in(rendered);
  std::string out;
  for (std::string line; std::getline(in, line);)
    if (line.empty() || line[0] != '#') out += line + "\n";
  return out;
}

// Recovers the canonical config text from '# config ' lines or the JSON meta member.
inline std::string embedded_config(const std::string& rendered) {
  const auto first = rendered.find_first_not_of(" \n");
  if (first != std::string::npos && rendered[first] == '{')
    return nlohmann::json::parse(rendered).at("meta").at("config").get<std::string>();
  std::istringstream in(rendered);
  std::string out;
  const std::string tag = "# config ";
  for (std::string line; std::getline(in, line);)
    if (line.rfind(tag, 0) == 0) out += line.substr(tag.size()) + "\n";
  return out;
}

}  // namespace qchaos::runner
