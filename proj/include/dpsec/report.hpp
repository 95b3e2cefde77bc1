// Copyright 2026 The dpsec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace dpsec {

inline constexpr const char* kToolVersion = "0.1.0";

// The machine-readable wrapper every CLI command emits with --json. Numeric
// results carry their mode (nominal/conservative/empirical) inside `results`;
// stochastic results carry a CI there too.
struct ReportEnvelope {
  std::string command;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json results = nlohmann::json::object();
  double timing_seconds = 0.0;
  std::string tool_version = kToolVersion;
  std::optional<std::uint64_t> seed;

  nlohmann::json to_json() const {
    nlohmann::json j{{"command", command},
                     {"inputs", inputs},
                     {"results", results},
                     {"timing_seconds", timing_seconds},
                     {"tool_version", tool_version}};
    if (seed) j["seed"] = *seed;
    return j;
  }

  static ReportEnvelope from_json(const nlohmann::json& j) {
    ReportEnvelope e;
    e.command = j.at("command").get<std::string>();
    e.inputs = j.at("inputs");
    e.results = j.at("results");
    e.timing_seconds = j.at("timing_seconds").get<double>();
    e.tool_version = j.at("tool_version").get<std::string>();
    if (j.contains("seed")) e.seed = j.at("seed").get<std::uint64_t>();
    return e;
  }
};

// Minimal CSV emitter for plot-ready artifacts: quoting is unnecessary
// because all emitted fields are numbers or bare identifiers.
struct CsvWriter {
  std::ostringstream out;

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      out << (i ? "," : "") << cells[i];
    out << "\n";
  }

  std::string str() const { return out.str(); }

  void write_file(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write CSV file: " + path);
    f << out.str();
  }
};

inline std::string format_double(double v) {
  std::ostringstream ss;
  ss.precision(12);
  ss << v;
  return ss.str();
}

// FNV-1a content hash, used for trace provenance in reports.
inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream ss;
  ss << std::hex << h;
  return ss.str();
}

// Parses a sensitivity trace CSV: either one R_t per line or (t, R_t[, mode])
// rows, with an optional header. Returns the R_t column in file order.
inline std::vector<double> parse_trace_csv(std::istream& in) {
  std::vector<double> values;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.empty()) continue;
    const std::string& field = cells.size() >= 2 ? cells[1] : cells[0];
    std::size_t pos = 0;
    double v = 0.0;
    bool numeric = true;
    try {
      v = std::stod(field, &pos);
    } catch (const std::exception&) {
      numeric = false;
    }
    if (!numeric || pos != field.size()) {
      if (first) {  // header row
        first = false;
        continue;
      }
      throw std::runtime_error("malformed trace row: " + line);
    }
    first = false;
    values.push_back(v);
  }
  if (values.empty()) throw std::runtime_error("trace CSV has no values");
  return values;
}

inline std::vector<double> parse_trace_csv_file(const std::string& path,
                                                std::string* content_hash) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  if (content_hash) *content_hash = fnv1a_hex(buf.str());
  return parse_trace_csv(buf);
}

// Parses a comma-separated list of doubles (grid flags).
inline std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t pos = 0;
    const double v = std::stod(item, &pos);
    if (pos != item.size())
      throw std::invalid_argument("bad list element: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty numeric list");
  return out;
}

}  // namespace dpsec
