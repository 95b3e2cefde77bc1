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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpsec/rng.hpp"

namespace dpsec {

// Column roles and encoding choices for a tabular CSV. Parsed from a flat
// key=value file (see SchemaConfig::parse); lists are comma-separated.
struct SchemaConfig {
  std::string label_column;
  std::string sensitive_column;
  std::vector<std::string> attribute_domain;     // explicit, finite
  std::vector<std::string> categorical_columns;  // one-hot encoded

  static SchemaConfig parse_kv(const std::map<std::string, std::string>& kv) {
    SchemaConfig s;
    const auto get = [&](const std::string& key) -> std::string {
      const auto it = kv.find(key);
      if (it == kv.end())
        throw std::invalid_argument("schema config: missing key '" + key + "'");
      return it->second;
    };
    s.label_column = get("label");
    s.sensitive_column = get("sensitive");
    s.attribute_domain = split_list(get("domain"));
    if (s.attribute_domain.empty())
      throw std::invalid_argument("schema config: empty attribute domain");
    if (kv.count("categorical"))
      s.categorical_columns = split_list(kv.at("categorical"));
    return s;
  }

  static std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(text);
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  bool is_categorical(const std::string& column) const {
    return std::find(categorical_columns.begin(), categorical_columns.end(),
                     column) != categorical_columns.end();
  }
};

// Reads a flat key=value file ('#' comments, blank lines ignored).
inline std::map<std::string, std::string> read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line is not key=value: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

// An encoded tabular dataset. Features are fully numeric after one-hot
// encoding; the sensitive column occupies a contiguous block that can be
// swapped for any candidate attribute value.
struct TabularDataset {
  std::vector<std::string> feature_names;       // encoded, deterministic order
  std::vector<std::vector<double>> features;    // N x d
  std::vector<double> labels;                   // binary 0/1
  std::size_t sensitive_offset = 0;             // block within a feature row
  std::size_t sensitive_width = 0;
  std::vector<std::vector<double>> domain_encodings;  // |A| x sensitive_width
  std::vector<std::size_t> sensitive_index;     // per row, index into domain

  std::size_t size() const { return features.size(); }
  std::size_t dim() const { return feature_names.size(); }
  std::size_t domain_size() const { return domain_encodings.size(); }

  // Copy of row i with the sensitive block replaced by domain value a.
  std::vector<double> with_attribute(std::size_t i, std::size_t a) const {
    std::vector<double> row = features[i];
    for (std::size_t j = 0; j < sensitive_width; ++j)
      row[sensitive_offset + j] = domain_encodings[a][j];
    return row;
  }
};

namespace detail {

inline double parse_numeric_cell(const std::string& cell,
                                 const std::string& column) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("non-numeric cell '" + cell + "' in column '" +
                             column + "'");
  }
  if (pos != cell.size())
    throw std::runtime_error("non-numeric cell '" + cell + "' in column '" +
                             column + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace detail

// Encodes raw string rows per the schema. Column order follows the header;
// one-hot levels are sorted (sensitive column uses the configured domain
// order), so the encoding is deterministic.
inline TabularDataset encode_rows(const std::vector<std::string>& header,
                                  const std::vector<std::vector<std::string>>& rows,
                                  const SchemaConfig& schema) {
  const auto col_index = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::runtime_error("missing column: " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t label_col = col_index(schema.label_column);
  const std::size_t sensitive_col = col_index(schema.sensitive_column);
  for (const auto& c : schema.categorical_columns) col_index(c);
  if (rows.empty()) throw std::runtime_error("dataset has no rows");

  // Levels for non-sensitive categorical columns, discovered and sorted.
  std::map<std::size_t, std::vector<std::string>> levels;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col || c == sensitive_col) continue;
    if (!schema.is_categorical(header[c])) continue;
    std::set<std::string> seen;
    for (const auto& row : rows) seen.insert(row.at(c));
    levels[c] = std::vector<std::string>(seen.begin(), seen.end());
  }

  const bool sensitive_categorical = schema.is_categorical(schema.sensitive_column);
  const auto& domain = schema.attribute_domain;

  TabularDataset ds;
  // Encoded layout, in header order.
  struct ColPlan {
    std::size_t src;
    bool categorical;
    const std::vector<std::string>* level_list;  // null for numeric
  };
  std::vector<ColPlan> plan;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col) continue;
    if (c == sensitive_col) {
      ds.sensitive_offset = ds.feature_names.size();
      if (sensitive_categorical) {
        ds.sensitive_width = domain.size();
        for (const auto& v : domain)
          ds.feature_names.push_back(header[c] + "=" + v);
      } else {
        ds.sensitive_width = 1;
        ds.feature_names.push_back(header[c]);
      }
      plan.push_back({c, sensitive_categorical, &domain});
      continue;
    }
    if (schema.is_categorical(header[c])) {
      for (const auto& v : levels[c])
        ds.feature_names.push_back(header[c] + "=" + v);
      plan.push_back({c, true, &levels[c]});
    } else {
      ds.feature_names.push_back(header[c]);
      plan.push_back({c, false, nullptr});
    }
  }

  // Encodings of every domain value for the sensitive block.
  for (std::size_t a = 0; a < domain.size(); ++a) {
    std::vector<double> enc;
    if (sensitive_categorical) {
      enc.assign(domain.size(), 0.0);
      enc[a] = 1.0;
    } else {
      enc = {detail::parse_numeric_cell(domain[a], schema.sensitive_column)};
    }
    ds.domain_encodings.push_back(std::move(enc));
  }

  ds.features.reserve(rows.size());
  ds.labels.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::runtime_error("row width does not match header");
    const auto& sval = row[sensitive_col];
    const auto dit = std::find(domain.begin(), domain.end(), sval);
    if (dit == domain.end())
      throw std::runtime_error("sensitive value '" + sval +
                               "' outside the configured domain");
    ds.sensitive_index.push_back(
        static_cast<std::size_t>(dit - domain.begin()));

    std::vector<double> feat;
    feat.reserve(ds.dim());
    for (const auto& cp : plan) {
      const auto& cell = row[cp.src];
      if (cp.categorical) {
        const auto lit =
            std::find(cp.level_list->begin(), cp.level_list->end(), cell);
        if (lit == cp.level_list->end())
          throw std::runtime_error("unknown level '" + cell + "' in column '" +
                                   header[cp.src] + "'");
        for (std::size_t j = 0; j < cp.level_list->size(); ++j)
          feat.push_back(j == static_cast<std::size_t>(
                                  lit - cp.level_list->begin())
                             ? 1.0
                             : 0.0);
      } else {
        feat.push_back(detail::parse_numeric_cell(cell, header[cp.src]));
      }
    }
    ds.features.push_back(std::move(feat));
    ds.labels.push_back(detail::parse_numeric_cell(row[label_col],
                                                   schema.label_column));
  }
  return ds;
}

// Loads and encodes a CSV with a header row.
inline TabularDataset load_csv(const std::string& path,
                               const SchemaConfig& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = detail::split_csv_line(line);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(detail::split_csv_line(line));
  }
  return encode_rows(header, rows, schema);
}

// ---------------------------------------------------------------------------
// Synthetic data generators. Stand-ins for the Adult / Purchase tabular
// benchmarks: mixed categorical/numeric features with a configurable
// sensitive-attribute effect on the label.

struct SyntheticRows {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  SchemaConfig schema;

  TabularDataset encode() const { return encode_rows(header, rows, schema); }

  void write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write CSV file: " + path);
    for (std::size_t c = 0; c < header.size(); ++c)
      out << (c ? "," : "") << header[c];
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c)
        out << (c ? "," : "") << row[c];
      out << "\n";
    }
  }
};

// Adult-like: numeric features, a couple of categorical columns, and a
// numeric sensitive attribute ("age") over an explicit integer range.
// `effect_size` controls how strongly the sensitive attribute drives the
// label.
inline SyntheticRows synthetic_adult_like(std::size_t n, std::uint64_t seed,
                                          int age_min = 17, int age_max = 90,
                                          std::size_t numeric_features = 6,
                                          double effect_size = 0.5) {
  SequentialRng rng(seed, /*stream=*/101);
  SyntheticRows out;
  out.header.push_back("age");
  for (std::size_t j = 0; j < numeric_features; ++j)
    out.header.push_back("num" + std::to_string(j));
  out.header.push_back("workclass");
  out.header.push_back("education");
  out.header.push_back("income");

  const std::vector<std::string> workclass = {"gov", "private", "self"};
  const std::vector<std::string> education = {"hs", "college", "masters", "phd"};

  std::ostringstream domain;
  for (int a = age_min; a <= age_max; ++a)
    domain << (a > age_min ? "," : "") << a;
  out.schema.label_column = "income";
  out.schema.sensitive_column = "age";
  out.schema.attribute_domain = SchemaConfig::split_list(domain.str());
  out.schema.categorical_columns = {"workclass", "education"};

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> row;
    const int age = age_min + static_cast<int>(rng.uniform() *
                                               (age_max - age_min + 1));
    row.push_back(std::to_string(std::min(age, age_max)));
    double score = effect_size * (age - 0.5 * (age_min + age_max)) /
                   (age_max - age_min);
    for (std::size_t j = 0; j < numeric_features; ++j) {
      const double v = rng.normal();
      score += (j % 2 == 0 ? 0.4 : -0.3) * v;
      std::ostringstream cell;
      cell.precision(6);
      cell << v;
      row.push_back(cell.str());
    }
    const std::size_t wc = static_cast<std::size_t>(rng.uniform() * 3.0);
    const std::size_t ed = static_cast<std::size_t>(rng.uniform() * 4.0);
    row.push_back(workclass[std::min<std::size_t>(wc, 2)]);
    row.push_back(education[std::min<std::size_t>(ed, 3)]);
    score += 0.2 * static_cast<double>(ed);
    const double prob = 1.0 / (1.0 + std::exp(-score));
    row.push_back(rng.uniform() < prob ? "1" : "0");
    out.rows.push_back(std::move(row));
  }
  return out;
}

// Purchase-like: binary features; the first feature is the sensitive one.
inline SyntheticRows synthetic_purchase_like(std::size_t n, std::size_t d,
                                             std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("synthetic_purchase_like: d >= 2");
  SequentialRng rng(seed, /*stream=*/202);
  SyntheticRows out;
  for (std::size_t j = 0; j < d; ++j)
    out.header.push_back("item" + std::to_string(j));
  out.header.push_back("label");
  out.schema.label_column = "label";
  out.schema.sensitive_column = "item0";
  out.schema.attribute_domain = {"0", "1"};

  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> row;
    double score = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const bool bought = rng.uniform() < 0.3;
      score += bought ? (j % 3 == 0 ? 0.5 : -0.2) : 0.0;
      row.push_back(bought ? "1" : "0");
    }
    const double prob = 1.0 / (1.0 + std::exp(-score));
    row.push_back(rng.uniform() < prob ? "1" : "0");
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace dpsec
