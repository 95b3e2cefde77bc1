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

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "dpsec/dataset.hpp"

using dpsec::SchemaConfig;
using dpsec::TabularDataset;

namespace {

SchemaConfig demo_schema() {
  std::map<std::string, std::string> kv = {
      {"label", "y"},
      {"sensitive", "color"},
      {"domain", "red,green,blue"},
      {"categorical", "color,city"},
  };
  return SchemaConfig::parse_kv(kv);
}

const std::vector<std::string> kHeader = {"age", "color", "city", "y"};
const std::vector<std::vector<std::string>> kRows = {
    {"34", "red", "paris", "1"},
    {"20", "blue", "oslo", "0"},
    {"51", "green", "paris", "1"},
};

}  // namespace

TEST_CASE("schema parses and validates key=value input", "[dataset]") {
  const auto s = demo_schema();
  CHECK(s.label_column == "y");
  CHECK(s.sensitive_column == "color");
  REQUIRE(s.attribute_domain.size() == 3);
  CHECK(s.is_categorical("city"));
  CHECK_FALSE(s.is_categorical("age"));

  std::map<std::string, std::string> missing = {{"label", "y"}};
  CHECK_THROWS_AS(SchemaConfig::parse_kv(missing), std::invalid_argument);
  std::map<std::string, std::string> empty_domain = {
      {"label", "y"}, {"sensitive", "color"}, {"domain", ""}};
  CHECK_THROWS_AS(SchemaConfig::parse_kv(empty_domain), std::invalid_argument);
}

TEST_CASE("encoding is deterministic with sorted one-hot levels", "[dataset]") {
  const auto ds = dpsec::encode_rows(kHeader, kRows, demo_schema());
  REQUIRE(ds.size() == 3);
  // age (1) + color one-hot in domain order (3) + city sorted levels (2).
  const std::vector<std::string> expected_names = {
      "age", "color=red", "color=green", "color=blue", "city=oslo",
      "city=paris"};
  CHECK(ds.feature_names == expected_names);
  CHECK(ds.sensitive_offset == 1);
  CHECK(ds.sensitive_width == 3);
  CHECK(ds.domain_size() == 3);

  // Row 0: age 34, red, paris, label 1.
  const std::vector<double> row0 = {34.0, 1.0, 0.0, 0.0, 0.0, 1.0};
  CHECK(ds.features[0] == row0);
  CHECK(ds.labels[0] == 1.0);
  CHECK(ds.sensitive_index[0] == 0);
  CHECK(ds.sensitive_index[1] == 2);  // blue
  CHECK(ds.sensitive_index[2] == 1);  // green
}

TEST_CASE("with_attribute swaps only the sensitive block", "[dataset]") {
  const auto ds = dpsec::encode_rows(kHeader, kRows, demo_schema());
  const auto swapped = ds.with_attribute(0, 2);  // red -> blue
  const std::vector<double> expected = {34.0, 0.0, 0.0, 1.0, 0.0, 1.0};
  CHECK(swapped == expected);
  // Identity swap returns the original row.
  CHECK(ds.with_attribute(1, ds.sensitive_index[1]) == ds.features[1]);
}

TEST_CASE("encoding rejects malformed input", "[dataset]") {
  const auto schema = demo_schema();
  auto bad_domain = kRows;
  bad_domain[0][1] = "purple";
  CHECK_THROWS_AS(dpsec::encode_rows(kHeader, bad_domain, schema),
                  std::runtime_error);

  auto bad_numeric = kRows;
  bad_numeric[1][0] = "twenty";
  CHECK_THROWS_AS(dpsec::encode_rows(kHeader, bad_numeric, schema),
                  std::runtime_error);

  auto bad_width = kRows;
  bad_width[2].pop_back();
  CHECK_THROWS_AS(dpsec::encode_rows(kHeader, bad_width, schema),
                  std::runtime_error);

  const std::vector<std::string> wrong_header = {"age", "colour", "city", "y"};
  CHECK_THROWS_AS(dpsec::encode_rows(wrong_header, kRows, schema),
                  std::runtime_error);
  CHECK_THROWS_AS(dpsec::encode_rows(kHeader, {}, schema), std::runtime_error);
}

TEST_CASE("CSV and config round-trip through files", "[dataset]") {
  const std::string csv_path = "test_dataset_tmp.csv";
  const std::string cfg_path = "test_dataset_tmp.cfg";
  {
    std::ofstream csv(csv_path);
    csv << "age,color,city,y\n34,red,paris,1\n20,blue,oslo,0\n";
    std::ofstream cfg(cfg_path);
    cfg << "# demo schema\nlabel=y\nsensitive=color\ndomain=red,green,blue\n"
        << "categorical=color,city\n";
  }
  const auto schema = SchemaConfig::parse_kv(dpsec::read_kv_file(cfg_path));
  const auto ds = dpsec::load_csv(csv_path, schema);
  CHECK(ds.size() == 2);
  CHECK(ds.dim() == 6);
  std::remove(csv_path.c_str());
  std::remove(cfg_path.c_str());

  CHECK_THROWS_AS(dpsec::load_csv("no_such_file.csv", schema),
                  std::runtime_error);
}

TEST_CASE("numeric sensitive column has width one", "[dataset]") {
  std::map<std::string, std::string> kv = {
      {"label", "y"}, {"sensitive", "age"}, {"domain", "20,34,51"}};
  const auto schema = SchemaConfig::parse_kv(kv);
  const std::vector<std::string> header = {"age", "x", "y"};
  const std::vector<std::vector<std::string>> rows = {
      {"34", "0.5", "1"}, {"20", "-1.5", "0"}};
  const auto ds = dpsec::encode_rows(header, rows, schema);
  CHECK(ds.sensitive_width == 1);
  CHECK(ds.domain_encodings[0] == std::vector<double>{20.0});
  const auto swapped = ds.with_attribute(0, 2);
  CHECK(swapped[0] == 51.0);
  CHECK(swapped[1] == 0.5);
}

TEST_CASE("synthetic generators are reproducible and encodable", "[dataset]") {
  const auto a = dpsec::synthetic_adult_like(200, 5);
  const auto b = dpsec::synthetic_adult_like(200, 5);
  const auto c = dpsec::synthetic_adult_like(200, 6);
  CHECK(a.rows == b.rows);
  CHECK(a.rows != c.rows);

  const auto ds = a.encode();
  CHECK(ds.size() == 200);
  CHECK(ds.domain_size() == 90 - 17 + 1);
  CHECK(ds.sensitive_width == 1);
  // Labels are binary and both classes appear.
  bool has0 = false, has1 = false;
  for (double y : ds.labels) {
    CHECK((y == 0.0 || y == 1.0));
    if (y == 0.0) has0 = true;
    if (y == 1.0) has1 = true;
  }
  CHECK(has0);
  CHECK(has1);

  const auto pds = dpsec::synthetic_purchase_like(100, 8, 3).encode();
  CHECK(pds.size() == 100);
  CHECK(pds.domain_size() == 2);
}
