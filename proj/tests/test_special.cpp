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
#include <cmath>
#include <random>

#include "dpsec/special.hpp"

namespace {

// Frozen 30-digit reference values (arbitrary-precision oracle).
constexpr double kErf05 = 0.520499877813046537682746653892;
constexpr double kErf1 = 0.842700792949714869341220635083;
constexpr double kErf2 = 0.995322265018952734162069256367;
constexpr double kErf35 = 0.999999256901627658587254476316;
constexpr double kErfc5 = 1.53745979442803485018834348538e-12;
constexpr double kErfc10 = 2.08848758376254475700078629496e-45;
constexpr double kErfInv002 = 0.0177263950266780184821951129293;

}  // namespace

TEST_CASE("erf matches the high-precision oracle", "[special]") {
  CHECK(dpsec::erf_hp(0.0) == 0.0);
  CHECK_THAT(dpsec::erf_hp(0.5), Catch::Matchers::WithinAbs(kErf05, 1e-14));
  CHECK_THAT(dpsec::erf_hp(1.0), Catch::Matchers::WithinAbs(kErf1, 1e-14));
  CHECK_THAT(dpsec::erf_hp(2.0), Catch::Matchers::WithinAbs(kErf2, 1e-14));
  CHECK_THAT(dpsec::erf_hp(3.5), Catch::Matchers::WithinAbs(kErf35, 1e-14));
  CHECK(dpsec::erf_hp(30.0) == 1.0);
}

TEST_CASE("erfc stays accurate in the tail", "[special]") {
  CHECK_THAT(dpsec::erfc_hp(5.0) / kErfc5,
             Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(dpsec::erfc_hp(10.0) / kErfc10,
             Catch::Matchers::WithinAbs(1.0, 1e-12));
  CHECK_THAT(dpsec::erfc_hp(-1.0), Catch::Matchers::WithinAbs(1.0 + kErf1, 1e-14));
}

TEST_CASE("erf is odd and bounded", "[special]") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> dist(-6.0, 6.0);
  for (int i = 0; i < 200; ++i) {
    const double x = dist(gen);
    CHECK(dpsec::erf_hp(x) == -dpsec::erf_hp(-x));
    CHECK(std::fabs(dpsec::erf_hp(x)) <= 1.0);
  }
  // Agreement with libm across the range.
  for (int i = 0; i < 200; ++i) {
    const double x = dist(gen);
    CHECK_THAT(dpsec::erf_hp(x), Catch::Matchers::WithinAbs(std::erf(x), 1e-13));
  }
}

TEST_CASE("erf_inv round-trips through erf", "[special]") {
  CHECK(dpsec::erf_inv(0.0) == 0.0);
  CHECK_THAT(dpsec::erf_inv(0.02),
             Catch::Matchers::WithinAbs(kErfInv002, 1e-13));
  CHECK_THAT(dpsec::erf_inv(dpsec::erf_hp(1.3)),
             Catch::Matchers::WithinAbs(1.3, 1e-10));

  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(-0.999999, 0.999999);
  for (int i = 0; i < 500; ++i) {
    const double y = dist(gen);
    CHECK_THAT(dpsec::erf_hp(dpsec::erf_inv(y)),
               Catch::Matchers::WithinAbs(y, 1e-10));
  }
}

TEST_CASE("erf_inv rejects out-of-domain arguments", "[special]") {
  CHECK_THROWS_AS(dpsec::erf_inv(1.0), std::domain_error);
  CHECK_THROWS_AS(dpsec::erf_inv(-1.0), std::domain_error);
  CHECK_THROWS_AS(dpsec::erf_inv(2.0), std::domain_error);
}

TEST_CASE("normal_cdf basic identities", "[special]") {
  CHECK_THAT(dpsec::normal_cdf(0.0), Catch::Matchers::WithinAbs(0.5, 1e-15));
  CHECK_THAT(dpsec::normal_cdf(1.0) + dpsec::normal_cdf(-1.0),
             Catch::Matchers::WithinAbs(1.0, 1e-14));
  CHECK(dpsec::normal_cdf(-40.0) >= 0.0);
  CHECK(dpsec::normal_cdf(40.0) == 1.0);
}
