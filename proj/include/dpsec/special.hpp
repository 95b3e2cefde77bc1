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

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpsec {

namespace detail {

inline constexpr double kTwoOverSqrtPi = 1.1283791670955125738961589031;
inline constexpr double kSqrtPiOverTwo = 0.8862269254527580136490837416;

// Maclaurin series, accurate for small arguments where the alternating
// terms do not cancel badly.
inline double erf_series(double x) {
  const double x2 = x * x;
  double term = x;
  double sum = x;
  for (int k = 1; k < 200; ++k) {
    term *= -x2 / k;
    const double contrib = term / (2 * k + 1);
    sum += contrib;
    if (std::fabs(contrib) < 1e-18 * std::fabs(sum)) break;
  }
  return kTwoOverSqrtPi * sum;
}

// Continued fraction for erfc(x), x > 0 (Lentz's algorithm).
// sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + (2/2)/(x + (3/2)/(x + ...))))
inline double erfc_cf(double x) {
  const double tiny = 1e-300;
  double f = x;
  if (f == 0.0) f = tiny;
  double c = f;
  double d = 0.0;
  for (int n = 1; n < 300; ++n) {
    const double a = 0.5 * n;
    d = x + a * d;
    if (d == 0.0) d = tiny;
    c = x + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0) < 1e-17) break;
  }
  return std::exp(-x * x) / std::sqrt(M_PI) / f;
}

}  // namespace detail

// Complementary error function. Relative accuracy ~1e-14 over the whole
// range, absolute accuracy far below 1e-12.
inline double erfc_hp(double x) {
  if (std::isnan(x)) return x;
  const double ax = std::fabs(x);
  double r;
  if (ax < 2.0) {
    r = 1.0 - detail::erf_series(ax);
  } else if (ax < 27.0) {
    r = detail::erfc_cf(ax);
  } else {
    r = 0.0;
  }
  return x >= 0.0 ? r : 2.0 - r;
}

// Error function, |error| <= 1e-12 (in practice ~1e-15). Odd, total.
inline double erf_hp(double x) {
  if (std::isnan(x)) return x;
  const double ax = std::fabs(x);
  double r;
  if (ax < 2.0) {
    r = detail::erf_series(ax);
  } else {
    r = 1.0 - erfc_hp(ax);
  }
  return x >= 0.0 ? r : -r;
}

// Inverse error function on (-1, 1): initial rational approximation
// refined by Newton iterations on erf_hp. Round-trips within 1e-10.
inline double erf_inv(double y) {
  if (!(std::fabs(y) < 1.0)) {
    throw std::domain_error("erf_inv: argument must be in (-1, 1)");
  }
  if (y == 0.0) return 0.0;

  // Winitzki's approximation as the starting point.
  constexpr double a = 0.147;
  const double ln1 = std::log1p(-y * y);
  const double t = 2.0 / (M_PI * a) + 0.5 * ln1;
  double x = std::sqrt(std::sqrt(t * t - ln1 / a) - t);
  if (y < 0.0) x = -x;

  for (int i = 0; i < 6; ++i) {
    const double err = erf_hp(x) - y;
    if (err == 0.0) break;
    const double step = err * detail::kSqrtPiOverTwo * std::exp(x * x);
    x -= step;
    if (std::fabs(step) < 1e-16 * (std::fabs(x) + 1e-300)) break;
  }
  return x;
}

// Standard normal CDF via erfc to keep the tails accurate.
inline double normal_cdf(double x) { return 0.5 * erfc_hp(-x * M_SQRT1_2); }

// Standard normal log-density.
inline double normal_log_pdf(double x) {
  return -0.5 * x * x - 0.9189385332046727417803297364;  // log(sqrt(2*pi))
}

}  // namespace dpsec
