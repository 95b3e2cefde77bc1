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
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dpsec/config.hpp"
#include "dpsec/special.hpp"

namespace dpsec {

enum class Threat { kMia, kAi, kPropertyInference };

// A Bayes-security result. `nominal` is the 1 - erf(.) term; the analytic
// approximation error is reported separately so callers can pick the nominal,
// conservative, or empirical reading.
struct SecurityBound {
  double nominal = 1.0;               // in [0, 1]
  double analytic_error = 0.0;        // >= 0
  std::optional<double> empirical_error;
  std::optional<double> empirical_half_width;
  Threat threat = Threat::kPropertyInference;
  double delta_f = 0.0;
  bool delta_f_clamped = false;

  double conservative() const {
    return std::max(0.0, nominal - analytic_error);
  }
};

struct TprQuery {
  double fpr = 0.0;    // in [0, 1]
  double prior = 0.5;  // pi in (0, 1)

  void validate() const {
    if (!(fpr >= 0.0 && fpr <= 1.0))
      throw std::invalid_argument("TprQuery: fpr must be in [0,1]");
    if (!(prior > 0.0 && prior < 1.0))
      throw std::invalid_argument("TprQuery: prior must be in (0,1)");
  }
};

// Explicit constant for the mixture-vs-Gaussian approximation error: two
// Pinsker terms of sqrt(p(1-p)T / (2 sigma^2)) / sqrt(2) each, i.e.
// sqrt(p(1-p)T) / sigma in total.
inline double analytic_approx_error(const DpSgdConfig& cfg) {
  cfg.validate();
  const double p = cfg.sampling_rate;
  const double t = static_cast<double>(cfg.steps);
  return std::sqrt(p * (1.0 - p) * t) / cfg.noise_multiplier;
}

// Bayes security against record-level property inference with gradient
// discrepancy delta_f. Values above the clipping-implied maximum 2*C*sqrt(T)
// are clamped (and flagged).
inline SecurityBound property_bound(const DpSgdConfig& cfg, double delta_f) {
  cfg.validate();
  if (!(delta_f >= 0.0))
    throw std::invalid_argument("property_bound: delta_f must be >= 0");
  SecurityBound b;
  b.threat = Threat::kPropertyInference;
  const double max_delta =
      2.0 * cfg.clip_norm * std::sqrt(static_cast<double>(cfg.steps));
  if (delta_f > max_delta) {
    delta_f = max_delta;
    b.delta_f_clamped = true;
  }
  b.delta_f = delta_f;
  b.nominal = 1.0 - erf_hp(cfg.sampling_rate * delta_f /
                           (2.0 * M_SQRT2 * cfg.noise_multiplier * cfg.clip_norm));
  b.analytic_error = analytic_approx_error(cfg);
  return b;
}

// MIA bound: property_bound at the worst-case delta_f = 2*C*sqrt(T), which
// simplifies to 1 - erf(p sqrt(T) / (sqrt(2) sigma)).
inline SecurityBound mia_bound(const DpSgdConfig& cfg) {
  SecurityBound b = property_bound(
      cfg, 2.0 * cfg.clip_norm * std::sqrt(static_cast<double>(cfg.steps)));
  b.threat = Threat::kMia;
  b.delta_f_clamped = false;
  return b;
}

// AI bound from a per-step sensitivity trace R_1..R_T.
inline SecurityBound ai_bound(const DpSgdConfig& cfg,
                              std::span<const double> trace) {
  cfg.validate();
  if (static_cast<std::int64_t>(trace.size()) != cfg.steps)
    throw std::invalid_argument("ai_bound: trace length must equal steps");
  double sum_sq = 0.0;
  for (double r : trace) {
    if (!(r >= 0.0 && r <= 2.0 * cfg.clip_norm + 1e-12))
      throw std::invalid_argument("ai_bound: R_t out of [0, 2C]");
    sum_sq += r * r;
  }
  SecurityBound b = property_bound(cfg, std::sqrt(sum_sq));
  b.threat = Threat::kAi;
  return b;
}

// Inverts the MIA bound for p given a target security level. Clamped to
// [0, 1]; `clamped` reports whether the formula exceeded 1.
inline double select_sampling_rate(double beta_target, double sigma,
                                   std::int64_t steps,
                                   bool* clamped = nullptr) {
  if (!(beta_target > 0.0 && beta_target < 1.0))
    throw std::invalid_argument("select_sampling_rate: beta target must be in (0,1)");
  if (!(sigma > 0.0) || steps < 1)
    throw std::invalid_argument("select_sampling_rate: invalid sigma or steps");
  double p = erf_inv(1.0 - beta_target) * M_SQRT2 /
             std::sqrt(static_cast<double>(steps)) * sigma;
  if (clamped) *clamped = p > 1.0;
  return std::clamp(p, 0.0, 1.0);
}

// Solves the same relation for sigma given p.
inline double select_noise_multiplier(double beta_target, double p,
                                      std::int64_t steps) {
  if (!(beta_target > 0.0 && beta_target < 1.0))
    throw std::invalid_argument("select_noise_multiplier: beta target must be in (0,1)");
  if (!(p > 0.0 && p <= 1.0) || steps < 1)
    throw std::invalid_argument("select_noise_multiplier: invalid p or steps");
  return p * std::sqrt(static_cast<double>(steps)) /
         (erf_inv(1.0 - beta_target) * M_SQRT2);
}

// TPR@FPR bound from a security level beta. Tight at pi = 1/2.
inline double tpr_bound(double beta, const TprQuery& q) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("tpr_bound: beta must be in [0,1]");
  q.validate();
  double bound = 1.0 + q.fpr - beta;
  if (q.prior > 0.5) bound *= q.prior / (1.0 - q.prior);
  return std::clamp(bound, 0.0, 1.0);
}

// Advantage bound implied by an (eps, delta)-DP guarantee.
inline double advantage_from_dp(double eps, double delta) {
  if (!(eps >= 0.0))
    throw std::invalid_argument("advantage_from_dp: eps must be >= 0");
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("advantage_from_dp: delta must be in [0,1)");
  return std::clamp((std::exp(eps) - 1.0 + 2.0 * delta) / (std::exp(eps) + 1.0),
                    0.0, 1.0);
}

// Lower bound on eps from a security level: eps >= log(-(2 delta + beta - 2) / beta).
// Returns 0 when the argument of the log is <= 1 (no meaningful bound).
inline double eps_lower_bound(double beta, double delta) {
  if (!(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("eps_lower_bound: beta must be in (0,1]");
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("eps_lower_bound: delta must be in [0,1)");
  const double arg = (2.0 - 2.0 * delta - beta) / beta;
  if (arg <= 1.0) return 0.0;
  return std::log(arg);
}

}  // namespace dpsec
