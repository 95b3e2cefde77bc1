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
#include <stdexcept>
#include <vector>

#include "dpsec/mixture.hpp"
#include "dpsec/rng.hpp"

namespace dpsec {

// A membership game on the gradient channel: one mixture per secret value.
struct GameConfig {
  MixtureSpec channel0;
  MixtureSpec channel1;
  double prior = 0.5;         // Pr[S = 1]
  std::int64_t trials = 100000;
  std::uint64_t seed = 0;

  void validate() const {
    channel0.validate();
    channel1.validate();
    if (channel0.steps() != channel1.steps())
      throw std::invalid_argument("GameConfig: channels must share T");
    if (channel0.noise_std != channel1.noise_std)
      throw std::invalid_argument("GameConfig: channels must share noise");
    if (!(prior > 0.0 && prior < 1.0))
      throw std::invalid_argument("GameConfig: prior must be in (0,1)");
    if (trials < 1000)
      throw std::invalid_argument("GameConfig: need >= 1000 trials");
  }
};

struct GameResult {
  double success_rate = 0.0;
  double advantage = 0.0;   // vs the best prior-only guesser
  double tpr = 0.0;
  double fpr = 0.0;
  double ci_half_width = 0.0;  // Wilson 95% on the success rate
};

namespace detail {

inline double wilson_half_width(double rate, double n) {
  constexpr double z = 1.959963984540054;
  const double denom = 1.0 + z * z / n;
  const double half =
      z * std::sqrt(rate * (1.0 - rate) / n + z * z / (4.0 * n * n)) / denom;
  return half;
}

// One trial's observation trace and log-likelihood ratio log f1(x) - log f0(x).
// Randomness is a pure function of (seed, trial index).
struct TrialSampler {
  const GameConfig& g;
  CounterRng rng;
  std::uint64_t stride;

  explicit TrialSampler(const GameConfig& cfg)
      : g(cfg), rng(cfg.seed), stride(3 * cfg.channel0.steps() + 1) {}

  // Returns {secret, log-likelihood ratio}.
  std::pair<int, double> run(std::int64_t i, std::vector<double>& x) const {
    const std::uint64_t base = static_cast<std::uint64_t>(i) * stride;
    const int secret = rng.bernoulli(base, g.prior) ? 1 : 0;
    const MixtureSpec& ch = secret == 1 ? g.channel1 : g.channel0;
    for (std::size_t t = 0; t < ch.steps(); ++t) {
      const bool sampled = rng.bernoulli(base + 1 + 3 * t, ch.p);
      const double u1 = rng.uniform(base + 1 + 3 * t + 1);
      const double u2 = rng.uniform(base + 1 + 3 * t + 2);
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
      x[t] = (sampled ? ch.step_means[t] : 0.0) + ch.noise_std * z;
    }
    return {secret, g.channel1.log_density(x) - g.channel0.log_density(x)};
  }
};

}  // namespace detail

// Bayes-optimal attacker: guess 1 iff the posterior favors secret 1, i.e.
// the log-likelihood ratio exceeds the log prior odds of secret 0.
inline GameResult run_mia_game(const GameConfig& g) {
  g.validate();
  const detail::TrialSampler sampler(g);
  const double log_prior_odds = std::log((1.0 - g.prior) / g.prior);

  std::int64_t correct = 0;
  std::int64_t positives = 0, negatives = 0, tp = 0, fp = 0;
  std::vector<double> x(g.channel0.steps());
  for (std::int64_t i = 0; i < g.trials; ++i) {
    const auto [secret, llr] = sampler.run(i, x);
    const int guess = llr > log_prior_odds ? 1 : 0;
    if (guess == secret) ++correct;
    if (secret == 1) {
      ++positives;
      if (guess == 1) ++tp;
    } else {
      ++negatives;
      if (guess == 1) ++fp;
    }
  }

  const double n = static_cast<double>(g.trials);
  GameResult r;
  r.success_rate = static_cast<double>(correct) / n;
  const double prior_success = std::max(g.prior, 1.0 - g.prior);
  r.advantage = (r.success_rate - prior_success) / (1.0 - prior_success);
  r.tpr = positives > 0
              ? static_cast<double>(tp) / static_cast<double>(positives)
              : 0.0;
  r.fpr = negatives > 0
              ? static_cast<double>(fp) / static_cast<double>(negatives)
              : 0.0;
  r.ci_half_width = detail::wilson_half_width(r.success_rate, n);
  return r;
}

struct RocPoint {
  double threshold = 0.0;  // on the log-likelihood ratio
  double fpr = 0.0;
  double tpr = 0.0;
  double fpr_half_width = 0.0;
  double tpr_half_width = 0.0;
};

// ROC of the likelihood-ratio-threshold attacker family, one point per
// threshold. Trials are shared across thresholds (same seed as the game).
inline std::vector<RocPoint> roc_sweep(const GameConfig& g,
                                       const std::vector<double>& thresholds) {
  g.validate();
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw std::invalid_argument("roc_sweep: thresholds must be sorted");
  const detail::TrialSampler sampler(g);

  std::vector<std::int64_t> tp(thresholds.size(), 0), fp(thresholds.size(), 0);
  std::int64_t positives = 0, negatives = 0;
  std::vector<double> x(g.channel0.steps());
  for (std::int64_t i = 0; i < g.trials; ++i) {
    const auto [secret, llr] = sampler.run(i, x);
    if (secret == 1) ++positives; else ++negatives;
    // llr > threshold => guess positive; thresholds sorted, so find cutoff.
    const auto first_above = std::upper_bound(thresholds.begin(),
                                              thresholds.end(), llr) -
                             thresholds.begin();
    for (std::size_t j = 0; j < static_cast<std::size_t>(first_above); ++j) {
      if (secret == 1) ++tp[j]; else ++fp[j];
    }
  }

  std::vector<RocPoint> roc(thresholds.size());
  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    roc[j].threshold = thresholds[j];
    roc[j].tpr = positives > 0 ? static_cast<double>(tp[j]) / positives : 0.0;
    roc[j].fpr = negatives > 0 ? static_cast<double>(fp[j]) / negatives : 0.0;
    roc[j].tpr_half_width =
        detail::wilson_half_width(roc[j].tpr, static_cast<double>(positives));
    roc[j].fpr_half_width =
        detail::wilson_half_width(roc[j].fpr, static_cast<double>(negatives));
  }
  return roc;
}

}  // namespace dpsec
