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
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpsec/bounds.hpp"
#include "dpsec/config.hpp"
#include "dpsec/dataset.hpp"
#include "dpsec/model.hpp"
#include "dpsec/rng.hpp"

namespace dpsec {

enum class AnalysisMode { kNone, kMia, kAiFull, kAiApprox };

enum class SensitivityMode { kFull, kApproximate };

// Per-step data-dependent AI sensitivities R_1..R_T, each in [0, 2C].
struct SensitivityTrace {
  std::vector<double> values;
  SensitivityMode mode = SensitivityMode::kFull;
  std::vector<std::size_t> per_step_batch_sizes;
};

struct TrainerOptions {
  double clip_norm = 1.0;
  double noise_multiplier = 1.0;
  std::int64_t expected_batch = 0;  // L
  std::int64_t epochs = 1;
  double learning_rate = 0.1;      // constant schedule
  Architecture arch = Architecture::kLogisticRegression;
  Activation activation = Activation::kTanh;
  std::size_t hidden = 16;
};

struct EpochRecord {
  std::int64_t epoch = 0;
  std::int64_t cumulative_steps = 0;
  double loss = 0.0;
  double accuracy = 0.0;
  double mia_beta = 1.0;
  std::optional<double> ai_beta_full;
  std::optional<double> ai_beta_approx;
  double wall_time_seconds = 0.0;      // training this epoch
  double analysis_time_seconds = 0.0;  // bound computation this epoch
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  AnalysisMode analysis = AnalysisMode::kNone;
  bool diverged = false;
  // AI bounds are data-dependent; publishing them can itself leak membership
  // when MIA is also a concern, so the report carries the caveat.
  bool ai_bounds_are_data_dependent = true;
  std::string data_dependence_caveat =
      "data-dependent AI bounds may leak record membership if published";
  double sampling_rate = 0.0;
  std::int64_t steps_per_epoch = 0;
};

// One DP-SGD update. The batch is given as row indices; the update uses the
// literal 1/L scaling (not 1/|batch|), and an empty batch still applies a
// noise-only step. Noise draws come from `rng` in coordinate order.
inline void dp_sgd_step(ModelState& m, const std::vector<std::size_t>& batch,
                        const TabularDataset& ds, const TrainerOptions& opt,
                        SequentialRng& rng) {
  std::vector<double> sum(m.weights.size(), 0.0);
  for (std::size_t i : batch) {
    const std::vector<double> g =
        clip(per_example_gradient(m, ds.features[i], ds.labels[i]),
             opt.clip_norm);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += g[j];
  }
  const double noise_std = opt.noise_multiplier * opt.clip_norm;
  const double inv_l = 1.0 / static_cast<double>(opt.expected_batch);
  for (std::size_t j = 0; j < sum.size(); ++j) {
    const double noisy = (sum[j] + noise_std * rng.normal()) * inv_l;
    m.weights[j] -= opt.learning_rate * noisy;
  }
  ++m.step;
}

// Full AI sensitivity at the current step: max over batch records and all
// attribute-value pairs of the clipped-gradient distance. O(|batch||A|)
// gradients plus O(|batch||A|^2) distances.
inline double r_t_full(const ModelState& m,
                       const std::vector<std::size_t>& batch,
                       const TabularDataset& ds, double clip_norm) {
  if (batch.empty() || ds.domain_size() < 2) return 0.0;
  double best = 0.0;
  const std::size_t na = ds.domain_size();
  std::vector<std::vector<double>> grads(na);
  for (std::size_t i : batch) {
    for (std::size_t a = 0; a < na; ++a) {
      const std::vector<double> row = ds.with_attribute(i, a);
      grads[a] = clip(per_example_gradient(m, row, ds.labels[i]), clip_norm);
    }
    for (std::size_t a = 0; a + 1 < na; ++a) {
      for (std::size_t b = a + 1; b < na; ++b) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < grads[a].size(); ++j) {
          const double d = grads[a][j] - grads[b][j];
          d2 += d * d;
        }
        best = std::max(best, d2);
      }
    }
  }
  return std::min(std::sqrt(best), 2.0 * clip_norm);
}

// Point-set-diameter estimate: per record, twice the max distance from any
// candidate gradient to their mean. O(|batch||A|) gradients and distances.
// Sandwich guarantee: r_t_full <= r_t_approx <= 2 * r_t_full.
inline double r_t_approx(const ModelState& m,
                         const std::vector<std::size_t>& batch,
                         const TabularDataset& ds, double clip_norm) {
  if (batch.empty() || ds.domain_size() < 2) return 0.0;
  double best = 0.0;
  const std::size_t na = ds.domain_size();
  std::vector<std::vector<double>> grads(na);
  std::vector<double> mean(m.weights.size());
  for (std::size_t i : batch) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t a = 0; a < na; ++a) {
      const std::vector<double> row = ds.with_attribute(i, a);
      grads[a] = clip(per_example_gradient(m, row, ds.labels[i]), clip_norm);
      for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += grads[a][j];
    }
    for (auto& v : mean) v /= static_cast<double>(na);
    double max_d2 = 0.0;
    for (std::size_t a = 0; a < na; ++a) {
      double d2 = 0.0;
      for (std::size_t j = 0; j < mean.size(); ++j) {
        const double d = grads[a][j] - mean[j];
        d2 += d * d;
      }
      max_d2 = std::max(max_d2, d2);
    }
    best = std::max(best, 2.0 * std::sqrt(max_d2));
  }
  return std::min(best, 2.0 * clip_norm);
}

namespace detail {

inline std::pair<double, double> dataset_metrics(const ModelState& m,
                                                 const TabularDataset& ds) {
  double loss = 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const double p = predict_proba(m, ds.features[i]);
    const double eps = 1e-12;
    const double y = ds.labels[i];
    loss += -(y * std::log(p + eps) + (1.0 - y) * std::log(1.0 - p + eps));
    if ((p >= 0.5) == (y >= 0.5)) ++correct;
  }
  return {loss / static_cast<double>(ds.size()),
          static_cast<double>(correct) / static_cast<double>(ds.size())};
}

}  // namespace detail

// Runs DP-SGD with Poisson subsampling for epochs * ceil(1/p) steps,
// recording per-epoch bounds. AI bounds use the trace so far with
// T = steps-so-far. Deterministic given (seed, options, data).
inline std::pair<TrainReport, SensitivityTrace> train(
    const TabularDataset& ds, const TrainerOptions& opt, AnalysisMode analysis,
    std::uint64_t seed) {
  if (ds.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (opt.expected_batch < 1 ||
      opt.expected_batch > static_cast<std::int64_t>(ds.size()))
    throw std::invalid_argument("train: expected batch L must be in [1, N]");
  if (opt.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (!(opt.clip_norm > 0.0 && opt.noise_multiplier > 0.0))
    throw std::invalid_argument("train: clip norm and noise must be > 0");

  const double p = static_cast<double>(opt.expected_batch) /
                   static_cast<double>(ds.size());
  const auto steps_per_epoch =
      static_cast<std::int64_t>(std::ceil(1.0 / p - 1e-12));

  ModelState model =
      opt.arch == Architecture::kLogisticRegression
          ? ModelState::logistic_regression(ds.dim())
          : ModelState::mlp(ds.dim(), opt.hidden, opt.activation, seed);
  SequentialRng sample_rng(seed, /*stream=*/1);
  SequentialRng noise_rng(seed, /*stream=*/2);

  TrainReport report;
  report.analysis = analysis;
  report.sampling_rate = p;
  report.steps_per_epoch = steps_per_epoch;
  SensitivityTrace trace;
  trace.mode = analysis == AnalysisMode::kAiApprox ? SensitivityMode::kApproximate
                                                   : SensitivityMode::kFull;

  using Clock = std::chrono::steady_clock;
  std::int64_t steps = 0;
  for (std::int64_t epoch = 1; epoch <= opt.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    double analysis_seconds = 0.0;
    for (std::int64_t s = 0; s < steps_per_epoch; ++s) {
      std::vector<std::size_t> batch;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        if (sample_rng.bernoulli(p)) batch.push_back(i);
      }
      if (analysis == AnalysisMode::kAiFull ||
          analysis == AnalysisMode::kAiApprox) {
        const auto t0 = Clock::now();
        const double r = analysis == AnalysisMode::kAiFull
                             ? r_t_full(model, batch, ds, opt.clip_norm)
                             : r_t_approx(model, batch, ds, opt.clip_norm);
        analysis_seconds +=
            std::chrono::duration<double>(Clock::now() - t0).count();
        trace.values.push_back(std::clamp(r, 0.0, 2.0 * opt.clip_norm));
        trace.per_step_batch_sizes.push_back(batch.size());
      }
      dp_sgd_step(model, batch, ds, opt, noise_rng);
      ++steps;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.cumulative_steps = steps;
    const auto [loss, acc] = detail::dataset_metrics(model, ds);
    rec.loss = loss;
    rec.accuracy = acc;
    if (!std::isfinite(loss)) {
      report.diverged = true;
      report.epochs.push_back(rec);
      break;
    }

    if (analysis != AnalysisMode::kNone) {
      const auto t0 = Clock::now();
      const DpSgdConfig cfg =
          DpSgdConfig::from_rate(p, opt.noise_multiplier, opt.clip_norm, steps);
      rec.mia_beta = mia_bound(cfg).nominal;
      if (analysis == AnalysisMode::kAiFull)
        rec.ai_beta_full = ai_bound(cfg, trace.values).nominal;
      if (analysis == AnalysisMode::kAiApprox)
        rec.ai_beta_approx = ai_bound(cfg, trace.values).nominal;
      analysis_seconds +=
          std::chrono::duration<double>(Clock::now() - t0).count();
    }
    rec.analysis_time_seconds = analysis_seconds;
    rec.wall_time_seconds =
        std::chrono::duration<double>(Clock::now() - epoch_start).count();
    report.epochs.push_back(rec);
  }
  return {std::move(report), std::move(trace)};
}

}  // namespace dpsec
