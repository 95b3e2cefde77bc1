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
#include <cstdint>
#include <optional>
#include <stdexcept>

namespace dpsec {

// The DP-SGD hyperparameters every bound consumes. The sampling rate can be
// given directly or derived as L/N.
struct DpSgdConfig {
  double sampling_rate = 0.0;   // p in [0, 1]
  double noise_multiplier = 1.0;  // sigma > 0
  double clip_norm = 1.0;         // C > 0
  std::int64_t steps = 1;         // T >= 1
  std::optional<std::int64_t> dataset_size;    // N
  std::optional<std::int64_t> expected_batch;  // L

  void validate() const {
    if (!(sampling_rate >= 0.0 && sampling_rate <= 1.0))
      throw std::invalid_argument("DpSgdConfig: sampling rate must be in [0,1]");
    if (!(noise_multiplier > 0.0))
      throw std::invalid_argument("DpSgdConfig: noise multiplier must be > 0");
    if (!(clip_norm > 0.0))
      throw std::invalid_argument("DpSgdConfig: clip norm must be > 0");
    if (steps < 1)
      throw std::invalid_argument("DpSgdConfig: steps must be >= 1");
    if (dataset_size && expected_batch) {
      const double implied = static_cast<double>(*expected_batch) /
                             static_cast<double>(*dataset_size);
      if (std::fabs(sampling_rate - implied) > 1e-12)
        throw std::invalid_argument("DpSgdConfig: sampling rate inconsistent with L/N");
    }
  }

  static DpSgdConfig from_rate(double p, double sigma, double clip,
                               std::int64_t t) {
    DpSgdConfig cfg;
    cfg.sampling_rate = p;
    cfg.noise_multiplier = sigma;
    cfg.clip_norm = clip;
    cfg.steps = t;
    cfg.validate();
    return cfg;
  }

  static DpSgdConfig from_batch(std::int64_t n, std::int64_t l, double sigma,
                                double clip, std::int64_t t) {
    if (n < 1 || l < 1)
      throw std::invalid_argument("DpSgdConfig: N and L must be positive");
    DpSgdConfig cfg;
    cfg.sampling_rate = static_cast<double>(l) / static_cast<double>(n);
    cfg.noise_multiplier = sigma;
    cfg.clip_norm = clip;
    cfg.steps = t;
    cfg.dataset_size = n;
    cfg.expected_batch = l;
    cfg.validate();
    return cfg;
  }
};

}  // namespace dpsec
