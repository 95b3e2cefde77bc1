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

namespace dpsec {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based stream: every draw is a pure function of (seed, index),
// so work partitioned across any number of workers produces bit-identical
// results for a given (seed, n).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(detail::splitmix64(seed ^ (stream * 0xd1342543de82ef95ULL))) {}

  std::uint64_t bits(std::uint64_t index) const {
    return detail::splitmix64(key_ ^ detail::splitmix64(index));
  }

  // Uniform in (0, 1); never returns 0 or 1.
  double uniform(std::uint64_t index) const {
    return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; two sub-draws per index.
  double normal(std::uint64_t index) const {
    const double u1 = uniform(index * 2 + 1);
    const double u2 = uniform(index * 2 + 2);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  bool bernoulli(std::uint64_t index, double p) const {
    return uniform(index) < p;
  }

 private:
  std::uint64_t key_;
};

// Sequential convenience wrapper over the same generator, for single-threaded
// consumers (e.g. the training loop).
class SequentialRng {
 public:
  explicit SequentialRng(std::uint64_t seed, std::uint64_t stream = 0)
      : rng_(seed, stream) {}

  double uniform() { return rng_.uniform(next_++); }
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  CounterRng rng_;
  std::uint64_t next_ = 0;
};

}  // namespace dpsec
