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
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpsec/rng.hpp"

namespace dpsec {

enum class Architecture { kLogisticRegression, kMlp1Hidden };
enum class Activation { kTanh, kRelu };

// Flat-weight binary classifier with analytic cross-entropy gradients.
//
// Logistic regression layout: [w (d), b].
// MLP layout: [W1 (h x d, row-major), b1 (h), w2 (h), b2].
struct ModelState {
  Architecture arch = Architecture::kLogisticRegression;
  Activation activation = Activation::kTanh;
  std::size_t input_dim = 0;
  std::size_t hidden = 0;  // 0 for logistic regression
  std::vector<double> weights;
  std::int64_t step = 0;

  static std::size_t weight_count(Architecture arch, std::size_t d,
                                  std::size_t h) {
    return arch == Architecture::kLogisticRegression ? d + 1
                                                     : h * d + h + h + 1;
  }

  static ModelState logistic_regression(std::size_t d) {
    ModelState m;
    m.arch = Architecture::kLogisticRegression;
    m.input_dim = d;
    m.weights.assign(weight_count(m.arch, d, 0), 0.0);
    return m;
  }

  static ModelState mlp(std::size_t d, std::size_t h, Activation act,
                        std::uint64_t seed) {
    if (h == 0) throw std::invalid_argument("ModelState::mlp: hidden width 0");
    ModelState m;
    m.arch = Architecture::kMlp1Hidden;
    m.activation = act;
    m.input_dim = d;
    m.hidden = h;
    m.weights.resize(weight_count(m.arch, d, h));
    SequentialRng rng(seed, /*stream=*/7);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (auto& w : m.weights) w = scale * rng.normal();
    // Output bias starts at zero.
    m.weights.back() = 0.0;
    return m;
  }
};

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

// Model output probability for a single example.
inline double predict_proba(const ModelState& m, std::span<const double> x) {
  if (x.size() != m.input_dim)
    throw std::invalid_argument("predict_proba: dimension mismatch");
  if (m.arch == Architecture::kLogisticRegression) {
    double z = m.weights[m.input_dim];  // bias
    for (std::size_t j = 0; j < m.input_dim; ++j) z += m.weights[j] * x[j];
    return detail::sigmoid(z);
  }
  const std::size_t d = m.input_dim, h = m.hidden;
  const double* w1 = m.weights.data();
  const double* b1 = w1 + h * d;
  const double* w2 = b1 + h;
  const double b2 = m.weights[h * d + h + h];
  double z2 = b2;
  for (std::size_t k = 0; k < h; ++k) {
    double a = b1[k];
    for (std::size_t j = 0; j < d; ++j) a += w1[k * d + j] * x[j];
    const double act = m.activation == Activation::kTanh
                           ? std::tanh(a)
                           : (a > 0.0 ? a : 0.0);
    z2 += w2[k] * act;
  }
  return detail::sigmoid(z2);
}

// Cross-entropy loss for a single example.
inline double example_loss(const ModelState& m, std::span<const double> x,
                           double y) {
  const double p = predict_proba(m, x);
  const double eps = 1e-12;
  return -(y * std::log(p + eps) + (1.0 - y) * std::log(1.0 - p + eps));
}

// Exact analytic gradient of the cross-entropy loss w.r.t. the flat weight
// vector. Throws on non-finite results.
inline std::vector<double> per_example_gradient(const ModelState& m,
                                                std::span<const double> x,
                                                double y) {
  if (x.size() != m.input_dim)
    throw std::invalid_argument("per_example_gradient: dimension mismatch");
  std::vector<double> grad(m.weights.size(), 0.0);

  if (m.arch == Architecture::kLogisticRegression) {
    const double err = predict_proba(m, x) - y;  // dL/dz
    for (std::size_t j = 0; j < m.input_dim; ++j) grad[j] = err * x[j];
    grad[m.input_dim] = err;
  } else {
    const std::size_t d = m.input_dim, h = m.hidden;
    const double* w1 = m.weights.data();
    const double* b1 = w1 + h * d;
    const double* w2 = b1 + h;
    const double b2 = m.weights[h * d + h + h];

    std::vector<double> pre(h), act(h);
    double z2 = b2;
    for (std::size_t k = 0; k < h; ++k) {
      double a = b1[k];
      for (std::size_t j = 0; j < d; ++j) a += w1[k * d + j] * x[j];
      pre[k] = a;
      act[k] = m.activation == Activation::kTanh ? std::tanh(a)
                                                 : (a > 0.0 ? a : 0.0);
      z2 += w2[k] * act[k];
    }
    const double err = detail::sigmoid(z2) - y;

    double* g_w1 = grad.data();
    double* g_b1 = g_w1 + h * d;
    double* g_w2 = g_b1 + h;
    grad[h * d + h + h] = err;  // b2
    for (std::size_t k = 0; k < h; ++k) {
      g_w2[k] = err * act[k];
      const double dact = m.activation == Activation::kTanh
                              ? 1.0 - act[k] * act[k]
                              : (pre[k] > 0.0 ? 1.0 : 0.0);
      const double delta = err * w2[k] * dact;
      g_b1[k] = delta;
      for (std::size_t j = 0; j < d; ++j) g_w1[k * d + j] = delta * x[j];
    }
  }

  for (double g : grad) {
    if (!std::isfinite(g))
      throw std::runtime_error("per_example_gradient: non-finite gradient");
  }
  return grad;
}

inline double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Norm clipping: g / max(1, ||g||/C). Direction preserved, norm <= C.
inline std::vector<double> clip(std::vector<double> g, double clip_norm) {
  if (!(clip_norm > 0.0)) throw std::invalid_argument("clip: C must be > 0");
  const double norm = l2_norm(g);
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (auto& x : g) x *= scale;
  }
  return g;
}

}  // namespace dpsec
