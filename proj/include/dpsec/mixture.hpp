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

#include "dpsec/rng.hpp"
#include "dpsec/special.hpp"

namespace dpsec {

// The per-step gradient channel: at step t the observation is
// N(mean_t, noise_std^2) with probability p (challenge point sampled) and
// N(0, noise_std^2) otherwise. The joint distribution over T steps is the
// 2^T-component mixture, but it factorizes across steps, so densities cost
// O(T) per point instead of O(2^T).
struct MixtureSpec {
  double p = 0.0;
  double noise_std = 1.0;              // sigma * C
  std::vector<double> step_means;      // base mean per step, |mean| <= C

  std::size_t steps() const { return step_means.size(); }

  void validate() const {
    if (step_means.empty())
      throw std::invalid_argument("MixtureSpec: needs at least one step");
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("MixtureSpec: p must be in [0,1]");
    if (!(noise_std > 0.0))
      throw std::invalid_argument("MixtureSpec: noise std must be > 0");
  }

  // Log density of one step's marginal at x.
  double step_log_density(std::size_t t, double x) const {
    const double s = noise_std;
    const double l0 = normal_log_pdf(x / s) - std::log(s);
    if (p == 0.0) return l0;
    const double l1 = normal_log_pdf((x - step_means[t]) / s) - std::log(s);
    if (p == 1.0) return l1;
    const double a = std::log1p(-p) + l0;
    const double b = std::log(p) + l1;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
  }

  double log_density(const std::vector<double>& x) const {
    double sum = 0.0;
    for (std::size_t t = 0; t < steps(); ++t) sum += step_log_density(t, x[t]);
    return sum;
  }
};

enum class TvMethod { kQuadrature, kMonteCarlo, kClosedForm };

struct TvEstimate {
  double value = 0.0;         // in [0, 1]
  double half_width = 0.0;    // 95% CI (MC) or quadrature error bound
  TvMethod method = TvMethod::kClosedForm;
  std::int64_t samples_or_nodes = 0;

  double clamped_low() const { return std::max(0.0, value - half_width); }
  double clamped_high() const { return std::min(1.0, value + half_width); }
};

// Exact TV between two isotropic Gaussians with equal scale:
// erf(||mu0 - mu1|| / (2 sqrt(2) sigma)).
inline double tv_two_gaussians(const std::vector<double>& mu0,
                               const std::vector<double>& mu1, double sigma) {
  if (mu0.size() != mu1.size())
    throw std::invalid_argument("tv_two_gaussians: dimension mismatch");
  if (!(sigma > 0.0))
    throw std::invalid_argument("tv_two_gaussians: sigma must be > 0");
  double d2 = 0.0;
  for (std::size_t i = 0; i < mu0.size(); ++i) {
    const double d = mu0[i] - mu1[i];
    d2 += d * d;
  }
  return erf_hp(std::sqrt(d2) / (2.0 * M_SQRT2 * sigma));
}

namespace detail {

template <typename F>
struct AdaptiveSimpson {
  const F& f;
  double abs_err = 0.0;
  std::int64_t evals = 0;

  double eval(double x) {
    ++evals;
    return f(x);
  }

  double run(double a, double b, double fa, double fm, double fb, double whole,
             double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = eval(lm);
    const double frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) {
      abs_err += std::fabs(delta) / 15.0;
      return left + right + delta / 15.0;
    }
    return run(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           run(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }

  double integrate(double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = eval(a);
    const double fm = eval(m);
    const double fb = eval(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return run(a, b, fa, fm, fb, whole, tol, 48);
  }
};

}  // namespace detail

// TV between the one-step mixture (1-p) N(0, (sigma C)^2) + p N(mu, (sigma C)^2)
// and its Gaussian approximation N(p mu, (sigma C)^2), by adaptive quadrature
// of half the absolute density difference.
inline TvEstimate tv_mixture_vs_gaussian_1d(double p, double sigma,
                                            double mu = 1.0,
                                            double clip = 1.0,
                                            double tol = 1e-12) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("tv_mixture_vs_gaussian_1d: p must be in [0,1]");
  if (!(sigma > 0.0) || !(clip > 0.0))
    throw std::invalid_argument("tv_mixture_vs_gaussian_1d: sigma and clip must be > 0");

  TvEstimate est;
  est.method = TvMethod::kQuadrature;
  if (p == 0.0 || p == 1.0 || mu == 0.0) return est;  // mixture is a Gaussian

  const double s = sigma * clip;
  const auto signed_diff = [&](double x) {
    const double fm = (1.0 - p) * std::exp(normal_log_pdf(x / s)) / s +
                      p * std::exp(normal_log_pdf((x - mu) / s)) / s;
    const double fg = std::exp(normal_log_pdf((x - p * mu) / s)) / s;
    return 0.5 * (fm - fg);
  };
  const auto diff = [&](double x) { return std::fabs(signed_diff(x)); };

  // Extend the window until the combined tail mass drops below 1e-12.
  double lo = std::min(0.0, mu) - 12.0 * s;
  double hi = std::max(0.0, mu) + 12.0 * s;
  const auto tail_mass = [&](double l, double h) {
    const double lo_tail = normal_cdf((l - std::min({0.0, mu, p * mu})) / s);
    const double hi_tail = normal_cdf((std::max({0.0, mu, p * mu}) - h) / s);
    return 2.0 * (lo_tail + hi_tail);  // both densities' tails
  };
  while (tail_mass(lo, hi) > 1e-12) {
    lo -= 4.0 * s;
    hi += 4.0 * s;
  }

  // The integrand |f_m - f_g| has kinks at the sign changes of f_m - f_g,
  // which would stall the quadrature's convergence. Locate them by scan and
  // bisection, then integrate each smooth piece separately.
  std::vector<double> cuts = {lo};
  const int scan = 4096;
  double x_prev = lo;
  double v_prev = signed_diff(lo);
  for (int i = 1; i <= scan; ++i) {
    const double x = lo + (hi - lo) * i / scan;
    const double v = signed_diff(x);
    if ((v_prev < 0.0) != (v < 0.0)) {
      double a = x_prev, b = x;
      for (int it = 0; it < 100 && b - a > 1e-15 * (1.0 + std::fabs(a)); ++it) {
        const double m = 0.5 * (a + b);
        ((signed_diff(m) < 0.0) == (v_prev < 0.0) ? a : b) = m;
      }
      cuts.push_back(0.5 * (a + b));
    }
    x_prev = x;
    v_prev = v;
  }
  cuts.push_back(hi);

  double total = 0.0;
  double err = 0.0;
  std::int64_t evals = scan + 1;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    detail::AdaptiveSimpson<decltype(diff)> quad{diff};
    total += quad.integrate(cuts[i], cuts[i + 1],
                            tol / static_cast<double>(cuts.size() - 1));
    err += quad.abs_err;
    evals += quad.evals;
  }
  est.value = std::clamp(total, 0.0, 1.0);
  est.half_width = err + tail_mass(lo, hi);
  est.samples_or_nodes = evals;
  return est;
}

// Unbiased Monte Carlo estimate of tv(A, B) = E_{x~A}[(1 - f_B(x)/f_A(x))^+].
// Bit-identical for a given (seed, n_samples) regardless of how the work is
// partitioned: sample i's randomness is a pure function of (seed, i).
inline TvEstimate tv_channel_monte_carlo(const MixtureSpec& a,
                                         const MixtureSpec& b,
                                         std::int64_t n_samples,
                                         std::uint64_t seed) {
  a.validate();
  b.validate();
  if (a.steps() != b.steps())
    throw std::invalid_argument("tv_channel_monte_carlo: step-count mismatch");
  if (a.noise_std != b.noise_std)
    throw std::invalid_argument("tv_channel_monte_carlo: noise mismatch");
  if (n_samples < 10000)
    throw std::invalid_argument("tv_channel_monte_carlo: need >= 1e4 samples");

  const std::size_t t_steps = a.steps();
  const CounterRng rng(seed);
  const std::uint64_t stride = 3 * t_steps;

  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<double> x(t_steps);
  for (std::int64_t i = 0; i < n_samples; ++i) {
    const std::uint64_t base = static_cast<std::uint64_t>(i) * stride;
    for (std::size_t t = 0; t < t_steps; ++t) {
      const bool sampled = rng.bernoulli(base + 3 * t, a.p);
      const double u1 = rng.uniform(base + 3 * t + 1);
      const double u2 = rng.uniform(base + 3 * t + 2);
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
      x[t] = (sampled ? a.step_means[t] : 0.0) + a.noise_std * z;
    }
    const double log_ratio = b.log_density(x) - a.log_density(x);
    if (std::isnan(log_ratio))
      throw std::runtime_error("tv_channel_monte_carlo: NaN density ratio");
    const double c = std::max(0.0, 1.0 - std::exp(log_ratio));
    sum += c;
    sum_sq += c * c;
  }

  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean);
  TvEstimate est;
  est.method = TvMethod::kMonteCarlo;
  est.value = mean;
  est.half_width = 1.959963984540054 * std::sqrt(var / n);
  est.samples_or_nodes = n_samples;
  return est;
}

// Closed-form KL upper bound between the T-step mixture and its Gaussian
// approximation: p (1-p) T / (2 sigma^2).
inline double kl_mixture_upper_bound(double p, double sigma, std::int64_t t) {
  if (!(p >= 0.0 && p <= 1.0) || !(sigma > 0.0) || t < 1)
    throw std::invalid_argument("kl_mixture_upper_bound: invalid arguments");
  return p * (1.0 - p) * static_cast<double>(t) / (2.0 * sigma * sigma);
}

// The canonical adversarial pair for MIA ground truth: means +C and -C along
// one axis at every step (gradient distance 2C).
inline std::pair<MixtureSpec, MixtureSpec> worst_case_pair(double p,
                                                           double sigma,
                                                           double clip,
                                                           std::size_t steps) {
  MixtureSpec pos{p, sigma * clip, std::vector<double>(steps, clip)};
  MixtureSpec neg{p, sigma * clip, std::vector<double>(steps, -clip)};
  return {pos, neg};
}

}  // namespace dpsec
