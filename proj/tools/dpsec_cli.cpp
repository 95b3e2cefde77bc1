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
//
// dpsec: closed-form Bayes-security bounds for DP-SGD, numerical oracles to
// validate them, and an instrumented desk-scale trainer.
//
// Exit codes: 0 success, 2 usage error, 3 numerical-regime warning escalated
// under --strict.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpsec/attack.hpp"
#include "dpsec/bounds.hpp"
#include "dpsec/config.hpp"
#include "dpsec/dataset.hpp"
#include "dpsec/mixture.hpp"
#include "dpsec/pld.hpp"
#include "dpsec/report.hpp"
#include "dpsec/trainer.hpp"

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

struct CommonFlags {
  bool json_out = false;
  bool strict = false;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_flag("--json", flags->json_out, "emit a JSON report envelope");
  cmd->add_flag("--strict", flags->strict,
                "escalate numerical-regime warnings to exit code 3");
  cmd->add_option("--out", flags->out_dir, "directory for CSV artifacts");
}

// Tracks out-of-regime warnings; under --strict they turn into exit code 3.
struct RegimeWatch {
  bool warned = false;

  void check_sigma(double sigma) {
    if (sigma < 1.0) {
      warned = true;
      std::cerr << "warning: sigma = " << sigma
                << " < 1 is outside the validated regime; the closed-form "
                   "bound degrades quickly here\n";
    }
  }

  void note(const std::string& message) {
    warned = true;
    std::cerr << "warning: " << message << "\n";
  }

  int exit_code(const CommonFlags& flags) const {
    return flags.strict && warned ? 3 : 0;
  }
};

void emit(const dpsec::ReportEnvelope& env, const CommonFlags& flags,
          const std::string& text) {
  if (flags.json_out) {
    std::cout << env.to_json().dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

std::string artifact_path(const CommonFlags& flags, const std::string& name) {
  if (flags.out_dir.empty()) return name;
  return flags.out_dir + "/" + name;
}

json bound_to_json(const dpsec::SecurityBound& b) {
  json j{{"nominal", b.nominal},
         {"analytic_error", b.analytic_error},
         {"conservative", b.conservative()},
         {"delta_f", b.delta_f},
         {"delta_f_clamped", b.delta_f_clamped},
         {"mode", "nominal"}};
  if (b.empirical_error) {
    j["empirical_error"] = *b.empirical_error;
    j["empirical_half_width"] = *b.empirical_half_width;
  }
  return j;
}

// Shared p/N/L/sigma/clip/steps plumbing for the bound commands.
struct ConfigFlags {
  double p = -1.0;
  std::int64_t n = 0, l = 0;
  double sigma = 1.0;
  double clip = 1.0;
  std::int64_t steps = 1;

  void add(CLI::App* cmd, bool with_steps = true) {
    cmd->add_option("--p", p, "sampling rate (or give --N and --L)");
    cmd->add_option("--N", n, "dataset size");
    cmd->add_option("--L", l, "expected batch size");
    cmd->add_option("--sigma", sigma, "noise multiplier")->required();
    cmd->add_option("--clip", clip, "clipping norm C");
    if (with_steps)
      cmd->add_option("--steps", steps, "number of DP-SGD steps T")->required();
  }

  dpsec::DpSgdConfig build() const {
    if (p >= 0.0 && n == 0 && l == 0)
      return dpsec::DpSgdConfig::from_rate(p, sigma, clip, steps);
    if (p < 0.0 && n > 0 && l > 0)
      return dpsec::DpSgdConfig::from_batch(n, l, sigma, clip, steps);
    if (p >= 0.0 && n > 0 && l > 0) {
      auto cfg = dpsec::DpSgdConfig::from_batch(n, l, sigma, clip, steps);
      cfg.sampling_rate = p;
      cfg.validate();  // rejects p inconsistent with L/N
      return cfg;
    }
    throw std::invalid_argument("give --p, or both --N and --L");
  }

  json echo() const {
    json j{{"sigma", sigma}, {"clip", clip}, {"steps", steps}};
    if (p >= 0.0) j["p"] = p;
    if (n > 0) j["N"] = n;
    if (l > 0) j["L"] = l;
    return j;
  }
};

std::string describe_bound(const dpsec::SecurityBound& b) {
  std::ostringstream out;
  out.precision(10);
  out << "beta (nominal)       = " << b.nominal << "\n"
      << "analytic error       = " << b.analytic_error << "\n"
      << "beta (conservative)  = " << b.conservative() << "\n"
      << "delta_f              = " << b.delta_f
      << (b.delta_f_clamped ? "  (clamped to 2*C*sqrt(T))" : "") << "\n";
  if (b.empirical_error) {
    out << "beta (empirical)     = " << 1.0 - *b.empirical_error << " +/- "
        << *b.empirical_half_width << "\n";
  }
  return out.str();
}

int cmd_bound_mia(const ConfigFlags& cf, const CommonFlags& flags,
                  const std::string& mode, std::int64_t samples,
                  std::optional<std::uint64_t> seed) {
  const auto t0 = Clock::now();
  RegimeWatch watch;
  watch.check_sigma(cf.sigma);

  const dpsec::DpSgdConfig cfg = cf.build();
  dpsec::SecurityBound b = dpsec::mia_bound(cfg);
  if (mode == "empirical") {
    if (!seed)
      throw std::invalid_argument("--mode empirical requires --seed");
    const auto [pos, neg] = dpsec::worst_case_pair(
        cfg.sampling_rate, cfg.noise_multiplier, cfg.clip_norm, cfg.steps);
    const auto tv = dpsec::tv_channel_monte_carlo(pos, neg, samples, *seed);
    b.empirical_error = tv.value;
    b.empirical_half_width = tv.half_width;
  } else if (mode != "nominal" && mode != "conservative") {
    throw std::invalid_argument("--mode must be nominal|conservative|empirical");
  }

  dpsec::ReportEnvelope env;
  env.command = "bound-mia";
  env.inputs = cf.echo();
  env.inputs["mode"] = mode;
  env.results = {{"beta", bound_to_json(b)}};
  env.results["beta"]["mode"] = mode;
  env.timing_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  env.seed = seed;
  emit(env, flags, describe_bound(b));
  return watch.exit_code(flags);
}

int cmd_bound_ai(const ConfigFlags& cf_in, const CommonFlags& flags,
                 const std::string& trace_path) {
  const auto t0 = Clock::now();
  RegimeWatch watch;
  watch.check_sigma(cf_in.sigma);

  std::string hash;
  const std::vector<double> trace =
      dpsec::parse_trace_csv_file(trace_path, &hash);
  ConfigFlags cf = cf_in;
  cf.steps = static_cast<std::int64_t>(trace.size());
  const dpsec::DpSgdConfig cfg = cf.build();
  const dpsec::SecurityBound b = dpsec::ai_bound(cfg, trace);

  dpsec::ReportEnvelope env;
  env.command = "bound-ai";
  env.inputs = cf.echo();
  env.inputs["trace"] = trace_path;
  env.inputs["trace_hash"] = hash;
  env.results = {{"beta", bound_to_json(b)},
                 {"caveat",
                  "data-dependent AI bounds may leak record membership if "
                  "published"}};
  env.timing_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  std::ostringstream text;
  text << describe_bound(b) << "trace hash           = " << hash << "\n";
  emit(env, flags, text.str());
  return watch.exit_code(flags);
}

int cmd_select_params(const CommonFlags& flags, double beta, double sigma,
                      double p, std::int64_t steps, std::int64_t n,
                      const std::string& sigma_grid) {
  const auto t0 = Clock::now();
  RegimeWatch watch;

  dpsec::ReportEnvelope env;
  env.command = "select-params";
  env.inputs = {{"beta", beta}, {"steps", steps}};
  std::ostringstream text;
  text.precision(10);

  if (!sigma_grid.empty()) {
    dpsec::CsvWriter csv;
    csv.row({"sigma", "sampling_rate", "clamped"});
    json rows = json::array();
    for (double s : dpsec::parse_double_list(sigma_grid)) {
      bool clamped = false;
      const double rate = dpsec::select_sampling_rate(beta, s, steps, &clamped);
      csv.row({dpsec::format_double(s), dpsec::format_double(rate),
               clamped ? "1" : "0"});
      rows.push_back({{"sigma", s}, {"p", rate}, {"clamped", clamped}});
    }
    const std::string path = artifact_path(flags, "select_sweep.csv");
    csv.write_file(path);
    env.inputs["sigma_grid"] = sigma_grid;
    env.results = {{"sweep", rows}, {"csv", path}};
    text << "wrote " << path << "\n";
  } else if (sigma > 0.0) {
    watch.check_sigma(sigma);
    bool clamped = false;
    const double rate = dpsec::select_sampling_rate(beta, sigma, steps, &clamped);
    if (clamped) watch.note("target beta unreachable: sampling rate clamped to 1");
    if (n > 0 && rate < 1.0 / static_cast<double>(n))
      watch.note("selected sampling rate is below 1/N; expected batch < 1 record");
    env.inputs["sigma"] = sigma;
    env.results = {{"sampling_rate",
                    {{"value", rate}, {"clamped", clamped}, {"mode", "nominal"}}}};
    text << "sampling rate p = " << rate << (clamped ? "  (clamped)" : "")
         << "\n";
  } else if (p > 0.0) {
    const double s = dpsec::select_noise_multiplier(beta, p, steps);
    watch.check_sigma(s);
    env.inputs["p"] = p;
    env.results = {{"noise_multiplier", {{"value", s}, {"mode", "nominal"}}}};
    text << "noise multiplier sigma = " << s << "\n";
  } else {
    throw std::invalid_argument("give --sigma, --p, or --sigma-grid");
  }

  env.timing_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  emit(env, flags, text.str());
  return watch.exit_code(flags);
}

int cmd_tpr(const CommonFlags& flags, double beta, double fpr, double prior) {
  const auto t0 = Clock::now();
  const double bound = dpsec::tpr_bound(beta, {fpr, prior});
  dpsec::ReportEnvelope env;
  env.command = "tpr";
  env.inputs = {{"beta", beta}, {"fpr", fpr}, {"prior", prior}};
  env.results = {{"tpr_bound", {{"value", bound}, {"mode", "nominal"}}}};
  env.timing_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  std::ostringstream text;
  text.precision(10);
  text << "TPR at FPR " << fpr << " <= " << bound << "\n";
  emit(env, flags, text.str());
  return 0;
}

int cmd_dp_convert(const CommonFlags& flags, double eps, double beta,
                   double delta) {
  const auto t0 = Clock::now();
  dpsec::ReportEnvelope env;
  env.command = "dp-convert";
  std::ostringstream text;
  text.precision(10);
  if (eps >= 0.0 && beta < 0.0) {
    const double adv = dpsec::advantage_from_dp(eps, delta);
    env.inputs = {{"eps", eps}, {"delta", delta}};
    env.results = {{"advantage", {{"value", adv}, {"mode", "nominal"}}},
                   {"beta", {{"value", 1.0 - adv}, {"mode", "nominal"}}}};
    text << "advantage <= " << adv << "\nbeta >= " << 1.0 - adv << "\n";
  } else if (beta >= 0.0 && eps < 0.0) {
    const double e = dpsec::eps_lower_bound(beta, delta);
    env.inputs = {{"beta", beta}, {"delta", delta}};
    env.results = {{"eps_lower_bound", {{"value", e}, {"mode", "nominal"}}}};
    text << "eps >= " << e << "\n";
  } else {
    throw std::invalid_argument("give exactly one of --eps or --beta");
  }
  env.timing_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  emit(env, flags, text.str());
  return 0;
}

json tv_to_json(const dpsec::TvEstimate& est, const char* mode) {
  return {{"value", est.value},
          {"half_width", est.half_width},
          {"mode", mode},
          {"samples_or_nodes", est.samples_or_nodes}};
}

int cmd_oracle(const CommonFlags& flags, const std::string& kind, double p,
               double sigma, double mu, double clip, std::int64_t steps,
               std::int64_t samples, std::optional<std::uint64_t> seed,
               double h, double loss_cap, const std::string& eps_list,
               bool sweep) {
  const auto t0 = Clock::now();
  RegimeWatch watch;

  dpsec::ReportEnvelope env;
  env.command = "oracle";
  env.inputs = {{"kind", kind}};
  std::ostringstream text;
  text.precision(10);

  if (kind == "tv1d") {
    if (sweep) {
      // Canonical ratio sweep at fixed p: sigma = p / ratio.
      const double fixed_p = 0.01;
      dpsec::CsvWriter csv;
      csv.row({"ratio", "p", "sigma", "value", "half_width"});
      json rows = json::array();
      for (int i = 0; i <= 24; ++i) {
        const double ratio = std::pow(10.0, -4.0 + 3.0 * i / 24.0);
        const double s = fixed_p / ratio;
        const auto est = dpsec::tv_mixture_vs_gaussian_1d(fixed_p, s, mu, clip);
        csv.row({dpsec::format_double(ratio), dpsec::format_double(fixed_p),
                 dpsec::format_double(s), dpsec::format_double(est.value),
                 dpsec::format_double(est.half_width)});
        rows.push_back({{"ratio", ratio}, {"value", est.value}});
      }
      const std::string path = artifact_path(flags, "tv1d_sweep.csv");
      csv.write_file(path);
      env.results = {{"sweep", rows}, {"csv", path}};
      text << "wrote " << path << "\n";
    } else {
      const auto est = dpsec::tv_mixture_vs_gaussian_1d(p, sigma, mu, clip);
      env.inputs.update({{"p", p}, {"sigma", sigma}, {"mu", mu}, {"clip", clip}});
      env.results = {{"tv", tv_to_json(est, "empirical")}};
      text << "tv = " << est.value << " (error bound " << est.half_width
           << ")\n";
    }
  } else if (kind == "mc") {
    if (!seed) throw std::invalid_argument("oracle mc requires --seed");
    const auto [pos, neg] = dpsec::worst_case_pair(p, sigma, clip, steps);
    const auto est = dpsec::tv_channel_monte_carlo(pos, neg, samples, *seed);
    env.inputs.update({{"p", p},
                       {"sigma", sigma},
                       {"clip", clip},
                       {"steps", steps},
                       {"samples", samples}});
    env.seed = seed;
    env.results = {{"tv", tv_to_json(est, "empirical")},
                   {"beta",
                    {{"value", 1.0 - est.value},
                     {"half_width", est.half_width},
                     {"mode", "empirical"}}}};
    text << "tv = " << est.value << " +/- " << est.half_width
         << "\nbeta = " << 1.0 - est.value << "\n";
  } else if (kind == "pld") {
    watch.check_sigma(sigma);
    const auto step = dpsec::pld_single_step(p, sigma, h, loss_cap);
    const auto composed = dpsec::compose(step, steps, loss_cap);
    const double beta = 1.0 - dpsec::delta_at_eps(composed, 0.0);
    env.inputs.update({{"p", p},
                       {"sigma", sigma},
                       {"steps", steps},
                       {"h", h},
                       {"loss_cap", loss_cap}});
    json pairs = json::array();
    text << "beta = " << beta << "\n";
    for (double eps : dpsec::parse_double_list(eps_list)) {
      const double d = dpsec::delta_at_eps(composed, eps);
      pairs.push_back({{"eps", eps}, {"delta", d}});
      text << "delta(" << eps << ") = " << d << "\n";
    }
    env.results = {{"beta", {{"value", beta}, {"mode", "empirical"}}},
                   {"delta", pairs}};
  } else {
    throw std::invalid_argument("--kind must be tv1d|mc|pld");
  }

  env.timing_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  emit(env, flags, text.str());
  return watch.exit_code(flags);
}

int cmd_compare(const CommonFlags& flags, double p,
                const std::string& sigma_grid, const std::string& epoch_grid,
                double h, double loss_cap) {
  const auto t0 = Clock::now();
  RegimeWatch watch;

  const auto sigmas = dpsec::parse_double_list(sigma_grid);
  const auto epochs_list = dpsec::parse_double_list(epoch_grid);
  const auto steps_per_epoch = static_cast<std::int64_t>(std::ceil(1.0 / p));

  dpsec::CsvWriter gap_csv;
  gap_csv.row({"sigma", "epochs", "beta_closed", "beta_pld", "gap", "regime"});
  dpsec::CsvWriter time_csv;
  time_csv.row({"method", "epochs", "seconds"});
  json cells = json::array();

  for (double epochs_d : epochs_list) {
    const auto epochs = static_cast<std::int64_t>(epochs_d);
    const std::int64_t steps = epochs * steps_per_epoch;
    double closed_seconds = 0.0, pld_seconds = 0.0;
    for (double sigma : sigmas) {
      if (sigma < 1.0) watch.check_sigma(sigma);
      const auto cfg = dpsec::DpSgdConfig::from_rate(p, sigma, 1.0, steps);
      const auto c0 = Clock::now();
      const double beta_closed = dpsec::mia_bound(cfg).nominal;
      closed_seconds += std::chrono::duration<double>(Clock::now() - c0).count();
      const auto c1 = Clock::now();
      const double beta_pld = dpsec::beta_via_pld(cfg, h, loss_cap);
      pld_seconds += std::chrono::duration<double>(Clock::now() - c1).count();
      const double gap = std::fabs(beta_closed - beta_pld);
      const char* regime = sigma < 1.0 ? "out_of_regime" : "ok";
      gap_csv.row({dpsec::format_double(sigma), dpsec::format_double(epochs_d),
                   dpsec::format_double(beta_closed),
                   dpsec::format_double(beta_pld), dpsec::format_double(gap),
                   regime});
      cells.push_back({{"sigma", sigma},
                       {"epochs", epochs},
                       {"beta_closed", beta_closed},
                       {"beta_pld", beta_pld},
                       {"gap", gap},
                       {"regime", regime}});
    }
    time_csv.row({"closed_form", dpsec::format_double(epochs_d),
                  dpsec::format_double(closed_seconds)});
    time_csv.row({"pld", dpsec::format_double(epochs_d),
                  dpsec::format_double(pld_seconds)});
  }

  const std::string gap_path = artifact_path(flags, "compare_gap.csv");
  const std::string time_path = artifact_path(flags, "compare_timing.csv");
  gap_csv.write_file(gap_path);
  time_csv.write_file(time_path);

  dpsec::ReportEnvelope env;
  env.command = "compare";
  env.inputs = {{"p", p},
                {"sigma_grid", sigma_grid},
                {"epoch_grid", epoch_grid},
                {"h", h},
                {"loss_cap", loss_cap}};
  env.results = {{"cells", cells}, {"gap_csv", gap_path},
                 {"timing_csv", time_path}};
  env.timing_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  std::ostringstream text;
  text << "wrote " << gap_path << " and " << time_path << "\n";
  emit(env, flags, text.str());
  return watch.exit_code(flags);
}

int cmd_train(const CommonFlags& flags, const std::string& data_path,
              const std::string& schema_path, const std::string& synthetic,
              std::int64_t n_rows, std::int64_t dim,
              const std::string& analysis_name, std::uint64_t seed,
              dpsec::TrainerOptions opt, const std::string& arch_name,
              const std::string& activation_name, bool bench) {
  const auto t0 = Clock::now();
  RegimeWatch watch;
  watch.check_sigma(opt.noise_multiplier);

  dpsec::TabularDataset ds;
  if (!synthetic.empty()) {
    if (synthetic == "adult") {
      ds = dpsec::synthetic_adult_like(static_cast<std::size_t>(n_rows), seed)
               .encode();
    } else if (synthetic == "purchase") {
      ds = dpsec::synthetic_purchase_like(static_cast<std::size_t>(n_rows),
                                          static_cast<std::size_t>(dim), seed)
               .encode();
    } else {
      throw std::invalid_argument("--synthetic must be adult|purchase");
    }
  } else {
    if (data_path.empty() || schema_path.empty())
      throw std::invalid_argument("give --data and --schema, or --synthetic");
    const auto schema =
        dpsec::SchemaConfig::parse_kv(dpsec::read_kv_file(schema_path));
    ds = dpsec::load_csv(data_path, schema);
  }

  dpsec::AnalysisMode analysis;
  if (analysis_name == "none") analysis = dpsec::AnalysisMode::kNone;
  else if (analysis_name == "mia") analysis = dpsec::AnalysisMode::kMia;
  else if (analysis_name == "ai_full") analysis = dpsec::AnalysisMode::kAiFull;
  else if (analysis_name == "ai_approx") analysis = dpsec::AnalysisMode::kAiApprox;
  else throw std::invalid_argument("--analysis must be none|mia|ai_full|ai_approx");

  if (arch_name == "logreg") {
    opt.arch = dpsec::Architecture::kLogisticRegression;
  } else if (arch_name == "mlp") {
    opt.arch = dpsec::Architecture::kMlp1Hidden;
  } else {
    throw std::invalid_argument("--arch must be logreg|mlp");
  }
  if (activation_name == "tanh") opt.activation = dpsec::Activation::kTanh;
  else if (activation_name == "relu") opt.activation = dpsec::Activation::kRelu;
  else throw std::invalid_argument("--activation must be tanh|relu");

  const auto [report, trace] = dpsec::train(ds, opt, analysis, seed);

  // Per-epoch JSONL.
  const std::string jsonl_path = artifact_path(flags, "train_report.jsonl");
  {
    std::ofstream out(jsonl_path);
    if (!out) throw std::runtime_error("cannot write " + jsonl_path);
    for (const auto& rec : report.epochs) {
      json j{{"epoch", rec.epoch},
             {"cumulative_steps", rec.cumulative_steps},
             {"loss", rec.loss},
             {"accuracy", rec.accuracy},
             {"mia_beta", rec.mia_beta},
             {"wall_time_seconds", rec.wall_time_seconds},
             {"analysis_time_seconds", rec.analysis_time_seconds}};
      if (rec.ai_beta_full) j["ai_beta_full"] = *rec.ai_beta_full;
      if (rec.ai_beta_approx) j["ai_beta_approx"] = *rec.ai_beta_approx;
      out << j.dump() << "\n";
    }
  }

  // Summary CSV.
  dpsec::CsvWriter summary;
  summary.row({"epoch", "steps", "loss", "accuracy", "mia_beta", "ai_beta",
               "wall_seconds", "analysis_seconds"});
  for (const auto& rec : report.epochs) {
    const double ai =
        rec.ai_beta_full ? *rec.ai_beta_full
                         : (rec.ai_beta_approx ? *rec.ai_beta_approx : 1.0);
    summary.row({std::to_string(rec.epoch), std::to_string(rec.cumulative_steps),
                 dpsec::format_double(rec.loss),
                 dpsec::format_double(rec.accuracy),
                 dpsec::format_double(rec.mia_beta), dpsec::format_double(ai),
                 dpsec::format_double(rec.wall_time_seconds),
                 dpsec::format_double(rec.analysis_time_seconds)});
  }
  const std::string summary_path = artifact_path(flags, "train_summary.csv");
  summary.write_file(summary_path);

  // Sensitivity trace CSV.
  std::string trace_path;
  if (!trace.values.empty()) {
    dpsec::CsvWriter tr;
    tr.row({"t", "R_t", "mode"});
    const char* mode_name =
        trace.mode == dpsec::SensitivityMode::kFull ? "full" : "approx";
    for (std::size_t t = 0; t < trace.values.size(); ++t)
      tr.row({std::to_string(t + 1), dpsec::format_double(trace.values[t]),
              mode_name});
    trace_path = artifact_path(flags, "train_trace.csv");
    tr.write_file(trace_path);
  }

  std::string bench_path;
  if (bench) {
    dpsec::CsvWriter b;
    b.row({"analysis", "epoch", "wall_seconds", "analysis_seconds"});
    for (const auto& rec : report.epochs)
      b.row({analysis_name, std::to_string(rec.epoch),
             dpsec::format_double(rec.wall_time_seconds),
             dpsec::format_double(rec.analysis_time_seconds)});
    bench_path = artifact_path(flags, "train_bench.csv");
    b.write_file(bench_path);
  }

  if (report.diverged) watch.note("training diverged (non-finite loss)");

  dpsec::ReportEnvelope env;
  env.command = "train";
  env.inputs = {{"analysis", analysis_name},
                {"clip", opt.clip_norm},
                {"sigma", opt.noise_multiplier},
                {"L", opt.expected_batch},
                {"epochs", opt.epochs},
                {"learning_rate", opt.learning_rate},
                {"arch", arch_name},
                {"rows", ds.size()},
                {"dim", ds.dim()}};
  env.seed = seed;
  env.results = {{"sampling_rate", report.sampling_rate},
                 {"steps_per_epoch", report.steps_per_epoch},
                 {"diverged", report.diverged},
                 {"caveat", report.data_dependence_caveat},
                 {"report_jsonl", jsonl_path},
                 {"summary_csv", summary_path}};
  if (!trace_path.empty()) env.results["trace_csv"] = trace_path;
  if (!bench_path.empty()) env.results["bench_csv"] = bench_path;
  if (!report.epochs.empty()) {
    const auto& last = report.epochs.back();
    env.results["final"] = {{"loss", last.loss},
                            {"accuracy", last.accuracy},
                            {"mia_beta", {{"value", last.mia_beta},
                                          {"mode", "nominal"}}}};
  }
  env.timing_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  std::ostringstream text;
  text.precision(6);
  text << "trained " << report.epochs.size() << " epoch(s), "
       << (report.epochs.empty() ? 0 : report.epochs.back().cumulative_steps)
       << " steps\n";
  if (!report.epochs.empty()) {
    const auto& last = report.epochs.back();
    text << "final loss = " << last.loss << ", accuracy = " << last.accuracy
         << ", mia_beta = " << last.mia_beta << "\n";
  }
  text << "wrote " << jsonl_path << ", " << summary_path;
  if (!trace_path.empty()) text << ", " << trace_path;
  if (!bench_path.empty()) text << ", " << bench_path;
  text << "\n";
  if (analysis == dpsec::AnalysisMode::kAiFull ||
      analysis == dpsec::AnalysisMode::kAiApprox) {
    text << "note: " << report.data_dependence_caveat << "\n";
  }
  emit(env, flags, text.str());
  return watch.exit_code(flags);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayes-security bounds for DP-SGD with numerical oracles and "
               "an instrumented trainer"};
  app.require_subcommand(1);

  // bound-mia
  auto* mia = app.add_subcommand("bound-mia", "closed-form membership bound");
  CommonFlags mia_flags;
  ConfigFlags mia_cf;
  std::string mia_mode = "nominal";
  std::int64_t mia_samples = 1000000;
  std::optional<std::uint64_t> mia_seed;
  add_common(mia, &mia_flags);
  mia_cf.add(mia);
  mia->add_option("--mode", mia_mode, "nominal|conservative|empirical");
  mia->add_option("--samples", mia_samples, "Monte Carlo samples (empirical)");
  mia->add_option("--seed", mia_seed, "RNG seed (required for empirical)");

  // bound-ai
  auto* ai = app.add_subcommand("bound-ai", "attribute-inference bound from a "
                                            "sensitivity trace");
  CommonFlags ai_flags;
  ConfigFlags ai_cf;
  std::string ai_trace;
  add_common(ai, &ai_flags);
  ai_cf.add(ai, /*with_steps=*/false);
  ai->add_option("--trace", ai_trace, "per-step R_t CSV")->required();

  // select-params
  auto* sel = app.add_subcommand("select-params",
                                 "invert the bound for p or sigma");
  CommonFlags sel_flags;
  double sel_beta = 0.0, sel_sigma = -1.0, sel_p = -1.0;
  std::int64_t sel_steps = 1, sel_n = 0;
  std::string sel_grid;
  add_common(sel, &sel_flags);
  sel->add_option("--beta", sel_beta, "target security level")->required();
  sel->add_option("--steps", sel_steps, "steps T")->required();
  sel->add_option("--sigma", sel_sigma, "solve for p given sigma");
  sel->add_option("--p", sel_p, "solve for sigma given p");
  sel->add_option("--N", sel_n, "dataset size (warn when p < 1/N)");
  sel->add_option("--sigma-grid", sel_grid, "sweep: comma-separated sigmas");

  // tpr
  auto* tpr = app.add_subcommand("tpr", "TPR bound at a fixed FPR");
  CommonFlags tpr_flags;
  double tpr_beta = 0.0, tpr_fpr = 0.0, tpr_prior = 0.5;
  add_common(tpr, &tpr_flags);
  tpr->add_option("--beta", tpr_beta, "security level")->required();
  tpr->add_option("--fpr", tpr_fpr, "false-positive rate")->required();
  tpr->add_option("--prior", tpr_prior, "membership prior");

  // dp-convert
  auto* conv = app.add_subcommand("dp-convert",
                                  "convert between (eps, delta) and beta");
  CommonFlags conv_flags;
  double conv_eps = -1.0, conv_beta = -1.0, conv_delta = 0.0;
  add_common(conv, &conv_flags);
  conv->add_option("--eps", conv_eps, "DP epsilon (forward direction)");
  conv->add_option("--beta", conv_beta, "security level (reverse direction)");
  conv->add_option("--delta", conv_delta, "DP delta");

  // oracle
  auto* orc = app.add_subcommand("oracle", "numerical oracles: tv1d, mc, pld");
  CommonFlags orc_flags;
  std::string orc_kind, orc_eps_list = "0";
  double orc_p = 0.01, orc_sigma = 1.0, orc_mu = 1.0, orc_clip = 1.0;
  double orc_h = 1e-4, orc_cap = 30.0;
  std::int64_t orc_steps = 1, orc_samples = 1000000;
  std::optional<std::uint64_t> orc_seed;
  bool orc_sweep = false;
  add_common(orc, &orc_flags);
  orc->add_option("--kind", orc_kind, "tv1d|mc|pld")->required();
  orc->add_option("--p", orc_p, "sampling rate");
  orc->add_option("--sigma", orc_sigma, "noise multiplier");
  orc->add_option("--mu", orc_mu, "mixture shift (tv1d)");
  orc->add_option("--clip", orc_clip, "clipping norm");
  orc->add_option("--steps", orc_steps, "steps (mc, pld)");
  orc->add_option("--samples", orc_samples, "Monte Carlo samples (mc)");
  orc->add_option("--seed", orc_seed, "RNG seed (required for mc)");
  orc->add_option("--grid-step", orc_h, "PLD grid spacing h");
  orc->add_option("--loss-cap", orc_cap, "PLD loss cap");
  orc->add_option("--eps-list", orc_eps_list, "eps values for delta(eps)");
  orc->add_flag("--sweep", orc_sweep, "tv1d ratio sweep CSV");

  // compare
  auto* cmp = app.add_subcommand("compare",
                                 "closed form vs PLD: gap and timing tables");
  CommonFlags cmp_flags;
  double cmp_p = 0.001, cmp_h = 1e-4, cmp_cap = 30.0;
  std::string cmp_sigmas = "1,2,4", cmp_epochs = "1,10,50";
  add_common(cmp, &cmp_flags);
  cmp->add_option("--p", cmp_p, "sampling rate");
  cmp->add_option("--sigma-grid", cmp_sigmas, "comma-separated sigmas");
  cmp->add_option("--epoch-grid", cmp_epochs, "comma-separated epoch counts");
  cmp->add_option("--grid-step", cmp_h, "PLD grid spacing h");
  cmp->add_option("--loss-cap", cmp_cap, "PLD loss cap");

  // train
  auto* trn = app.add_subcommand("train", "instrumented DP-SGD on tabular data");
  CommonFlags trn_flags;
  std::string trn_data, trn_schema, trn_synth, trn_analysis = "mia";
  std::string trn_arch = "logreg", trn_act = "tanh";
  std::int64_t trn_rows = 1000, trn_dim = 16;
  std::uint64_t trn_seed = 0;
  bool trn_bench = false;
  dpsec::TrainerOptions trn_opt;
  add_common(trn, &trn_flags);
  trn->add_option("--data", trn_data, "CSV file");
  trn->add_option("--schema", trn_schema, "key=value schema config file");
  trn->add_option("--synthetic", trn_synth, "adult|purchase");
  trn->add_option("--n", trn_rows, "synthetic row count");
  trn->add_option("--dim", trn_dim, "synthetic feature count (purchase)");
  trn->add_option("--analysis", trn_analysis, "none|mia|ai_full|ai_approx");
  trn->add_option("--seed", trn_seed, "RNG seed")->required();
  trn->add_option("--clip", trn_opt.clip_norm, "clipping norm C");
  trn->add_option("--sigma", trn_opt.noise_multiplier, "noise multiplier");
  trn->add_option("--batch", trn_opt.expected_batch, "expected batch L")
      ->required();
  trn->add_option("--epochs", trn_opt.epochs, "epochs");
  trn->add_option("--lr", trn_opt.learning_rate, "learning rate");
  trn->add_option("--arch", trn_arch, "logreg|mlp");
  trn->add_option("--hidden", trn_opt.hidden, "MLP hidden width");
  trn->add_option("--activation", trn_act, "tanh|relu");
  trn->add_flag("--bench", trn_bench, "write per-epoch timing CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (mia->parsed())
      return cmd_bound_mia(mia_cf, mia_flags, mia_mode, mia_samples, mia_seed);
    if (ai->parsed()) return cmd_bound_ai(ai_cf, ai_flags, ai_trace);
    if (sel->parsed())
      return cmd_select_params(sel_flags, sel_beta, sel_sigma, sel_p, sel_steps,
                               sel_n, sel_grid);
    if (tpr->parsed()) return cmd_tpr(tpr_flags, tpr_beta, tpr_fpr, tpr_prior);
    if (conv->parsed())
      return cmd_dp_convert(conv_flags, conv_eps, conv_beta, conv_delta);
    if (orc->parsed())
      return cmd_oracle(orc_flags, orc_kind, orc_p, orc_sigma, orc_mu, orc_clip,
                        orc_steps, orc_samples, orc_seed, orc_h, orc_cap,
                        orc_eps_list, orc_sweep);
    if (cmp->parsed())
      return cmd_compare(cmp_flags, cmp_p, cmp_sigmas, cmp_epochs, cmp_h,
                         cmp_cap);
    if (trn->parsed())
      return cmd_train(trn_flags, trn_data, trn_schema, trn_synth, trn_rows,
                       trn_dim, trn_analysis, trn_seed, trn_opt, trn_arch,
                       trn_act, trn_bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
