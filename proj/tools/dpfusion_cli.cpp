//
// Copyright 2026 The dpfusion Authors
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

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpfusion/errors.hpp"
#include "dpfusion/harness.hpp"

namespace {

std::vector<dpfusion::FusionWeights> parse_weight_table(
    const std::string& spec) {
  std::vector<dpfusion::FusionWeights> out;
  std::stringstream ss(spec);
  std::string entry;
  while (std::getline(ss, entry, ';')) {
    if (!entry.empty()) out.push_back(dpfusion::parse_weights(entry));
  }
  return out;
}

void print_report_summary(const dpfusion::MseReport& report) {
  std::printf("algorithm=%s runs=%d horizon=%d\n",
              dpfusion::algorithm_name(report.algorithm).c_str(),
              report.n_runs, report.horizon);
  std::printf("  avg fused MSE: %.6g\n", report.avg_mse_fused);
  for (std::size_t i = 0; i < report.avg_mse_local.size(); ++i) {
    std::printf("  avg local MSE (sensor %zu): %.6g\n", i + 1,
                report.avg_mse_local[i]);
  }
  double max_delta = 0.0;
  for (double v : report.delta_achieved) max_delta = std::max(max_delta, v);
  std::printf("  max certificate delta: %.6g\n", max_delta);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Differentially private distributed fusion estimation simulator"};

  std::string config_path;
  std::string algorithm;
  std::string weights_csv;
  std::string out_path;
  std::string weight_table_spec;
  std::string sweep_eps0;
  std::string sweep_eps_delta;
  int runs = -1;
  int horizon = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double eps = -1.0, delta = -1.0, eps0 = -1.0;
  bool with_delta_p = false;

  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--algorithm", algorithm,
                 "Pipeline: nonprivate, alg1 or alg2");
  app.add_option("--runs", runs, "Monte Carlo runs");
  app.add_option("--horizon", horizon, "Number of time steps");
  auto* seed_opt = app.add_option("--seed", seed, "Master RNG seed");
  app.add_option("--eps", eps, "Privacy epsilon");
  app.add_option("--delta", delta, "Privacy delta");
  app.add_option("--eps0", eps0, "Adjacency radius");
  app.add_option("--w", weights_csv, "Fusion weights, e.g. 0.5,0.5");
  app.add_option("--out", out_path, "CSV output path");
  app.add_flag("--with-delta-p", with_delta_p,
               "Compute the accuracy-loss diagnostic");
  app.add_option("--weights-table", weight_table_spec,
                 "Semicolon-separated weight vectors; runs both private "
                 "algorithms per vector, e.g. \"0.4,0.6;0.5,0.5;0.6,0.4\"");
  app.add_option("--sweep-eps0", sweep_eps0,
                 "Comma-separated eps0 values to sweep");
  app.add_option("--sweep-eps-delta", sweep_eps_delta,
                 "Comma-separated eps:delta pairs to sweep, e.g. "
                 "\"1e-6:1e-6,0.1:0.1\"");

  try {
    app.parse(argc, argv);
    seed_set = seed_opt->count() > 0;

    dpfusion::ExperimentConfig config = dpfusion::load_config(config_path);
    if (!algorithm.empty()) {
      config.algorithm = dpfusion::algorithm_from_name(algorithm);
    }
    if (runs > 0) config.n_runs = runs;
    if (horizon > 0) config.horizon = horizon;
    if (seed_set) config.master_seed = seed;
    if (eps > 0) config.privacy.epsilon = eps;
    if (delta > 0) config.privacy.delta = delta;
    if (eps0 > 0) config.privacy.eps0 = eps0;
    if (!weights_csv.empty()) config.weights = dpfusion::parse_weights(weights_csv);
    if (!out_path.empty()) config.out_path = out_path;
    if (with_delta_p) config.with_delta_p = true;

    if (!weight_table_spec.empty()) {
      const auto weight_list = parse_weight_table(weight_table_spec);
      const auto table = dpfusion::compare_weights(config, weight_list);
      std::printf("%-10s", "algorithm");
      for (const auto& w : table.weights) {
        std::string head = "(";
        for (int i = 0; i < w.w.size(); ++i) {
          char buf[16];
          std::snprintf(buf, sizeof(buf), "%g", w.w(i));
          head += buf;
          head += (i + 1 < w.w.size()) ? "," : ")";
        }
        std::printf(" %14s", head.c_str());
      }
      std::printf("\n%-10s", "alg1");
      for (double v : table.avg_mse_alg1) std::printf(" %14.6g", v);
      std::printf("\n%-10s", "alg2");
      for (double v : table.avg_mse_alg2) std::printf(" %14.6g", v);
      std::printf("\n");
      return 0;
    }

    if (!sweep_eps0.empty() || !sweep_eps_delta.empty()) {
      config.sweep.clear();
      if (!sweep_eps0.empty()) {
        std::stringstream ss(sweep_eps0);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          dpfusion::PrivacyParams p = config.privacy;
          p.eps0 = std::stod(tok);
          config.sweep.push_back(p);
        }
      } else {
        std::stringstream ss(sweep_eps_delta);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
          const std::size_t colon = tok.find(':');
          if (colon == std::string::npos) {
            throw dpfusion::ConfigError("expected eps:delta pair, got '" +
                                        tok + "'");
          }
          dpfusion::PrivacyParams p = config.privacy;
          p.epsilon = std::stod(tok.substr(0, colon));
          p.delta = std::stod(tok.substr(colon + 1));
          config.sweep.push_back(p);
        }
      }
      const auto reports = dpfusion::run_sweep(config);
      for (std::size_t i = 0; i < reports.size(); ++i) {
        std::printf("sweep[%zu]: eps=%g delta=%g eps0=%g -> avg fused MSE %.6g\n",
                    i, config.sweep[i].epsilon, config.sweep[i].delta,
                    config.sweep[i].eps0, reports[i].avg_mse_fused);
      }
      return 0;
    }

    const dpfusion::MseReport report = dpfusion::run_experiment(config);
    print_report_summary(report);
    if (!config.out_path.empty()) {
      std::printf("  wrote %s\n", config.out_path.c_str());
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
