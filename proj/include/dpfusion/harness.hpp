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

#ifndef DPFUSION_HARNESS_HPP
#define DPFUSION_HARNESS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dpfusion/fusion.hpp"

namespace dpfusion {

struct ExperimentConfig {
  SystemModel model;
  InputSignal input;
  PrivacyParams privacy;
  FusionWeights weights;
  int horizon = 50;
  int n_runs = 50;
  Algorithm algorithm = Algorithm::kAlg1;
  std::uint64_t master_seed = 0;
  std::vector<PrivacyParams> sweep;
  std::string out_path;
  bool with_delta_p = false;
};

// Per-step Monte Carlo error statistics. MSE is the squared Euclidean norm
// of the estimation error averaged over runs; "local" means the transmitted
// noisy estimate for alg1, the post-feedback estimate for alg2, and the plain
// local estimate for the non-private baseline.
struct MseReport {
  Algorithm algorithm = Algorithm::kNonprivate;
  int n_sensors = 0;
  int horizon = 0;
  int n_runs = 0;
  bool with_delta_p = false;

  // raw squared errors indexed [step-1][run]
  std::vector<std::vector<double>> sq_fused;
  std::vector<std::vector<std::vector<double>>> sq_local;  // [sensor][step-1][run]

  // deterministic per-step quantities
  std::vector<double> trace_P;          // trace of the fused covariance
  std::vector<double> delta_achieved;   // certificate value (0 when n/a)
  std::vector<double> trace_delta_p;    // empty unless with_delta_p

  // run-averaged per-step curves
  std::vector<double> mse_fused;
  std::vector<std::vector<double>> mse_local;  // [sensor][step-1]

  // time- and run-averaged scalars
  double avg_mse_fused = 0.0;
  std::vector<double> avg_mse_local;
};

struct WeightComparison {
  std::vector<FusionWeights> weights;
  std::vector<double> avg_mse_alg1;  // one entry per weight vector
  std::vector<double> avg_mse_alg2;
};

/// Runs the configured Monte Carlo experiment: one shared measurement-
/// independent plan, then n_runs seeded truth simulations in a worker pool.
/// Writes the CSV when config.out_path is nonempty.
MseReport run_experiment(const ExperimentConfig& config);

/// Runs both private algorithms for every weight vector under common random
/// numbers and reports the time/run-averaged fused MSE per cell.
WeightComparison compare_weights(const ExperimentConfig& config,
                                 const std::vector<FusionWeights>& weight_list);

/// Runs the experiment once per sweep variant (common random numbers).
std::vector<MseReport> run_sweep(const ExperimentConfig& config);

/// CSV bytes for a report: header
///   step,run,algorithm,mse_local_1..M,mse_fused,trace_P,delta_achieved
/// (plus trace_delta_p when enabled), rows step-major/run-minor with 9
/// significant digits, then one summary row. Deterministic.
std::string csv_string(const MseReport& report);

/// Writes csv_string(report) to path. Throws ConfigError on I/O failure.
void emit_csv(const MseReport& report, const std::string& path);

/// Loads a JSON config file. Matrices are row-major nested arrays; every
/// matrix key accepts either a single matrix (constant over time) or a list
/// of per-step matrices.
ExperimentConfig load_config(const std::string& path);

/// Parses "0.4,0.6" style weight lists.
FusionWeights parse_weights(const std::string& csv);

std::string algorithm_name(Algorithm algorithm);
Algorithm algorithm_from_name(const std::string& name);

}  // namespace dpfusion

#endif  // DPFUSION_HARNESS_HPP
