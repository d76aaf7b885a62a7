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

#include "dpfusion/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dpfusion/errors.hpp"

namespace dpfusion {

namespace {

using nlohmann::json;

// Squared errors of one run, gathered against the shared plan.
struct RunStats {
  std::vector<double> sq_fused;                  // [step-1]
  std::vector<std::vector<double>> sq_local;     // [sensor][step-1]
};

RunStats one_run(const SystemModel& model, const InputSignal& input,
                 const FusionPlan& plan, int horizon, std::uint64_t seed) {
  const Trajectory truth = simulate(model, input, horizon, seed);
  const std::vector<StepResult> steps = run_with_plan(model, plan, truth);

  RunStats stats;
  stats.sq_fused.resize(static_cast<std::size_t>(horizon));
  stats.sq_local.assign(static_cast<std::size_t>(model.n_sensors),
                        std::vector<double>(static_cast<std::size_t>(horizon)));
  for (int k = 1; k <= horizon; ++k) {
    const std::size_t sk = static_cast<std::size_t>(k - 1);
    const Vec& x_true = truth.states[static_cast<std::size_t>(k)];
    stats.sq_fused[sk] = (steps[sk].fused.x_fused - x_true).squaredNorm();
    for (int i = 0; i < model.n_sensors; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      Vec err;
      switch (plan.algorithm) {
        case Algorithm::kAlg1:
          err = steps[sk].noisy[si].x_bar - x_true;
          break;
        case Algorithm::kAlg2:
          err = steps[sk].x_pre[si] - x_true;
          break;
        case Algorithm::kNonprivate:
          err = steps[sk].locals[si].x_hat - x_true;
          break;
      }
      stats.sq_local[si][sk] = err.squaredNorm();
    }
  }
  return stats;
}

std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

Mat parse_matrix(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ConfigError("matrix '" + key + "' must be a nested array");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Mat m(static_cast<int>(rows), static_cast<int>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw ConfigError("matrix '" + key + "' rows have inconsistent lengths");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<int>(r), static_cast<int>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

// Either a single matrix (broadcast over steps) or a list of matrices.
MatSeq parse_matseq(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError("'" + key + "' must be a nested array");
  }
  const bool is_list = j[0].is_array() && !j[0].empty() && j[0][0].is_array();
  if (!is_list) return MatSeq(parse_matrix(j, key));
  std::vector<Mat> values;
  values.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    values.push_back(parse_matrix(j[k], key + "[" + std::to_string(k) + "]"));
  }
  return MatSeq(std::move(values));
}

Vec parse_vector(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("'" + key + "' must be an array");
  Vec v(static_cast<int>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<int>(i)) = j[i].get<double>();
  return v;
}

InputSignal parse_input(const json& j, int dim_d) {
  if (j.is_null()) return InputSignal::zero(dim_d);
  const std::string family = j.value("family", "zero");
  if (family == "zero") return InputSignal::zero(dim_d);
  if (family == "cosine") {
    Vec amp = parse_vector(j.at("amplitude"), "input.amplitude");
    return InputSignal::cosine(amp, j.value("frequency", 1.0),
                               j.value("phase", 0.0));
  }
  if (family == "table") {
    std::vector<Vec> values;
    for (const auto& row : j.at("values")) {
      values.push_back(parse_vector(row, "input.values"));
    }
    return InputSignal::table(std::move(values));
  }
  throw ConfigError("unknown input family '" + family + "'");
}

}  // namespace

std::string algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kNonprivate:
      return "nonprivate";
    case Algorithm::kAlg1:
      return "alg1";
    case Algorithm::kAlg2:
      return "alg2";
  }
  return "unknown";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "nonprivate") return Algorithm::kNonprivate;
  if (name == "alg1") return Algorithm::kAlg1;
  if (name == "alg2") return Algorithm::kAlg2;
  throw ConfigError("unknown algorithm '" + name +
                    "' (expected nonprivate, alg1 or alg2)");
}

MseReport run_experiment(const ExperimentConfig& config) {
  if (config.n_runs < 1) throw ConfigError("n_runs must be >= 1");
  if (config.horizon < 1) throw ConfigError("horizon must be >= 1");
  const ValidationReport validation =
      validate_model(config.model, config.horizon);
  if (!validation.passed) {
    std::ostringstream msg;
    msg << "model validation failed:";
    for (const auto& issue : validation.issues) msg << " [" << issue.what << "]";
    throw ModelError(msg.str());
  }

  PipelineOptions options;
  options.with_delta_p = config.with_delta_p;
  const FusionPlan plan =
      build_plan(config.model, config.algorithm, config.privacy,
                 config.weights, config.horizon, options);

  const int n_runs = config.n_runs;
  std::vector<RunStats> stats(static_cast<std::size_t>(n_runs));
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int n_workers =
      static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(n_runs)));

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int r = next.fetch_add(1); r < n_runs && !failed.load();
         r = next.fetch_add(1)) {
      try {
        stats[static_cast<std::size_t>(r)] =
            one_run(config.model, config.input, plan, config.horizon,
                    run_seed(config.master_seed, static_cast<std::uint64_t>(r)));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) {
          first_error = "run " + std::to_string(r) + ": " + e.what();
        }
      }
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw Error(first_error);

  MseReport report;
  report.algorithm = config.algorithm;
  report.n_sensors = config.model.n_sensors;
  report.horizon = config.horizon;
  report.n_runs = n_runs;
  report.with_delta_p = config.with_delta_p;

  const std::size_t H = static_cast<std::size_t>(config.horizon);
  report.sq_fused.assign(H, std::vector<double>(static_cast<std::size_t>(n_runs)));
  report.sq_local.assign(
      static_cast<std::size_t>(config.model.n_sensors),
      std::vector<std::vector<double>>(
          H, std::vector<double>(static_cast<std::size_t>(n_runs))));
  for (int r = 0; r < n_runs; ++r) {
    for (std::size_t k = 0; k < H; ++k) {
      report.sq_fused[k][static_cast<std::size_t>(r)] =
          stats[static_cast<std::size_t>(r)].sq_fused[k];
      for (int i = 0; i < config.model.n_sensors; ++i) {
        report.sq_local[static_cast<std::size_t>(i)][k]
                       [static_cast<std::size_t>(r)] =
            stats[static_cast<std::size_t>(r)].sq_local
                [static_cast<std::size_t>(i)][k];
      }
    }
  }

  report.trace_P.resize(H);
  report.delta_achieved.resize(H);
  if (config.with_delta_p) report.trace_delta_p.resize(H);
  for (std::size_t k = 0; k < H; ++k) {
    const StepPlan& sp = plan.steps[k];
    report.trace_P[k] = sp.P_fused.trace();
    report.delta_achieved[k] =
        (config.algorithm == Algorithm::kNonprivate) ? 0.0
                                                     : sp.certificate.delta_achieved;
    if (config.with_delta_p && sp.delta_P) {
      report.trace_delta_p[k] = sp.delta_P->trace();
    }
  }

  report.mse_fused.assign(H, 0.0);
  report.mse_local.assign(static_cast<std::size_t>(config.model.n_sensors),
                          std::vector<double>(H, 0.0));
  for (std::size_t k = 0; k < H; ++k) {
    double acc = 0.0;
    for (int r = 0; r < n_runs; ++r) {
      acc += report.sq_fused[k][static_cast<std::size_t>(r)];
    }
    report.mse_fused[k] = acc / n_runs;
    for (int i = 0; i < config.model.n_sensors; ++i) {
      double acc_i = 0.0;
      for (int r = 0; r < n_runs; ++r) {
        acc_i += report.sq_local[static_cast<std::size_t>(i)][k]
                               [static_cast<std::size_t>(r)];
      }
      report.mse_local[static_cast<std::size_t>(i)][k] = acc_i / n_runs;
    }
  }
  report.avg_mse_fused = 0.0;
  for (double v : report.mse_fused) report.avg_mse_fused += v;
  report.avg_mse_fused /= static_cast<double>(H);
  report.avg_mse_local.assign(static_cast<std::size_t>(config.model.n_sensors),
                              0.0);
  for (int i = 0; i < config.model.n_sensors; ++i) {
    double acc = 0.0;
    for (double v : report.mse_local[static_cast<std::size_t>(i)]) acc += v;
    report.avg_mse_local[static_cast<std::size_t>(i)] =
        acc / static_cast<double>(H);
  }

  if (!config.out_path.empty()) emit_csv(report, config.out_path);
  return report;
}

WeightComparison compare_weights(const ExperimentConfig& config,
                                 const std::vector<FusionWeights>& weight_list) {
  WeightComparison table;
  table.weights = weight_list;
  for (const FusionWeights& w : weight_list) {
    ExperimentConfig c = config;
    c.weights = w;
    c.out_path.clear();
    c.algorithm = Algorithm::kAlg1;
    table.avg_mse_alg1.push_back(run_experiment(c).avg_mse_fused);
    c.algorithm = Algorithm::kAlg2;
    table.avg_mse_alg2.push_back(run_experiment(c).avg_mse_fused);
  }
  return table;
}

std::vector<MseReport> run_sweep(const ExperimentConfig& config) {
  std::vector<MseReport> reports;
  int index = 0;
  for (const PrivacyParams& params : config.sweep) {
    ExperimentConfig c = config;
    c.privacy = params;
    c.sweep.clear();
    if (!config.out_path.empty()) {
      const std::size_t dot = config.out_path.rfind('.');
      const std::string stem = (dot == std::string::npos)
                                   ? config.out_path
                                   : config.out_path.substr(0, dot);
      const std::string ext = (dot == std::string::npos)
                                  ? ""
                                  : config.out_path.substr(dot);
      c.out_path = stem + "_sweep" + std::to_string(index) + ext;
    }
    reports.push_back(run_experiment(c));
    ++index;
  }
  return reports;
}

std::string csv_string(const MseReport& report) {
  std::ostringstream out;
  out << "step,run,algorithm";
  for (int i = 1; i <= report.n_sensors; ++i) out << ",mse_local_" << i;
  out << ",mse_fused,trace_P,delta_achieved";
  if (report.with_delta_p) out << ",trace_delta_p";
  out << "\n";

  const std::string alg = algorithm_name(report.algorithm);
  for (int k = 1; k <= report.horizon; ++k) {
    const std::size_t sk = static_cast<std::size_t>(k - 1);
    for (int r = 0; r < report.n_runs; ++r) {
      out << k << "," << r << "," << alg;
      for (int i = 0; i < report.n_sensors; ++i) {
        out << ","
            << format_g9(report.sq_local[static_cast<std::size_t>(i)][sk]
                                        [static_cast<std::size_t>(r)]);
      }
      out << "," << format_g9(report.sq_fused[sk][static_cast<std::size_t>(r)]);
      out << "," << format_g9(report.trace_P[sk]);
      out << "," << format_g9(report.delta_achieved[sk]);
      if (report.with_delta_p) {
        out << "," << format_g9(report.trace_delta_p[sk]);
      }
      out << "\n";
    }
  }

  if (report.horizon > 0 && report.n_runs > 0) {
    out << "avg,all," << alg;
    for (int i = 0; i < report.n_sensors; ++i) {
      out << ","
          << format_g9(report.avg_mse_local[static_cast<std::size_t>(i)]);
    }
    out << "," << format_g9(report.avg_mse_fused);
    double mean_trace = 0.0;
    double max_delta = 0.0;
    for (double v : report.trace_P) mean_trace += v;
    mean_trace /= static_cast<double>(report.horizon);
    for (double v : report.delta_achieved) max_delta = std::max(max_delta, v);
    out << "," << format_g9(mean_trace) << "," << format_g9(max_delta);
    if (report.with_delta_p) {
      double mean_dp = 0.0;
      for (double v : report.trace_delta_p) mean_dp += v;
      mean_dp /= static_cast<double>(report.horizon);
      out << "," << format_g9(mean_dp);
    }
    out << "\n";
  }
  return out.str();
}

void emit_csv(const MseReport& report, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("cannot open '" + path + "' for writing");
  const std::string body = csv_string(report);
  file.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!file) throw ConfigError("failed writing '" + path + "'");
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    file >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in '" + path + "': " + e.what());
  }

  ExperimentConfig config;
  try {
    SystemModel& m = config.model;
    m.n_sensors = j.at("sensors").get<int>();
    m.A_seq = parse_matseq(j.at("A"), "A");
    m.B_seq = parse_matseq(j.at("B"), "B");
    m.Q_seq = parse_matseq(j.at("Q"), "Q");
    const json& jc = j.at("C");
    const json& jr = j.at("R");
    if (!jc.is_array() || static_cast<int>(jc.size()) != m.n_sensors ||
        !jr.is_array() || static_cast<int>(jr.size()) != m.n_sensors) {
      throw ConfigError("'C' and 'R' must list one entry per sensor");
    }
    for (int i = 0; i < m.n_sensors; ++i) {
      m.C_seq.push_back(parse_matseq(jc[static_cast<std::size_t>(i)],
                                     "C[" + std::to_string(i) + "]"));
      m.R_seq.push_back(parse_matseq(jr[static_cast<std::size_t>(i)],
                                     "R[" + std::to_string(i) + "]"));
    }
    m.x0_mean = parse_vector(j.at("x0_mean"), "x0_mean");
    m.P0 = parse_matrix(j.at("P0"), "P0");
    m.dim_x = static_cast<int>(m.x0_mean.size());
    m.dim_d = static_cast<int>(m.B_seq.at(0).cols());
    for (int i = 0; i < m.n_sensors; ++i) {
      m.dim_y.push_back(static_cast<int>(m.C_seq[static_cast<std::size_t>(i)]
                                             .at(0)
                                             .rows()));
    }
    m.finalize();

    config.horizon = j.value("horizon", 50);
    config.input = parse_input(j.contains("input") ? j.at("input") : json(),
                               m.dim_d);

    if (j.contains("privacy")) {
      const json& p = j.at("privacy");
      config.privacy.epsilon = p.value("eps", p.value("epsilon", 0.0));
      config.privacy.delta = p.value("delta", 0.0);
      config.privacy.eps0 = p.value("eps0", 0.0);
    }
    if (j.contains("weights")) {
      config.weights.w = parse_vector(j.at("weights"), "weights");
    } else {
      config.weights = FusionWeights::uniform(m.n_sensors);
    }
    config.n_runs = j.value("runs", 50);
    config.algorithm = algorithm_from_name(j.value("algorithm", "alg1"));
    config.master_seed = j.value("seed", std::uint64_t{0});
    config.out_path = j.value("out", std::string{});
    config.with_delta_p = j.value("with_delta_p", false);

    if (j.contains("sweep")) {
      for (const auto& variant : j.at("sweep")) {
        PrivacyParams params = config.privacy;
        if (variant.contains("eps")) params.epsilon = variant["eps"].get<double>();
        if (variant.contains("epsilon")) params.epsilon = variant["epsilon"].get<double>();
        if (variant.contains("delta")) params.delta = variant["delta"].get<double>();
        if (variant.contains("eps0")) params.eps0 = variant["eps0"].get<double>();
        config.sweep.push_back(params);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "' is missing or mistypes a key: " +
                      e.what());
  }
  return config;
}

FusionWeights parse_weights(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    try {
      values.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse weight '" + token + "'");
    }
  }
  if (values.empty()) throw ConfigError("empty weight list");
  FusionWeights fw;
  fw.w = Eigen::Map<Vec>(values.data(), static_cast<int>(values.size()));
  return fw;
}

}  // namespace dpfusion
