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

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dpfusion/errors.hpp"
#include "dpfusion/harness.hpp"
#include "fixtures.hpp"

using namespace dpfusion;

namespace {

ExperimentConfig tracking_config() {
  ExperimentConfig config;
  config.model = fixtures::tracking_model();
  config.input = fixtures::tracking_input();
  config.privacy = PrivacyParams{0.1, 0.1, 0.1};
  config.weights = FusionWeights::uniform(2);
  config.horizon = 5;
  config.n_runs = 4;
  config.algorithm = Algorithm::kAlg1;
  config.master_seed = 99;
  return config;
}

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) {
    if (c == '\n') ++n;
  }
  return n;
}

const char* kConfigJson = R"json({
  "sensors": 2,
  "A": [[1,1,0,0],[0,1,0,0],[0,0,1,1],[0,0,0,1]],
  "B": [[1,0],[0,0],[0,1],[0,0]],
  "Q": [[1,0,0,0],[0,0.1,0,0],[0,0,1,0],[0,0,0,0.1]],
  "C": [
    [[1,0,0,0],[0,0,1,0]],
    [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]
  ],
  "R": [
    [[0.1,0],[0,0.1]],
    [[20,0,0,0],[0,20,0,0],[0,0,20,0],[0,0,0,20]]
  ],
  "x0_mean": [0,5,0,5],
  "P0": [[10,0,0,0],[0,10,0,0],[0,0,10,0],[0,0,0,10]],
  "input": {"family": "cosine", "amplitude": [5,5]},
  "horizon": 4,
  "runs": 3,
  "algorithm": "alg1",
  "seed": 7,
  "privacy": {"eps": 0.1, "delta": 0.1, "eps0": 0.1},
  "weights": [0.5, 0.5]
})json";

std::string write_temp_config() {
  const std::string path = "harness_test_config.json";
  std::ofstream out(path);
  out << kConfigJson;
  return path;
}

}  // namespace

TEST_CASE("smoke: one run, one step, non-private") {
  ExperimentConfig config = tracking_config();
  config.algorithm = Algorithm::kNonprivate;
  config.horizon = 1;
  config.n_runs = 1;
  const MseReport report = run_experiment(config);
  CHECK(report.mse_fused.size() == 1);
  CHECK(report.mse_fused[0] >= 0.0);
  CHECK(report.avg_mse_fused >= 0.0);

  const std::string csv = csv_string(report);
  CHECK(count_lines(csv) == 1 + 1 + 1);  // header + one row + summary
  CHECK(csv.rfind("step,run,algorithm,mse_local_1,mse_local_2,"
                  "mse_fused,trace_P,delta_achieved\n",
                  0) == 0);
}

TEST_CASE("empty report emits a header-only file") {
  MseReport report;
  report.n_sensors = 2;
  const std::string csv = csv_string(report);
  CHECK(count_lines(csv) == 1);
}

TEST_CASE("identical configurations give byte-identical CSV output") {
  ExperimentConfig config = tracking_config();
  const std::string a = csv_string(run_experiment(config));
  const std::string b = csv_string(run_experiment(config));
  CHECK(a == b);
  CHECK(!a.empty());

  config.master_seed = 100;
  const std::string c = csv_string(run_experiment(config));
  CHECK(a != c);
}

TEST_CASE("CSV row count is horizon x runs plus summary") {
  ExperimentConfig config = tracking_config();
  config.horizon = 4;
  config.n_runs = 3;
  const std::string csv = csv_string(run_experiment(config));
  CHECK(count_lines(csv) == 1 + 4 * 3 + 1);
}

TEST_CASE("delta_achieved column respects the privacy budget") {
  ExperimentConfig config = tracking_config();
  const MseReport report = run_experiment(config);
  for (double v : report.delta_achieved) {
    CHECK(v <= config.privacy.delta + 1e-12);
  }
}

TEST_CASE("with_delta_p adds the diagnostic column") {
  ExperimentConfig config = tracking_config();
  config.with_delta_p = true;
  const MseReport report = run_experiment(config);
  CHECK(report.trace_delta_p.size() == 5);
  const std::string csv = csv_string(report);
  CHECK(csv.find("trace_delta_p") != std::string::npos);
  for (double v : report.trace_delta_p) CHECK(v >= -1e-8);
}

TEST_CASE("config file round trip") {
  const std::string path = write_temp_config();
  const ExperimentConfig config = load_config(path);
  CHECK(config.model.n_sensors == 2);
  CHECK(config.model.dim_x == 4);
  CHECK(config.model.dim_d == 2);
  CHECK(config.horizon == 4);
  CHECK(config.n_runs == 3);
  CHECK(config.privacy.epsilon == 0.1);
  CHECK(config.weights.w(0) == 0.5);
  CHECK(config.input.at(0)(0) == doctest::Approx(5.0));
  CHECK(config.input.at(1)(0) == doctest::Approx(5.0 * std::cos(1.0)));

  const MseReport report = run_experiment(config);
  const std::string csv = csv_string(report);
  CHECK(count_lines(csv) == 1 + 4 * 3 + 1);
  std::remove(path.c_str());
}

TEST_CASE("table input family is honored") {
  const std::string path = "harness_table_config.json";
  {
    std::ofstream out(path);
    std::string body = kConfigJson;
    const std::string cosine =
        R"("input": {"family": "cosine", "amplitude": [5,5]})";
    const std::string table =
        R"("input": {"family": "table", "values": [[1,2],[3,4],[5,6],[7,8]]})";
    body.replace(body.find(cosine), cosine.size(), table);
    out << body;
  }
  const ExperimentConfig config = load_config(path);
  CHECK(config.input.at(0)(0) == 1.0);
  CHECK(config.input.at(3)(1) == 8.0);
  CHECK_THROWS_AS(config.input.at(4), ModelError);
  const MseReport report = run_experiment(config);
  CHECK(report.avg_mse_fused >= 0.0);
  std::remove(path.c_str());
}

TEST_CASE("missing config keys raise ConfigError") {
  const std::string path = "harness_bad_config.json";
  {
    std::ofstream out(path);
    out << R"({"sensors": 2})";
  }
  CHECK_THROWS_AS(load_config(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("emit_csv writes the exact csv_string bytes") {
  ExperimentConfig config = tracking_config();
  config.horizon = 2;
  config.n_runs = 2;
  const MseReport report = run_experiment(config);
  const std::string path = "harness_test_out.csv";
  emit_csv(report, path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == csv_string(report));
  std::remove(path.c_str());
}

TEST_CASE("unwritable output path raises ConfigError") {
  ExperimentConfig config = tracking_config();
  config.horizon = 1;
  config.n_runs = 1;
  const MseReport report = run_experiment(config);
  CHECK_THROWS_AS(emit_csv(report, "/nonexistent_dir/report.csv"), ConfigError);
}

TEST_CASE("duplicate weight entries produce identical columns") {
  ExperimentConfig config = tracking_config();
  config.horizon = 3;
  config.n_runs = 3;
  const FusionWeights w = FusionWeights::uniform(2);
  const WeightComparison table = compare_weights(config, {w, w});
  CHECK(table.avg_mse_alg1[0] == table.avg_mse_alg1[1]);
  CHECK(table.avg_mse_alg2[0] == table.avg_mse_alg2[1]);
}

TEST_CASE("weighting the accurate sensor helps") {
  ExperimentConfig config = tracking_config();
  config.horizon = 10;
  config.n_runs = 20;
  config.algorithm = Algorithm::kAlg1;

  ExperimentConfig c1 = config;
  c1.weights = parse_weights("1,0");
  ExperimentConfig c2 = config;
  c2.weights = parse_weights("0,1");
  // common random numbers: same master seed
  const double mse_sensor1 = run_experiment(c1).avg_mse_fused;
  const double mse_sensor2 = run_experiment(c2).avg_mse_fused;
  CHECK(mse_sensor1 < mse_sensor2);
}

TEST_CASE("sweeps run every variant under common random numbers") {
  ExperimentConfig config = tracking_config();
  config.horizon = 3;
  config.n_runs = 3;
  config.sweep = {config.privacy, PrivacyParams{0.2, 0.2, 0.1}};
  const std::vector<MseReport> reports = run_sweep(config);
  REQUIRE(reports.size() == 2);
  // first variant repeats the base configuration exactly
  const MseReport base = run_experiment(config);
  CHECK(csv_string(reports[0]) == csv_string(base));
  CHECK(reports[0].avg_mse_fused != reports[1].avg_mse_fused);
}

TEST_CASE("parse_weights accepts lists and rejects junk") {
  const FusionWeights w = parse_weights("0.4,0.6");
  CHECK(w.w.size() == 2);
  CHECK(w.w(0) == doctest::Approx(0.4));
  CHECK_THROWS_AS(parse_weights("0.4,abc"), ConfigError);
  CHECK_THROWS_AS(parse_weights(""), ConfigError);
}

TEST_CASE("algorithm names round trip") {
  for (Algorithm alg :
       {Algorithm::kNonprivate, Algorithm::kAlg1, Algorithm::kAlg2}) {
    CHECK(algorithm_from_name(algorithm_name(alg)) == alg);
  }
  CHECK_THROWS_AS(algorithm_from_name("bogus"), ConfigError);
}

TEST_CASE("non-private baseline beats the private pipeline on shared seeds") {
  ExperimentConfig config = tracking_config();
  config.horizon = 8;
  config.n_runs = 10;
  ExperimentConfig np = config;
  np.algorithm = Algorithm::kNonprivate;
  CHECK(run_experiment(np).avg_mse_fused <
        run_experiment(config).avg_mse_fused);
}
