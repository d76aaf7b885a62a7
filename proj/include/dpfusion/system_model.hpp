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

#ifndef DPFUSION_SYSTEM_MODEL_HPP
#define DPFUSION_SYSTEM_MODEL_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dpfusion/linalg.hpp"
#include "dpfusion/rng.hpp"

namespace dpfusion {

// Matrix sequence that is either one constant matrix broadcast over all steps
// or an explicit per-step list.
class MatSeq {
 public:
  MatSeq() = default;
  explicit MatSeq(Mat constant) : values_{std::move(constant)} {}
  explicit MatSeq(std::vector<Mat> per_step) : values_(std::move(per_step)) {}

  bool constant() const { return values_.size() == 1; }
  std::size_t length() const { return values_.size(); }

  const Mat& at(int k) const;

 private:
  std::vector<Mat> values_;
};

// Linear time-varying plant
//   x_{k+1} = A_k x_k + B_k d_k + w_k,      w_k ~ N(0, Q_k)
//   y_{i,k} = C_{i,k} x_k + v_{i,k},        v_{i,k} ~ N(0, R_{i,k})
// with M sensors. A/B/Q sequences are indexed by the transition step
// k = 0..horizon-1; C/R sequences by the measurement step k = 1..horizon.
struct SystemModel {
  int n_sensors = 0;
  int dim_x = 0;
  int dim_d = 0;
  std::vector<int> dim_y;

  MatSeq A_seq, B_seq, Q_seq;
  std::vector<MatSeq> C_seq, R_seq;

  Vec x0_mean;
  Mat P0;

  const Mat& A(int k) const { return A_seq.at(k); }
  const Mat& B(int k) const { return B_seq.at(k); }
  const Mat& Q(int k) const { return Q_seq.at(k); }
  const Mat& C(int sensor, int k) const { return C_seq.at(sensor).at(k - 1); }
  const Mat& R(int sensor, int k) const { return R_seq.at(sensor).at(k - 1); }

  /// Symmetrizes all covariance inputs and checks dimensions. Throws
  /// ModelError on structural problems. Call once after filling the fields.
  void finalize();
};

// Exogenous input d_k, defined for every step of the horizon.
struct InputSignal {
  std::function<Vec(int)> at;

  static InputSignal zero(int dim_d);
  /// d_k = amplitude .* cos(frequency * k + phase), elementwise.
  static InputSignal cosine(Vec amplitude, double frequency = 1.0,
                            double phase = 0.0);
  static InputSignal table(std::vector<Vec> values);
};

struct Trajectory {
  std::vector<Vec> states;                     // x_0 .. x_horizon
  std::vector<std::vector<Vec>> measurements;  // [sensor][k-1] = y_{i,k}
  std::uint64_t seed = 0;
};

struct ValidationIssue {
  std::string what;
  int sensor = -1;  // -1 when not sensor specific
  int step = -1;    // -1 when not step specific
};

struct ValidationReport {
  bool passed = true;
  std::vector<ValidationIssue> issues;
};

/// Checks PSD-ness of Q/R/P0, the dimension requirements dim_x >= dim_d and
/// dim_y_i >= dim_d, and the per-step rank condition
/// rank(C_{i,k} B_{k-1}) = rank(B_{k-1}) = dim_d via singular values.
/// Report style: never throws for assumption failures.
ValidationReport validate_model(const SystemModel& model, int horizon);

/// Samples a ground-truth trajectory and per-sensor measurements. Noise
/// streams for distinct (sensor, step, role) tuples come from independent
/// substreams of `seed`, so regeneration is bit-identical.
Trajectory simulate(const SystemModel& model, const InputSignal& input,
                    int horizon, std::uint64_t seed);

}  // namespace dpfusion

#endif  // DPFUSION_SYSTEM_MODEL_HPP
