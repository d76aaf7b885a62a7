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

#include "dpfusion/system_model.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "dpfusion/errors.hpp"

namespace dpfusion {

const Mat& MatSeq::at(int k) const {
  if (values_.empty()) throw ModelError("matrix sequence is empty");
  if (values_.size() == 1) return values_[0];
  if (k < 0 || static_cast<std::size_t>(k) >= values_.size()) {
    std::ostringstream msg;
    msg << "matrix sequence index " << k << " out of range (length "
        << values_.size() << ")";
    throw ModelError(msg.str());
  }
  return values_[static_cast<std::size_t>(k)];
}

namespace {

MatSeq symmetrized(const MatSeq& seq) {
  if (seq.length() == 1) return MatSeq(symmetrize(seq.at(0)));
  std::vector<Mat> out;
  out.reserve(seq.length());
  for (std::size_t k = 0; k < seq.length(); ++k) {
    out.push_back(symmetrize(seq.at(static_cast<int>(k))));
  }
  return MatSeq(std::move(out));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ModelError(what);
}

}  // namespace

void SystemModel::finalize() {
  require(n_sensors >= 1, "n_sensors must be positive");
  require(dim_x >= 1 && dim_d >= 1, "dim_x and dim_d must be positive");
  require(static_cast<int>(dim_y.size()) == n_sensors,
          "dim_y must have one entry per sensor");
  require(static_cast<int>(C_seq.size()) == n_sensors &&
              static_cast<int>(R_seq.size()) == n_sensors,
          "C and R must have one sequence per sensor");
  require(x0_mean.size() == dim_x, "x0_mean has wrong dimension");
  require(P0.rows() == dim_x && P0.cols() == dim_x, "P0 has wrong dimension");

  auto check_seq = [&](const MatSeq& seq, int rows, int cols,
                       const std::string& name) {
    require(seq.length() >= 1, name + " sequence is empty");
    for (std::size_t k = 0; k < seq.length(); ++k) {
      const Mat& m = seq.at(static_cast<int>(k));
      if (m.rows() != rows || m.cols() != cols) {
        std::ostringstream msg;
        msg << name << "[" << k << "] is " << m.rows() << "x" << m.cols()
            << ", expected " << rows << "x" << cols;
        throw ModelError(msg.str());
      }
    }
  };
  check_seq(A_seq, dim_x, dim_x, "A");
  check_seq(B_seq, dim_x, dim_d, "B");
  check_seq(Q_seq, dim_x, dim_x, "Q");
  for (int i = 0; i < n_sensors; ++i) {
    check_seq(C_seq[i], dim_y[i], dim_x, "C[" + std::to_string(i) + "]");
    check_seq(R_seq[i], dim_y[i], dim_y[i], "R[" + std::to_string(i) + "]");
  }

  // Guard against asymmetric config files.
  Q_seq = symmetrized(Q_seq);
  for (auto& r : R_seq) r = symmetrized(r);
  P0 = symmetrize(P0);
}

InputSignal InputSignal::zero(int dim_d) {
  return InputSignal{[dim_d](int) { return Vec::Zero(dim_d); }};
}

InputSignal InputSignal::cosine(Vec amplitude, double frequency, double phase) {
  return InputSignal{[amplitude = std::move(amplitude), frequency,
                      phase](int k) -> Vec {
    return amplitude * std::cos(frequency * k + phase);
  }};
}

InputSignal InputSignal::table(std::vector<Vec> values) {
  return InputSignal{[values = std::move(values)](int k) -> Vec {
    if (k < 0 || static_cast<std::size_t>(k) >= values.size()) {
      throw ModelError("input table has no entry for step " +
                       std::to_string(k));
    }
    return values[static_cast<std::size_t>(k)];
  }};
}

ValidationReport validate_model(const SystemModel& model, int horizon) {
  ValidationReport report;
  auto fail = [&](std::string what, int sensor, int step) {
    report.passed = false;
    report.issues.push_back({std::move(what), sensor, step});
  };

  if (model.dim_x < model.dim_d) {
    fail("dim_x < dim_d", -1, -1);
  }
  for (int i = 0; i < model.n_sensors; ++i) {
    if (model.dim_y[i] < model.dim_d) {
      fail("dim_y < dim_d for sensor " + std::to_string(i), i, -1);
    }
  }

  auto check_psd_seq = [&](const MatSeq& seq, const std::string& name,
                           int sensor) {
    const std::size_t n = seq.constant() ? 1 : seq.length();
    for (std::size_t k = 0; k < n; ++k) {
      if (!is_psd(seq.at(static_cast<int>(k)), 1e-10)) {
        fail(name + " is not positive semidefinite", sensor,
             seq.constant() ? -1 : static_cast<int>(k));
      }
    }
  };
  check_psd_seq(model.Q_seq, "Q", -1);
  for (int i = 0; i < model.n_sensors; ++i) {
    check_psd_seq(model.R_seq[i], "R[" + std::to_string(i) + "]", i);
  }
  if (!is_psd(model.P0, 1e-10)) fail("P0 is not positive semidefinite", -1, -1);

  // rank(C_{i,k} B_{k-1}) = rank(B_{k-1}) = dim_d for every sensor and step.
  // With all-constant matrices one check suffices.
  const bool all_constant = [&] {
    bool c = model.B_seq.constant();
    for (const auto& cs : model.C_seq) c = c && cs.constant();
    return c;
  }();
  const int last_step = all_constant ? 1 : std::max(horizon, 1);
  for (int k = 1; k <= last_step; ++k) {
    const Mat& B = model.B(k - 1);
    if (numerical_rank(B) != model.dim_d) {
      fail("rank(B) < dim_d at step " + std::to_string(k - 1), -1, k - 1);
      continue;
    }
    for (int i = 0; i < model.n_sensors; ++i) {
      const Mat CB = model.C(i, k) * B;
      if (numerical_rank(CB) != model.dim_d) {
        std::ostringstream msg;
        msg << "rank(C B) < rank(B) for sensor " << i << " at step " << k;
        fail(msg.str(), i, k);
      }
    }
  }
  return report;
}

Trajectory simulate(const SystemModel& model, const InputSignal& input,
                    int horizon, std::uint64_t seed) {
  if (horizon < 0) throw ModelError("horizon must be nonnegative");

  auto sample = [&](const Mat& cov, std::uint64_t sensor, std::uint64_t step,
                    NoiseRole role, const std::string& name) -> Vec {
    if (min_eigenvalue(cov) < -1e-10) {
      throw ModelError(name + " is not positive semidefinite; cannot sample");
    }
    SubstreamRng rng(derive_key(seed, 0, sensor, step, role));
    return psd_sqrt(cov) * rng.gaussian_vector(static_cast<int>(cov.rows()));
  };

  Trajectory traj;
  traj.seed = seed;
  traj.states.reserve(static_cast<std::size_t>(horizon) + 1);
  traj.states.push_back(model.x0_mean +
                        sample(model.P0, 0, 0, NoiseRole::kInitialState, "P0"));

  traj.measurements.assign(static_cast<std::size_t>(model.n_sensors), {});
  for (auto& m : traj.measurements) {
    m.reserve(static_cast<std::size_t>(horizon));
  }

  for (int k = 0; k < horizon; ++k) {
    const Vec w = sample(model.Q(k), 0, static_cast<std::uint64_t>(k),
                         NoiseRole::kProcess, "Q");
    const Vec x_next =
        model.A(k) * traj.states.back() + model.B(k) * input.at(k) + w;
    traj.states.push_back(x_next);
    for (int i = 0; i < model.n_sensors; ++i) {
      const Vec v =
          sample(model.R(i, k + 1), static_cast<std::uint64_t>(i),
                 static_cast<std::uint64_t>(k + 1), NoiseRole::kMeasurement,
                 "R[" + std::to_string(i) + "]");
      traj.measurements[static_cast<std::size_t>(i)].push_back(
          model.C(i, k + 1) * x_next + v);
    }
  }
  return traj;
}

}  // namespace dpfusion
