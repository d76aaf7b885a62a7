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

#ifndef DPFUSION_UMV_FILTER_HPP
#define DPFUSION_UMV_FILTER_HPP

#include "dpfusion/linalg.hpp"
#include "dpfusion/system_model.hpp"

namespace dpfusion {

// State of one sensor's unbiased minimum-variance filter after a full
// predict/update cycle. Covariances are kept symmetric.
struct FilterState {
  Vec x_hat;           // filtered estimate
  Mat P;               // filtered error covariance
  Vec x_pred;          // predicted estimate
  Mat P_pred;          // predicted error covariance
  Mat gain;            // input-robust gain G
  Mat innovation_cov;  // F = C P_pred C^T + R

  static FilterState prior(const Vec& x0_mean, const Mat& P0);
};

// Per-step model slice consumed by one filter step: the transition data of
// step k-1 and the measurement data of step k.
struct ModelSlice {
  Mat A;  // A_{k-1}
  Mat Q;  // Q_{k-1}
  Mat B;  // B_{k-1}
  Mat C;  // C_{i,k}
  Mat R;  // R_{i,k}

  static ModelSlice at(const SystemModel& model, int sensor, int k);
};

// Measurement-independent part of the update. The gain and covariances never
// read the measurement or the input signal, only dimensions and model data.
struct CovarianceUpdate {
  Mat F;     // innovation covariance
  Mat gain;  // G
  Mat P;     // filtered covariance
};

CovarianceUpdate covariance_update(const Mat& P_pred, const Mat& C,
                                   const Mat& R, const Mat& B);

/// Prediction: x_pred = A x_hat, P_pred = A P A^T + Q (symmetrized).
FilterState predict(const FilterState& prev, const Mat& A, const Mat& Q);

/// Measurement update robust to the unknown exogenous input. The covariance
/// is the standard Kalman update plus a correction for the uncertainty the
/// input injects through B. Throws FilterError (with condition numbers) when
/// the innovation covariance or the input observability matrix B^T C^T F^-1 C B
/// is numerically singular.
FilterState update(const FilterState& predicted, const Vec& y, const Mat& C,
                   const Mat& R, const Mat& B);

/// predict followed by update on one model slice.
FilterState step(const FilterState& prev, const ModelSlice& slice,
                 const Vec& y);

}  // namespace dpfusion

#endif  // DPFUSION_UMV_FILTER_HPP
