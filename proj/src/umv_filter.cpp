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

#include "dpfusion/umv_filter.hpp"

#include <sstream>

#include "dpfusion/errors.hpp"

namespace dpfusion {

FilterState FilterState::prior(const Vec& x0_mean, const Mat& P0) {
  FilterState s;
  s.x_hat = x0_mean;
  s.P = symmetrize(P0);
  s.x_pred = x0_mean;
  s.P_pred = s.P;
  return s;
}

ModelSlice ModelSlice::at(const SystemModel& model, int sensor, int k) {
  if (k < 1) throw ModelError("filter step index must be >= 1");
  return ModelSlice{model.A(k - 1), model.Q(k - 1), model.B(k - 1),
                    model.C(sensor, k), model.R(sensor, k)};
}

FilterState predict(const FilterState& prev, const Mat& A, const Mat& Q) {
  const int n = static_cast<int>(prev.x_hat.size());
  if (A.rows() != n || A.cols() != n || Q.rows() != n || Q.cols() != n) {
    throw FilterError("predict: dimension mismatch between state and A/Q");
  }
  FilterState out = prev;
  out.x_pred = A * prev.x_hat;
  out.P_pred = symmetrize(A * prev.P * A.transpose() + Q);
  return out;
}

CovarianceUpdate covariance_update(const Mat& P_pred, const Mat& C,
                                   const Mat& R, const Mat& B) {
  const Mat F = symmetrize(C * P_pred * C.transpose() + R);
  const Mat F_inv = spd_inverse(F, "innovation covariance F");

  const Mat K = P_pred * C.transpose() * F_inv;  // Kalman gain
  const Mat CB = C * B;
  const Mat W = symmetrize(CB.transpose() * F_inv * CB);
  const Mat W_inv = spd_inverse(W, "input observability matrix B^T C^T F^-1 C B");

  // V spans the input directions the plain Kalman gain fails to reconstruct;
  // the extra gain term forces G C B = B, which is what removes the bias
  // caused by the unknown input.
  const Mat V = B - K * CB;

  CovarianceUpdate out;
  out.F = F;
  out.gain = K + V * W_inv * CB.transpose() * F_inv;
  const Mat P_kalman = P_pred - K * C * P_pred;
  out.P = symmetrize(P_kalman + V * W_inv * V.transpose());
  return out;
}

FilterState update(const FilterState& predicted, const Vec& y, const Mat& C,
                   const Mat& R, const Mat& B) {
  const int n = static_cast<int>(predicted.x_pred.size());
  const int m = static_cast<int>(C.rows());
  if (C.cols() != n || R.rows() != m || R.cols() != m || y.size() != m ||
      B.rows() != n) {
    throw FilterError("update: dimension mismatch");
  }

  const CovarianceUpdate cov = covariance_update(predicted.P_pred, C, R, B);
  FilterState out = predicted;
  out.innovation_cov = cov.F;
  out.gain = cov.gain;
  out.x_hat =
      predicted.x_pred + cov.gain * (y - C * predicted.x_pred);
  out.P = cov.P;
  return out;
}

FilterState step(const FilterState& prev, const ModelSlice& slice,
                 const Vec& y) {
  return update(predict(prev, slice.A, slice.Q), y, slice.C, slice.R, slice.B);
}

}  // namespace dpfusion
