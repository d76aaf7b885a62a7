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

// Shared test fixture: the two-sensor planar tracking model used throughout
// the suites. Sensor 1 measures the two positions accurately; sensor 2
// measures the full state coarsely. The exogenous input drives the positions.

#ifndef DPFUSION_TESTS_FIXTURES_HPP
#define DPFUSION_TESTS_FIXTURES_HPP

#include "dpfusion/fusion.hpp"
#include "dpfusion/system_model.hpp"

namespace fixtures {

using dpfusion::Mat;
using dpfusion::Vec;

inline Vec vec4(double a, double b, double c, double d) {
  Vec v(4);
  v << a, b, c, d;
  return v;
}

inline dpfusion::SystemModel tracking_model() {
  dpfusion::SystemModel m;
  m.n_sensors = 2;
  m.dim_x = 4;
  m.dim_d = 2;
  m.dim_y = {2, 4};

  Mat A(4, 4);
  A << 1, 1, 0, 0,  //
      0, 1, 0, 0,   //
      0, 0, 1, 1,   //
      0, 0, 0, 1;
  Mat B(4, 2);
  B << 1, 0,  //
      0, 0,   //
      0, 1,   //
      0, 0;
  Mat Q = vec4(1.0, 0.1, 1.0, 0.1).asDiagonal();

  Mat C1(2, 4);
  C1 << 1, 0, 0, 0,  //
      0, 0, 1, 0;
  Mat C2 = Mat::Identity(4, 4);

  m.A_seq = dpfusion::MatSeq(A);
  m.B_seq = dpfusion::MatSeq(B);
  m.Q_seq = dpfusion::MatSeq(Q);
  m.C_seq = {dpfusion::MatSeq(C1), dpfusion::MatSeq(C2)};
  m.R_seq = {dpfusion::MatSeq(Mat(0.1 * Mat::Identity(2, 2))),
             dpfusion::MatSeq(Mat(20.0 * Mat::Identity(4, 4)))};
  m.x0_mean = vec4(0.0, 5.0, 0.0, 5.0);
  m.P0 = 10.0 * Mat::Identity(4, 4);
  m.finalize();
  return m;
}

inline dpfusion::InputSignal tracking_input() {
  Vec amp(2);
  amp << 5.0, 5.0;
  return dpfusion::InputSignal::cosine(amp);
}

inline dpfusion::PrivacyParams tracking_privacy() {
  return dpfusion::PrivacyParams{1e-3, 1e-3, 0.1};
}

}  // namespace fixtures

#endif  // DPFUSION_TESTS_FIXTURES_HPP
