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

#ifndef DPFUSION_SDP_HPP
#define DPFUSION_SDP_HPP

#include <optional>
#include <vector>

#include "dpfusion/linalg.hpp"

namespace dpfusion {

// Structured trace-minimization SDP:
//   minimize    sum_i trace(Sigma_i)
//   subject to  blkdiag(Sigma_1..Sigma_M) + Upsilon - b I >= 0,
//               Sigma_i >= 0.
struct SdpProblem {
  Mat Upsilon;
  double b = 0.0;
  std::vector<int> block_dims;
  double feasibility_tol = 1e-8;
  double objective_tol = 1e-7;
  int max_iters = 50000;
  std::optional<std::vector<Mat>> warm_start;
};

enum class SdpStatus { kOptimal, kMaxIters, kInfeasibleInput };

struct SdpSolution {
  std::vector<Mat> Sigma_blocks;
  double objective = 0.0;
  // lambda_min(blkdiag(Sigma) + Upsilon - b I) of the returned iterate.
  double feasibility_margin = 0.0;
  int iterations = 0;
  SdpStatus status = SdpStatus::kInfeasibleInput;
};

/// Operator-splitting solve. One copy of the variable lives on the
/// block-diagonal PSD cone with the trace objective folded into its proximal
/// step; the other on the shifted cone {Sigma : Sigma + Upsilon - b I >= 0};
/// scaled dual updates run until primal and dual residuals meet the
/// tolerances. If Upsilon >= b I already, returns Sigma = 0 immediately.
/// Converged solutions are lifted to exact feasibility (a small multiple of
/// the identity added per block), so the constraint always holds at return
/// when status is kOptimal. Deterministic: identical problems give identical
/// solutions.
SdpSolution solve_sdp(const SdpProblem& problem);

/// Upper bound on the relaxation gap for a feasible point S_orig > 0 of the
/// unrelaxed problem: (max(1, b / lambda_min(S_orig)) - 1) * trace(S_orig).
double gap_bound(double b, const Mat& S_orig);

}  // namespace dpfusion

#endif  // DPFUSION_SDP_HPP
