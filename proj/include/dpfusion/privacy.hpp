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

#ifndef DPFUSION_PRIVACY_HPP
#define DPFUSION_PRIVACY_HPP

#include <vector>

#include "dpfusion/linalg.hpp"

namespace dpfusion {

// (epsilon, delta) privacy level plus the adjacency radius eps0: two inputs
// are adjacent when their l2 distance is at most eps0.
struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;
  double eps0 = 0.0;

  /// Throws PrivacyError unless epsilon > 0, 0 < delta < 0.5, eps0 > 0.
  /// delta >= 0.5 is rejected because the noise floor below needs
  /// q_inverse(delta) > 0.
  void validate() const;
};

// Geometry of the released-estimate query at one time step: the stacked
// sensitivity map M (all-ones Kronecker B), the guaranteed lower bound
// Upsilon on the covariance of the estimates' intrinsic randomness, and the
// eigenvalue floor b that the total noise covariance S = Upsilon + blkdiag(
// Sigma) must satisfy.
struct QueryGeometry {
  Mat M;        // (n_sensors * dim_x) x dim_d
  Mat Upsilon;  // (n_sensors * dim_x) square, symmetric PSD
  double b = 0.0;
  int n_sensors = 0;
  bool degenerate = false;  // B == 0: no noise needed at all
};

struct Certificate {
  bool holds = false;
  double delta_achieved = 0.0;
  double mahalanobis = 0.0;  // worst-case value over the adjacency ball
};

/// Standard normal upper-tail probability, Q(x) = erfc(x / sqrt(2)) / 2.
double q_function(double x);

/// Inverse of q_function on (0, 0.5): returns x > 0 with Q(x) = p, bracketing
/// bisection refined by Newton steps. Throws PrivacyError outside the domain.
double q_inverse(double p);

/// Builds the step geometry from the transition data (B_prev = B_{k-1},
/// Q_prev = Q_{k-1}), the per-sensor measurement maps C_i at step k, and the
/// per-sensor filter gains G_i of the same step.
QueryGeometry compute_geometry(const Mat& B_prev, const Mat& Q_prev,
                               const std::vector<Mat>& C,
                               const std::vector<Mat>& gains,
                               const PrivacyParams& params);

/// sup of || q(d) - q(d') ||_{S^-1} over adjacent pairs, which equals
/// eps0 * sqrt(sigma_max(M^T S^-1 M)). S must be positive definite.
double worst_case_mahalanobis(const Mat& M, const Mat& S, double eps0);

/// Evaluates the tail-bound privacy certificate for the noise blocks Sigma:
/// with S = Upsilon + blkdiag(Sigma) and m the worst-case Mahalanobis value,
/// delta_achieved = Q(epsilon/m - m/2) (zero when m == 0), and the mechanism
/// certifies iff delta_achieved <= delta + 1e-12. Throws PrivacyError when S
/// is singular (insufficient noise in some direction).
Certificate certify(const PrivacyParams& params, const QueryGeometry& geometry,
                    const std::vector<Mat>& Sigma_blocks);

/// Block-diagonal assembly helper.
Mat blkdiag(const std::vector<Mat>& blocks);

}  // namespace dpfusion

#endif  // DPFUSION_PRIVACY_HPP
