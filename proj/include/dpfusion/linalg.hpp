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

#ifndef DPFUSION_LINALG_HPP
#define DPFUSION_LINALG_HPP

#include <string>

#include <Eigen/Dense>

namespace dpfusion {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline Mat symmetrize(const Mat& x) { return 0.5 * (x + x.transpose()); }

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Mat& sym);

/// Largest eigenvalue of a symmetric matrix.
double max_eigenvalue(const Mat& sym);

/// Largest singular value.
double spectral_norm(const Mat& m);

/// Nearest PSD matrix in Frobenius norm: eigendecompose and clamp negative
/// eigenvalues to zero.
Mat psd_project(const Mat& sym);

/// Symmetric square root with negative eigenvalues clamped to zero, so it is
/// usable as a sampling factor for merely-PSD covariances.
Mat psd_sqrt(const Mat& sym);

/// Inverse of a symmetric positive-definite matrix via eigendecomposition,
/// rejecting matrices whose condition number exceeds `cond_limit`. `name`
/// identifies the matrix in the thrown message.
Mat spd_inverse(const Mat& sym, const std::string& name,
                double cond_limit = 1e12);

/// Rank from singular values with relative tolerance tol * sigma_max.
int numerical_rank(const Mat& m, double tol = 1e-9);

/// True when symmetrized `x` has lambda_min >= -tol.
bool is_psd(const Mat& x, double tol = 1e-10);

}  // namespace dpfusion

#endif  // DPFUSION_LINALG_HPP
