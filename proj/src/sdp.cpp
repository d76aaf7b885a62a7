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

#include "dpfusion/sdp.hpp"

#include <cmath>
#include <numeric>

#include "dpfusion/errors.hpp"
#include "dpfusion/privacy.hpp"

namespace dpfusion {

namespace {

std::vector<int> block_offsets(const std::vector<int>& dims) {
  std::vector<int> off(dims.size());
  int acc = 0;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    off[i] = acc;
    acc += dims[i];
  }
  return off;
}

// Project onto {X : X block-diagonal, X_i PSD} after shifting by -(1/rho) I,
// which is the proximal step of trace(X) restricted to that set.
void block_trace_prox(const Mat& V, double inv_rho,
                      const std::vector<int>& dims,
                      const std::vector<int>& offs, Mat* X) {
  X->setZero();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const int d = dims[i];
    const int o = offs[i];
    Mat blk = V.block(o, o, d, d);
    blk.diagonal().array() -= inv_rho;
    X->block(o, o, d, d) = psd_project(blk);
  }
}

}  // namespace

SdpSolution solve_sdp(const SdpProblem& problem) {
  const int N = static_cast<int>(problem.Upsilon.rows());
  SdpSolution sol;

  const int dims_total =
      std::accumulate(problem.block_dims.begin(), problem.block_dims.end(), 0);
  if (problem.Upsilon.cols() != N || dims_total != N ||
      problem.block_dims.empty()) {
    throw SdpError("block dimensions do not partition Upsilon");
  }
  if (!problem.Upsilon.allFinite() || !std::isfinite(problem.b)) {
    sol.status = SdpStatus::kInfeasibleInput;
    return sol;
  }
  if (problem.b < 0.0) throw SdpError("b must be nonnegative");

  const std::vector<int>& dims = problem.block_dims;
  const std::vector<int> offs = block_offsets(dims);
  const Mat Upsilon = symmetrize(problem.Upsilon);

  auto extract_blocks = [&](const Mat& X) {
    std::vector<Mat> blocks(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) {
      blocks[i] = symmetrize(X.block(offs[i], offs[i], dims[i], dims[i]));
    }
    return blocks;
  };
  auto finish = [&](std::vector<Mat> blocks, int iters, SdpStatus status) {
    // Lift converged iterates to exact feasibility; the shift is on the order
    // of the residual tolerance.
    if (status == SdpStatus::kOptimal) {
      const double margin =
          min_eigenvalue(blkdiag(blocks) + Upsilon) - problem.b;
      if (margin < 0.0) {
        const double lift = -margin * (1.0 + 1e-12);
        for (Mat& blk : blocks) blk.diagonal().array() += lift;
      }
    }
    sol.Sigma_blocks = std::move(blocks);
    sol.objective = 0.0;
    for (const Mat& blk : sol.Sigma_blocks) sol.objective += blk.trace();
    sol.feasibility_margin =
        min_eigenvalue(blkdiag(sol.Sigma_blocks) + Upsilon) - problem.b;
    sol.iterations = iters;
    sol.status = status;
    return sol;
  };

  // Constraint already satisfied by zero noise.
  if (min_eigenvalue(Upsilon) >= problem.b) {
    std::vector<Mat> zeros(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) {
      zeros[i] = Mat::Zero(dims[i], dims[i]);
    }
    return finish(std::move(zeros), 0, SdpStatus::kOptimal);
  }

  // Solve in units of `scale` so tolerances behave across magnitudes of b.
  const double scale = std::max({1.0, problem.b, spectral_norm(Upsilon)});
  const Mat shift = Upsilon / scale -
                    (problem.b / scale) * Mat::Identity(N, N);  // (Y - bI)/s

  Mat X = Mat::Zero(N, N);
  if (problem.warm_start) {
    const auto& ws = *problem.warm_start;
    if (ws.size() == dims.size()) {
      for (std::size_t i = 0; i < dims.size(); ++i) {
        if (ws[i].rows() == dims[i] && ws[i].cols() == dims[i]) {
          X.block(offs[i], offs[i], dims[i], dims[i]) =
              psd_project(ws[i]) / scale;
        }
      }
    }
  }
  Mat Z = psd_project(X + shift) - shift;
  Mat U = Mat::Zero(N, N);

  double rho = 1.0;
  const double sqrt_n = std::sqrt(static_cast<double>(N));
  int iter = 0;
  for (; iter < problem.max_iters; ++iter) {
    block_trace_prox(Z - U, 1.0 / (rho * scale), dims, offs, &X);
    const Mat Z_prev = Z;
    Z = psd_project(X + U + shift) - shift;
    U += X - Z;

    const double r_primal = (X - Z).norm();
    const double s_dual = rho * (Z - Z_prev).norm();
    const double eps_primal =
        problem.feasibility_tol * (sqrt_n + std::max(X.norm(), Z.norm()));
    const double eps_dual =
        problem.objective_tol * (sqrt_n + rho * U.norm());
    if (r_primal <= eps_primal && s_dual <= eps_dual) {
      ++iter;
      return finish(extract_blocks(scale * X), iter, SdpStatus::kOptimal);
    }

    // Residual balancing keeps the two residuals within a factor of ten.
    if ((iter + 1) % 50 == 0) {
      if (r_primal > 10.0 * s_dual) {
        rho *= 2.0;
        U *= 0.5;
      } else if (s_dual > 10.0 * r_primal) {
        rho *= 0.5;
        U *= 2.0;
      }
    }
  }
  return finish(extract_blocks(scale * X), iter, SdpStatus::kMaxIters);
}

double gap_bound(double b, const Mat& S_orig) {
  const double lam_min = min_eigenvalue(S_orig);
  if (lam_min <= 0.0) {
    throw SdpError("gap_bound needs a positive definite reference point");
  }
  const double alpha = std::max(1.0, b / lam_min);
  return (alpha - 1.0) * S_orig.trace();
}

}  // namespace dpfusion
