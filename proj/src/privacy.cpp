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

#include "dpfusion/privacy.hpp"

#include <cmath>
#include <sstream>

#include "dpfusion/errors.hpp"

namespace dpfusion {

void PrivacyParams::validate() const {
  if (!(epsilon > 0.0)) throw PrivacyError("epsilon must be positive");
  if (!(delta > 0.0 && delta < 0.5)) {
    throw PrivacyError("delta must lie in (0, 0.5)");
  }
  if (!(eps0 > 0.0)) throw PrivacyError("eps0 must be positive");
}

double q_function(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

double q_inverse(double p) {
  if (!(p > 0.0 && p < 0.5)) {
    throw PrivacyError("q_inverse domain is (0, 0.5)");
  }
  // Bracket [lo, hi] with Q(lo) >= p >= Q(hi).
  double lo = 0.0;
  double hi = 1.0;
  while (q_function(hi) > p) hi *= 2.0;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (q_function(mid) > p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Newton refinement on Q(x) - p with Q'(x) = -phi(x).
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 8; ++i) {
    const double f = q_function(x) - p;
    const double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    if (phi == 0.0) break;
    const double next = x + f / phi;
    if (next == x) break;
    x = next;
  }
  return x;
}

Mat blkdiag(const std::vector<Mat>& blocks) {
  int n = 0;
  for (const Mat& b : blocks) n += static_cast<int>(b.rows());
  Mat out = Mat::Zero(n, n);
  int off = 0;
  for (const Mat& b : blocks) {
    const int d = static_cast<int>(b.rows());
    if (b.cols() != d) throw PrivacyError("blkdiag blocks must be square");
    out.block(off, off, d, d) = b;
    off += d;
  }
  return out;
}

QueryGeometry compute_geometry(const Mat& B_prev, const Mat& Q_prev,
                               const std::vector<Mat>& C,
                               const std::vector<Mat>& gains,
                               const PrivacyParams& params) {
  params.validate();
  if (C.size() != gains.size() || C.empty()) {
    throw PrivacyError("compute_geometry needs one C and one gain per sensor");
  }
  const int n_sensors = static_cast<int>(C.size());
  const int dim_x = static_cast<int>(B_prev.rows());
  const int dim_d = static_cast<int>(B_prev.cols());

  QueryGeometry g;
  g.n_sensors = n_sensors;

  // M = ones(n_sensors) (x) B_{k-1}: the gains satisfy G_i C_i B = B, so every
  // sensor's released estimate shifts by exactly B (d - d') under an input
  // change.
  g.M = Mat(n_sensors * dim_x, dim_d);
  for (int i = 0; i < n_sensors; ++i) {
    g.M.block(i * dim_x, 0, dim_x, dim_d) = B_prev;
  }

  // Upsilon = Gbar C Q C^T Gbar^T with Gbar = blkdiag(G_i) and C the stacked
  // measurement map; block (i, j) is G_i C_i Q C_j^T G_j^T.
  std::vector<Mat> GC(static_cast<std::size_t>(n_sensors));
  for (int i = 0; i < n_sensors; ++i) {
    if (gains[i].rows() != dim_x || gains[i].cols() != C[i].rows()) {
      throw PrivacyError("gain/measurement dimensions disagree for sensor " +
                         std::to_string(i));
    }
    GC[static_cast<std::size_t>(i)] = gains[static_cast<std::size_t>(i)] *
                                      C[static_cast<std::size_t>(i)];
  }
  Mat stacked(n_sensors * dim_x, dim_x);
  for (int i = 0; i < n_sensors; ++i) {
    stacked.block(i * dim_x, 0, dim_x, dim_x) = GC[static_cast<std::size_t>(i)];
  }
  g.Upsilon = symmetrize(stacked * Q_prev * stacked.transpose());

  const double norm_M = spectral_norm(g.M);
  if (norm_M == 0.0) {
    // B == 0: the released estimates carry no information about the input.
    g.b = 0.0;
    g.degenerate = true;
    return g;
  }

  // The certificate Q(eps/m - m/2) <= delta is equivalent to
  //   m <= root,  root = -Qinv(delta) + sqrt(Qinv(delta)^2 + 2 eps),
  // the positive root of m^2/2 + Qinv(delta) m - eps = 0. Combined with the
  // bound  sup m <= eps0 ||M||_2 / sqrt(lambda_min(S)),  the floor on the
  // total noise covariance is b = eps0^2 ||M||_2^2 / root^2.
  const double qinv = q_inverse(params.delta);
  const double root = -qinv + std::sqrt(qinv * qinv + 2.0 * params.epsilon);
  g.b = params.eps0 * params.eps0 * norm_M * norm_M / (root * root);
  return g;
}

double worst_case_mahalanobis(const Mat& M, const Mat& S, double eps0) {
  const Mat S_inv = [&] {
    try {
      return spd_inverse(S, "total noise covariance S", 1e16);
    } catch (const FilterError& e) {
      throw PrivacyError(e.what());
    }
  }();
  const double sigma = max_eigenvalue(M.transpose() * S_inv * M);
  return eps0 * std::sqrt(std::max(sigma, 0.0));
}

Certificate certify(const PrivacyParams& params, const QueryGeometry& geometry,
                    const std::vector<Mat>& Sigma_blocks) {
  params.validate();
  const Mat S = symmetrize(geometry.Upsilon + blkdiag(Sigma_blocks));
  if (S.rows() != geometry.Upsilon.rows()) {
    throw PrivacyError("Sigma blocks do not match the geometry dimension");
  }
  Certificate cert;
  if (geometry.M.size() == 0 || geometry.M.isZero(0.0)) {
    // The query does not depend on the input at all.
    cert.mahalanobis = 0.0;
  } else {
    cert.mahalanobis = worst_case_mahalanobis(geometry.M, S, params.eps0);
  }
  if (cert.mahalanobis == 0.0) {
    cert.delta_achieved = 0.0;
  } else {
    cert.delta_achieved = q_function(params.epsilon / cert.mahalanobis -
                                     0.5 * cert.mahalanobis);
  }
  cert.holds = cert.delta_achieved <= params.delta + 1e-12;
  return cert;
}

}  // namespace dpfusion
