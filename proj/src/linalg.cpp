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

#include "dpfusion/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dpfusion/errors.hpp"

namespace dpfusion {

double min_eigenvalue(const Mat& sym) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(sym),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Mat& sym) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(sym),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

Mat psd_project(const Mat& sym) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(sym));
  Vec lam = es.eigenvalues().cwiseMax(0.0);
  return symmetrize(es.eigenvectors() * lam.asDiagonal() *
                    es.eigenvectors().transpose());
}

Mat psd_sqrt(const Mat& sym) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(sym));
  Vec lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return symmetrize(es.eigenvectors() * lam.asDiagonal() *
                    es.eigenvectors().transpose());
}

Mat spd_inverse(const Mat& sym, const std::string& name, double cond_limit) {
  Eigen::SelfAdjointEigenSolver<Mat> es(symmetrize(sym));
  const Vec& lam = es.eigenvalues();
  const double lo = lam.minCoeff();
  const double hi = lam.maxCoeff();
  const double cond =
      (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
  if (lo <= 0.0 || cond > cond_limit) {
    std::ostringstream msg;
    msg << name << " is singular or ill-conditioned: lambda_min = " << lo
        << ", condition number = " << cond;
    throw FilterError(msg.str());
  }
  return symmetrize(es.eigenvectors() * lam.cwiseInverse().asDiagonal() *
                    es.eigenvectors().transpose());
}

int numerical_rank(const Mat& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cutoff = tol * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) ++rank;
  }
  return rank;
}

bool is_psd(const Mat& x, double tol) {
  if (x.rows() != x.cols()) return false;
  return min_eigenvalue(x) >= -tol;
}

}  // namespace dpfusion
