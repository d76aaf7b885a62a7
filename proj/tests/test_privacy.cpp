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

#include <doctest.h>

#include <cmath>

#include "dpfusion/errors.hpp"
#include "dpfusion/privacy.hpp"
#include "dpfusion/umv_filter.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dpfusion;

// Noise floor for the tracking fixture at (eps, delta, eps0) =
// (1e-3, 1e-3, 0.1), computed once with the tail-integration oracle in this
// file and frozen as a regression constant.
constexpr double kFrozenTrackingB = 1.9101071359813097e5;

TEST_CASE("q_function basics") {
  CHECK(q_function(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  for (double x : {0.5, 1.0, 2.0}) {
    CHECK(q_function(x) + q_function(-x) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("q_function matches the tail-integration oracle") {
  for (double x : {0.1, 1.0, 2.5, 3.090232, 4.0, 6.0}) {
    const double expected = oracles::gaussian_tail_integral(x);
    CHECK(std::abs(q_function(x) - expected) <= 1e-6 * expected);
  }
  // Q(3.090232) is 1e-3 to six figures
  CHECK(q_function(3.090232) == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("q_inverse boundary and round trips") {
  CHECK(std::abs(q_inverse(0.5 - 1e-15)) < 1e-6);
  CHECK(q_inverse(q_function(1.7)) == doctest::Approx(1.7).epsilon(1e-9));
  CHECK(std::abs(q_inverse(1e-3) - oracles::oracle_q_inverse(1e-3)) < 1e-5);
  CHECK(q_inverse(1e-3) == doctest::Approx(3.090232).epsilon(1e-5));
}

TEST_CASE("q_inverse round trip on a log grid") {
  for (double p = 1e-9; p <= 0.49; p *= 1.7) {
    const double x = q_inverse(p);
    CHECK(std::abs(q_function(x) - p) <= 1e-12);
  }
  CHECK(std::abs(q_function(q_inverse(0.49)) - 0.49) <= 1e-12);
}

TEST_CASE("q_inverse rejects values outside (0, 0.5)") {
  CHECK_THROWS_AS(q_inverse(0.0), PrivacyError);
  CHECK_THROWS_AS(q_inverse(0.5), PrivacyError);
  CHECK_THROWS_AS(q_inverse(0.7), PrivacyError);
  CHECK_THROWS_AS(q_inverse(-0.1), PrivacyError);
}

TEST_CASE("privacy params validation") {
  CHECK_NOTHROW((PrivacyParams{0.1, 0.1, 0.1}.validate()));
  CHECK_THROWS_AS((PrivacyParams{0.0, 0.1, 0.1}.validate()), PrivacyError);
  CHECK_THROWS_AS((PrivacyParams{0.1, 0.5, 0.1}.validate()), PrivacyError);
  CHECK_THROWS_AS((PrivacyParams{0.1, 0.1, 0.0}.validate()), PrivacyError);
}

TEST_CASE("single-sensor geometry") {
  std::mt19937_64 rng(3);
  const Mat B = oracles::random_matrix(4, 2, rng);
  const Mat Q = oracles::random_spd(4, rng);
  const Mat C = oracles::random_matrix(3, 4, rng);
  const Mat G = oracles::random_matrix(4, 3, rng);

  const PrivacyParams params{1e-2, 1e-2, 0.5};
  const QueryGeometry g = compute_geometry(B, Q, {C}, {G}, params);

  const Mat GC = oracles::mat_mul(G, C);
  const Mat expected = oracles::mat_mul(oracles::mat_mul(GC, Q),
                                        oracles::mat_transpose(GC));
  CHECK((g.Upsilon - expected).norm() < 1e-12);
  CHECK((g.M - B).norm() == 0.0);
  CHECK(spectral_norm(g.M) == doctest::Approx(spectral_norm(B)).epsilon(1e-12));
}

TEST_CASE("zero process noise gives zero Upsilon") {
  const SystemModel m = fixtures::tracking_model();
  const Mat G1 = Mat::Ones(4, 2);
  const Mat G2 = Mat::Ones(4, 4);
  const QueryGeometry g =
      compute_geometry(m.B(0), Mat::Zero(4, 4), {m.C(0, 1), m.C(1, 1)},
                       {G1, G2}, fixtures::tracking_privacy());
  CHECK(g.Upsilon.norm() == 0.0);
  CHECK(g.b > 0.0);
}

TEST_CASE("zero B flags the degenerate case") {
  const QueryGeometry g =
      compute_geometry(Mat::Zero(4, 2), Mat::Identity(4, 4),
                       {Mat::Identity(4, 4)}, {Mat::Identity(4, 4)},
                       PrivacyParams{1e-3, 1e-3, 0.1});
  CHECK(g.degenerate);
  CHECK(g.b == 0.0);
}

TEST_CASE("Kronecker stack norm identity") {
  std::mt19937_64 rng(9);
  for (int m_count : {1, 2, 5}) {
    const Mat B = oracles::random_matrix(4, 2, rng);
    Mat stack(4 * m_count, 2);
    for (int i = 0; i < m_count; ++i) stack.block(4 * i, 0, 4, 2) = B;
    const double lhs = spectral_norm(stack);
    const double rhs = std::sqrt(static_cast<double>(m_count)) * spectral_norm(B);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * rhs);
  }
}

TEST_CASE("tracking-model geometry at step one: frozen noise floor") {
  const SystemModel m = fixtures::tracking_model();
  const PrivacyParams params = fixtures::tracking_privacy();

  // Gains of the first filter step.
  std::vector<Mat> gains;
  for (int i = 0; i < 2; ++i) {
    const Mat P_pred = symmetrize(m.A(0) * m.P0 * m.A(0).transpose() + m.Q(0));
    gains.push_back(covariance_update(P_pred, m.C(i, 1), m.R(i, 1), m.B(0)).gain);
  }
  const QueryGeometry g =
      compute_geometry(m.B(0), m.Q(0), {m.C(0, 1), m.C(1, 1)}, gains, params);

  // ||M||_2 = sqrt(2) * sigma_max(B) with sigma_max(B) = 1.
  CHECK(spectral_norm(g.M) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  // Expected floor from the tail-integration oracle:
  //   root = -Qinv(delta) + sqrt(Qinv(delta)^2 + 2 eps),
  //   b    = eps0^2 ||M||^2 / root^2.
  const double qinv = oracles::oracle_q_inverse(params.delta);
  const double root =
      -qinv + std::sqrt(qinv * qinv + 2.0 * params.epsilon);
  const double expected_b = params.eps0 * params.eps0 * 2.0 / (root * root);
  CHECK(g.b == doctest::Approx(expected_b).epsilon(1e-7));

  // Frozen regression constant (computed with the oracle above).
  CHECK(g.b == doctest::Approx(kFrozenTrackingB).epsilon(1e-6));

  CHECK(min_eigenvalue(g.Upsilon) >= -1e-10);
}

TEST_CASE("worst-case Mahalanobis closed cases") {
  const double eps0 = 0.3;
  CHECK(worst_case_mahalanobis(Mat::Identity(3, 3), Mat::Identity(3, 3), eps0) ==
        doctest::Approx(eps0).epsilon(1e-12));

  std::mt19937_64 rng(21);
  const Mat M = oracles::random_matrix(4, 2, rng);
  const double c = 3.7;
  const Mat S = c * Mat::Identity(4, 4);
  CHECK(worst_case_mahalanobis(M, S, eps0) ==
        doctest::Approx(eps0 * spectral_norm(M) / std::sqrt(c)).epsilon(1e-12));
}

TEST_CASE("worst-case Mahalanobis matches a direction grid search") {
  std::mt19937_64 rng(33);
  const Mat M = oracles::random_matrix(4, 2, rng);
  const Mat S = oracles::random_spd(4, rng, 0.5, 4.0);
  const double eps0 = 0.25;

  const Mat S_inv = oracles::mat_inverse(S);
  double best = 0.0;
  const int n_grid = 20000;
  for (int t = 0; t < n_grid; ++t) {
    const double theta = 2.0 * M_PI * t / n_grid;
    Vec d(2);
    d << std::cos(theta), std::sin(theta);
    const Vec mu = M * (eps0 * d);
    best = std::max(best, std::sqrt(mu.dot(S_inv * mu)));
  }
  const double value = worst_case_mahalanobis(M, S, eps0);
  CHECK(std::abs(value - best) <= 1e-3 * best);
  CHECK(value >= best - 1e-12);  // grid can only underestimate the sup
}

TEST_CASE("worst-case Mahalanobis rejects singular S") {
  CHECK_THROWS_AS(
      worst_case_mahalanobis(Mat::Identity(2, 2), Mat::Zero(2, 2), 0.1),
      PrivacyError);
}

TEST_CASE("certificate in the huge-noise limit") {
  const SystemModel m = fixtures::tracking_model();
  const PrivacyParams params = fixtures::tracking_privacy();
  QueryGeometry g;
  g.n_sensors = 2;
  g.M = Mat(8, 2);
  g.M.block(0, 0, 4, 2) = m.B(0);
  g.M.block(4, 0, 4, 2) = m.B(0);
  g.Upsilon = Mat::Zero(8, 8);

  const std::vector<Mat> huge(2, Mat(1e9 * Mat::Identity(4, 4)));
  const Certificate cert = certify(params, g, huge);
  CHECK(cert.holds);
  CHECK(cert.delta_achieved < 1e-6);

  const std::vector<Mat> none(2, Mat(Mat::Zero(4, 4)));
  CHECK_THROWS_AS(certify(params, g, none), PrivacyError);
}

TEST_CASE("more noise never hurts the certificate") {
  std::mt19937_64 rng(55);
  const PrivacyParams params{0.5, 0.05, 1.0};
  for (int trial = 0; trial < 40; ++trial) {
    QueryGeometry g;
    g.n_sensors = 1;
    g.M = oracles::random_matrix(3, 2, rng);
    g.Upsilon = Mat::Zero(3, 3);

    const Mat S1 = oracles::random_spd(3, rng, 0.2, 2.0);
    const Mat S2 = S1 + oracles::random_spd(3, rng, 0.0, 3.0);
    const Certificate c1 = certify(params, g, {S1});
    const Certificate c2 = certify(params, g, {S2});
    CHECK(c2.delta_achieved <= c1.delta_achieved + 1e-14);
  }
}

TEST_CASE("noise floor is monotone in the privacy parameters") {
  const SystemModel m = fixtures::tracking_model();
  const std::vector<Mat> C = {m.C(0, 1), m.C(1, 1)};
  const std::vector<Mat> gains = {Mat::Ones(4, 2), Mat::Ones(4, 4)};
  auto b_of = [&](double eps, double delta, double eps0) {
    return compute_geometry(m.B(0), m.Q(0), C, gains,
                            PrivacyParams{eps, delta, eps0})
        .b;
  };

  // increasing in eps0
  double prev = 0.0;
  for (double eps0 : {0.05, 0.1, 0.2, 0.5, 1.0}) {
    const double b = b_of(1e-3, 1e-3, eps0);
    CHECK(b > prev);
    prev = b;
  }
  // decreasing in eps
  prev = 1e300;
  for (double eps : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
    const double b = b_of(eps, 1e-3, 0.1);
    CHECK(b < prev);
    prev = b;
  }
  // decreasing in delta
  prev = 1e300;
  for (double delta : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 0.4}) {
    const double b = b_of(1e-3, delta, 0.1);
    CHECK(b < prev);
    prev = b;
  }
}
