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

#ifndef DPFUSION_FUSION_HPP
#define DPFUSION_FUSION_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "dpfusion/privacy.hpp"
#include "dpfusion/sdp.hpp"
#include "dpfusion/system_model.hpp"
#include "dpfusion/umv_filter.hpp"

namespace dpfusion {

struct FusionWeights {
  Vec w;

  static FusionWeights uniform(int n_sensors);
  /// Throws FusionError unless w_i >= 0 and sum(w) = 1 within 1e-12.
  void validate(int n_sensors) const;
};

// What one sensor actually transmits: the noise-perturbed estimate and the
// consistently inflated covariance.
struct NoisyLocal {
  Vec x_bar;  // x_hat + omega
  Mat P_bar;  // P + Sigma
};

struct FusionResult {
  Vec x_fused;
  Mat P_fused;
  std::optional<Mat> delta_P;  // accuracy-loss diagnostic, when computed
  FusionWeights weights;
};

/// Samples omega ~ N(0, Sigma) through a symmetric factor of Sigma and forms
/// the transmitted pair. Throws FusionError for non-PSD Sigma.
NoisyLocal inject_noise(const FilterState& local, const Mat& Sigma,
                        SubstreamRng& rng);

/// Covariance-intersection fusion in information form:
///   P_fused^-1 = sum_i w_i P_bar_i^-1,
///   x_fused    = P_fused * sum_i w_i P_bar_i^-1 x_bar_i.
FusionResult ci_fuse(const std::vector<NoisyLocal>& locals,
                     const FusionWeights& weights);

/// Accuracy-loss diagnostic
///   delta_P = P_fused (sum_i w_i P_i^-1 Sigma_i (P_i + Sigma_i)^-1) P_nonpriv
/// cross-checked against the direct difference P_fused - P_nonpriv; throws
/// FusionError if the two routes disagree beyond 1e-8 Frobenius.
Mat accuracy_loss(const std::vector<Mat>& P_locals,
                  const std::vector<Mat>& Sigma_blocks,
                  const FusionWeights& weights, const Mat& P_fused,
                  const Mat& P_nonpriv);

/// Feedback rule: the fused pair is adopted only when it dominates the local
/// covariance in the PSD order, lambda_min(P_local - P_fused) >= -1e-9. Ties
/// resolve toward keeping the local estimate.
bool feedback_adopts(const Mat& P_local, const Mat& P_fused);

/// Applies the feedback rule to one sensor: returns the local state with
/// (x_hat, P) replaced by the fused pair when it dominates, unchanged
/// otherwise.
FilterState feedback_update(const FilterState& local,
                            const FusionResult& fused);

enum class Algorithm { kNonprivate, kAlg1, kAlg2 };

struct PipelineOptions {
  bool force_zero_noise = false;  // privacy disabled: inject Sigma = 0
  bool with_delta_p = false;      // compute the accuracy-loss diagnostic
  double sdp_feasibility_tol = 1e-8;
  double sdp_objective_tol = 1e-7;
  int sdp_max_iters = 50000;
};

// Everything about one step that does not depend on measurements: the
// covariance recursion, the gains, the optimized noise design, the
// certificate, and (for the feedback variant) the adoption decisions.
struct StepPlan {
  std::vector<Mat> P_pred;
  std::vector<Mat> P_local;  // P_{i,k|k}
  std::vector<Mat> gains;
  std::vector<Mat> F;

  QueryGeometry geometry;
  SdpSolution sdp;
  std::vector<Mat> Sigma;       // final noise design, after any inflation
  std::vector<Mat> Sigma_sqrt;  // cached sampling factors
  Certificate certificate;
  int inflations = 0;  // 1.5x scalings applied to satisfy the certificate

  std::vector<Mat> P_bar;
  std::vector<Mat> P_bar_inv;
  Mat P_fused;

  std::optional<Mat> P_fused_nonpriv;
  std::optional<Mat> delta_P;

  std::vector<bool> adopt_fused;  // feedback decisions (kAlg2 only)
  std::vector<Mat> P_pre;         // post-feedback local covariances (kAlg2)
};

struct FusionPlan {
  Algorithm algorithm = Algorithm::kNonprivate;
  PrivacyParams params;
  FusionWeights weights;
  PipelineOptions options;
  std::vector<StepPlan> steps;
};

/// Precomputes the measurement-independent plan for a pipeline. The gain and
/// covariance recursion, the noise design, and the feedback decisions are all
/// deterministic functions of the model, so Monte Carlo runs can share one
/// plan. If the optimized noise fails the certificate (or the solver stopped
/// at max_iters with a failing certificate), the blocks are inflated by 1.5x
/// repeatedly, up to 40 times, before giving up with PrivacyError.
FusionPlan build_plan(const SystemModel& model, Algorithm algorithm,
                      const PrivacyParams& params, const FusionWeights& weights,
                      int horizon, const PipelineOptions& options = {});

struct StepResult {
  std::vector<FilterState> locals;  // per-sensor states after the update
  std::vector<NoisyLocal> noisy;    // transmitted values
  FusionResult fused;
  Certificate certificate;
  std::vector<Vec> x_pre;  // post-feedback local estimates (kAlg2 only)
};

struct AlgorithmOutput {
  FusionPlan plan;
  Trajectory truth;
  std::vector<StepResult> steps;
};

/// Executes one Monte Carlo run against a prebuilt plan. Consumes the truth
/// trajectory generated from `seed`; the privacy noises come from dedicated
/// substreams of the same seed.
std::vector<StepResult> run_with_plan(const SystemModel& model,
                                      const FusionPlan& plan,
                                      const Trajectory& truth);

/// One-call pipelines: simulate, then filter/design noise/fuse per step.
/// Local sensors carry their own (non-noisy) estimates forward; the noisy
/// versions exist only on the wire to the fusion center.
AlgorithmOutput run_algorithm_1(const SystemModel& model,
                                const InputSignal& input,
                                const PrivacyParams& params,
                                const FusionWeights& weights, int horizon,
                                std::uint64_t seed,
                                const PipelineOptions& options = {});

/// Same as run_algorithm_1 plus the per-step feedback update: each sensor
/// adopts the fused pair when it dominates, and the next prediction starts
/// from the post-feedback pair.
AlgorithmOutput run_algorithm_2(const SystemModel& model,
                                const InputSignal& input,
                                const PrivacyParams& params,
                                const FusionWeights& weights, int horizon,
                                std::uint64_t seed,
                                const PipelineOptions& options = {});

/// Non-private baseline: plain covariance-intersection fusion of the local
/// estimates.
AlgorithmOutput run_nonprivate(const SystemModel& model,
                               const InputSignal& input,
                               const FusionWeights& weights, int horizon,
                               std::uint64_t seed,
                               const PipelineOptions& options = {});

}  // namespace dpfusion

#endif  // DPFUSION_FUSION_HPP
