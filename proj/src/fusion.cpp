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

#include "dpfusion/fusion.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "dpfusion/errors.hpp"

namespace dpfusion {

namespace {

constexpr double kFusionCondLimit = 1e14;
constexpr int kMaxInflations = 40;

Mat guarded_inverse(const Mat& sym, const std::string& name) {
  try {
    return spd_inverse(sym, name, kFusionCondLimit);
  } catch (const FilterError& e) {
    throw FusionError(e.what());
  }
}

}  // namespace

FusionWeights FusionWeights::uniform(int n_sensors) {
  FusionWeights fw;
  fw.w = Vec::Constant(n_sensors, 1.0 / n_sensors);
  return fw;
}

void FusionWeights::validate(int n_sensors) const {
  if (w.size() != n_sensors) {
    throw FusionError("weight vector length does not match sensor count");
  }
  double sum = 0.0;
  for (int i = 0; i < w.size(); ++i) {
    if (w(i) < 0.0) throw FusionError("fusion weights must be nonnegative");
    sum += w(i);
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw FusionError("fusion weights must sum to one");
  }
}

NoisyLocal inject_noise(const FilterState& local, const Mat& Sigma,
                        SubstreamRng& rng) {
  if (min_eigenvalue(Sigma) < -1e-10) {
    throw FusionError("injected noise covariance is not PSD");
  }
  NoisyLocal out;
  if (Sigma.isZero(0.0)) {
    out.x_bar = local.x_hat;
  } else {
    out.x_bar = local.x_hat +
                psd_sqrt(Sigma) * rng.gaussian_vector(
                                      static_cast<int>(local.x_hat.size()));
  }
  out.P_bar = local.P + Sigma;
  return out;
}

FusionResult ci_fuse(const std::vector<NoisyLocal>& locals,
                     const FusionWeights& weights) {
  if (locals.empty()) throw FusionError("ci_fuse needs at least one input");
  weights.validate(static_cast<int>(locals.size()));

  const int n = static_cast<int>(locals[0].x_bar.size());
  Mat info = Mat::Zero(n, n);
  Vec info_vec = Vec::Zero(n);
  bool any = false;
  for (std::size_t i = 0; i < locals.size(); ++i) {
    const double wi = weights.w(static_cast<int>(i));
    if (wi == 0.0) continue;
    any = true;
    const Mat P_bar_inv = guarded_inverse(
        locals[i].P_bar, "transmitted covariance P_bar[" + std::to_string(i) +
                             "]");
    info += wi * P_bar_inv;
    info_vec += wi * (P_bar_inv * locals[i].x_bar);
  }
  if (!any) throw FusionError("all effective fusion weights are zero");

  FusionResult out;
  out.P_fused = symmetrize(guarded_inverse(info, "fused information matrix"));
  out.x_fused = out.P_fused * info_vec;
  out.weights = weights;
  return out;
}

Mat accuracy_loss(const std::vector<Mat>& P_locals,
                  const std::vector<Mat>& Sigma_blocks,
                  const FusionWeights& weights, const Mat& P_fused,
                  const Mat& P_nonpriv) {
  if (P_locals.size() != Sigma_blocks.size()) {
    throw FusionError("accuracy_loss: one Sigma block per local covariance");
  }
  weights.validate(static_cast<int>(P_locals.size()));
  const int n = static_cast<int>(P_fused.rows());

  Mat middle = Mat::Zero(n, n);
  for (std::size_t i = 0; i < P_locals.size(); ++i) {
    const double wi = weights.w(static_cast<int>(i));
    if (wi == 0.0) continue;
    const Mat P_inv = guarded_inverse(P_locals[i],
                                      "local covariance P[" +
                                          std::to_string(i) + "]");
    const Mat sum_inv = guarded_inverse(
        P_locals[i] + Sigma_blocks[i],
        "inflated covariance P + Sigma[" + std::to_string(i) + "]");
    middle += wi * (P_inv * Sigma_blocks[i] * sum_inv);
  }
  const Mat delta_formula = P_fused * middle * P_nonpriv;
  const Mat delta_direct = P_fused - P_nonpriv;

  const double tol = 1e-8 * std::max(1.0, P_fused.norm());
  if ((delta_formula - delta_direct).norm() > tol) {
    std::ostringstream msg;
    msg << "accuracy-loss identity violated: formula and direct routes differ "
        << "by " << (delta_formula - delta_direct).norm() << " (Frobenius)";
    throw FusionError(msg.str());
  }
  return delta_formula;
}

bool feedback_adopts(const Mat& P_local, const Mat& P_fused) {
  return min_eigenvalue(P_local - P_fused) >= -1e-9;
}

FilterState feedback_update(const FilterState& local,
                            const FusionResult& fused) {
  if (!feedback_adopts(local.P, fused.P_fused)) return local;
  FilterState out = local;
  out.x_hat = fused.x_fused;
  out.P = fused.P_fused;
  return out;
}

namespace {

// Noise design for one step: solve the trace-minimization SDP, then verify
// the certificate; inflate by 1.5x until it certifies. With the calibrated
// eigenvalue floor the certificate holds at the solver output and the loop is
// a failsafe (it also covers the max-iterations case, where the best iterate
// is only used if it certifies).
void design_noise(const PrivacyParams& params, const SystemModel& model,
                  const PipelineOptions& options, StepPlan* sp,
                  std::vector<Mat>* warm) {
  const int M = model.n_sensors;
  if (sp->geometry.degenerate) {
    sp->Sigma.assign(static_cast<std::size_t>(M),
                     Mat::Zero(model.dim_x, model.dim_x));
    sp->certificate = certify(params, sp->geometry, sp->Sigma);
    return;
  }

  SdpProblem prob;
  prob.Upsilon = sp->geometry.Upsilon;
  prob.b = sp->geometry.b;
  prob.block_dims.assign(static_cast<std::size_t>(M), model.dim_x);
  prob.feasibility_tol = options.sdp_feasibility_tol;
  prob.objective_tol = options.sdp_objective_tol;
  prob.max_iters = options.sdp_max_iters;
  if (!warm->empty()) prob.warm_start = *warm;
  sp->sdp = solve_sdp(prob);
  if (sp->sdp.status == SdpStatus::kInfeasibleInput) {
    throw PrivacyError("noise design received non-finite inputs");
  }

  sp->Sigma = sp->sdp.Sigma_blocks;
  sp->certificate = certify(params, sp->geometry, sp->Sigma);
  if (!sp->certificate.holds) {
    double total = 0.0;
    for (const Mat& s : sp->Sigma) total += s.trace();
    if (total <= 1e-12 * std::max(1.0, sp->geometry.b)) {
      // Scaling cannot grow a vanishing iterate; start from the isotropic
      // floor, which satisfies the constraint outright.
      for (Mat& s : sp->Sigma) {
        s = sp->geometry.b * Mat::Identity(model.dim_x, model.dim_x);
      }
      sp->certificate = certify(params, sp->geometry, sp->Sigma);
    }
  }
  while (!sp->certificate.holds && sp->inflations < kMaxInflations) {
    for (Mat& s : sp->Sigma) s *= 1.5;
    sp->certificate = certify(params, sp->geometry, sp->Sigma);
    ++sp->inflations;
  }
  if (!sp->certificate.holds) {
    throw PrivacyError(
        "privacy certificate cannot be satisfied even after inflating the "
        "noise covariance 40 times");
  }
  *warm = sp->Sigma;
}

}  // namespace

FusionPlan build_plan(const SystemModel& model, Algorithm algorithm,
                      const PrivacyParams& params, const FusionWeights& weights,
                      int horizon, const PipelineOptions& options) {
  const int M = model.n_sensors;
  weights.validate(M);
  const bool private_noise =
      algorithm != Algorithm::kNonprivate && !options.force_zero_noise;
  if (private_noise) params.validate();

  FusionPlan plan;
  plan.algorithm = algorithm;
  plan.params = params;
  plan.weights = weights;
  plan.options = options;
  plan.steps.reserve(static_cast<std::size_t>(std::max(horizon, 0)));

  std::vector<Mat> P_prev(static_cast<std::size_t>(M), symmetrize(model.P0));
  std::vector<Mat> warm;

  for (int k = 1; k <= horizon; ++k) {
    StepPlan sp;
    sp.P_pred.resize(static_cast<std::size_t>(M));
    sp.P_local.resize(static_cast<std::size_t>(M));
    sp.gains.resize(static_cast<std::size_t>(M));
    sp.F.resize(static_cast<std::size_t>(M));

    const Mat& A = model.A(k - 1);
    const Mat& Q = model.Q(k - 1);
    const Mat& B = model.B(k - 1);
    for (int i = 0; i < M; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      sp.P_pred[si] = symmetrize(A * P_prev[si] * A.transpose() + Q);
      try {
        const CovarianceUpdate cov =
            covariance_update(sp.P_pred[si], model.C(i, k), model.R(i, k), B);
        sp.P_local[si] = cov.P;
        sp.gains[si] = cov.gain;
        sp.F[si] = cov.F;
      } catch (const FilterError& e) {
        throw FilterError("step " + std::to_string(k) + ", sensor " +
                          std::to_string(i) + ": " + e.what());
      }
    }

    if (private_noise) {
      std::vector<Mat> C_k(static_cast<std::size_t>(M));
      for (int i = 0; i < M; ++i) C_k[static_cast<std::size_t>(i)] = model.C(i, k);
      sp.geometry = compute_geometry(B, Q, C_k, sp.gains, params);
      design_noise(params, model, options, &sp, &warm);
    } else {
      sp.Sigma.assign(static_cast<std::size_t>(M),
                      Mat::Zero(model.dim_x, model.dim_x));
    }

    sp.Sigma_sqrt.resize(static_cast<std::size_t>(M));
    sp.P_bar.resize(static_cast<std::size_t>(M));
    sp.P_bar_inv.resize(static_cast<std::size_t>(M));
    Mat info = Mat::Zero(model.dim_x, model.dim_x);
    for (int i = 0; i < M; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      sp.Sigma_sqrt[si] = sp.Sigma[si].isZero(0.0)
                              ? Mat::Zero(model.dim_x, model.dim_x)
                              : psd_sqrt(sp.Sigma[si]);
      sp.P_bar[si] = symmetrize(sp.P_local[si] + sp.Sigma[si]);
      if (weights.w(i) > 0.0) {
        sp.P_bar_inv[si] = guarded_inverse(
            sp.P_bar[si],
            "transmitted covariance P_bar[" + std::to_string(i) + "]");
        info += weights.w(i) * sp.P_bar_inv[si];
      } else {
        sp.P_bar_inv[si] = Mat::Zero(model.dim_x, model.dim_x);
      }
    }
    sp.P_fused = symmetrize(guarded_inverse(info, "fused information matrix"));

    if (options.with_delta_p) {
      Mat info_np = Mat::Zero(model.dim_x, model.dim_x);
      for (int i = 0; i < M; ++i) {
        if (weights.w(i) == 0.0) continue;
        info_np += weights.w(i) *
                   guarded_inverse(sp.P_local[static_cast<std::size_t>(i)],
                                   "local covariance P[" + std::to_string(i) +
                                       "]");
      }
      sp.P_fused_nonpriv =
          symmetrize(guarded_inverse(info_np, "non-private fused information"));
      sp.delta_P = accuracy_loss(sp.P_local, sp.Sigma, weights, sp.P_fused,
                                 *sp.P_fused_nonpriv);
    }

    if (algorithm == Algorithm::kAlg2) {
      sp.adopt_fused.resize(static_cast<std::size_t>(M));
      sp.P_pre.resize(static_cast<std::size_t>(M));
      for (int i = 0; i < M; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        sp.adopt_fused[si] = feedback_adopts(sp.P_local[si], sp.P_fused);
        sp.P_pre[si] = sp.adopt_fused[si] ? sp.P_fused : sp.P_local[si];
      }
      P_prev = sp.P_pre;
    } else {
      P_prev = sp.P_local;
    }
    plan.steps.push_back(std::move(sp));
  }
  return plan;
}

std::vector<StepResult> run_with_plan(const SystemModel& model,
                                      const FusionPlan& plan,
                                      const Trajectory& truth) {
  const int M = model.n_sensors;
  const int horizon = static_cast<int>(plan.steps.size());
  if (static_cast<int>(truth.states.size()) < horizon + 1) {
    throw FusionError("trajectory is shorter than the plan horizon");
  }

  std::vector<StepResult> results;
  results.reserve(static_cast<std::size_t>(horizon));
  std::vector<Vec> x_prev(static_cast<std::size_t>(M), model.x0_mean);

  for (int k = 1; k <= horizon; ++k) {
    const StepPlan& sp = plan.steps[static_cast<std::size_t>(k - 1)];
    const Mat& A = model.A(k - 1);
    StepResult res;
    res.locals.resize(static_cast<std::size_t>(M));
    res.noisy.resize(static_cast<std::size_t>(M));
    res.certificate = sp.certificate;

    Vec info_vec = Vec::Zero(model.dim_x);
    for (int i = 0; i < M; ++i) {
      const std::size_t si = static_cast<std::size_t>(i);
      const Mat& C = model.C(i, k);
      const Vec& y =
          truth.measurements[si][static_cast<std::size_t>(k - 1)];

      FilterState& st = res.locals[si];
      st.x_pred = A * x_prev[si];
      st.P_pred = sp.P_pred[si];
      st.gain = sp.gains[si];
      st.innovation_cov = sp.F[si];
      st.x_hat = st.x_pred + sp.gains[si] * (y - C * st.x_pred);
      st.P = sp.P_local[si];

      NoisyLocal& nl = res.noisy[si];
      if (sp.Sigma[si].isZero(0.0)) {
        nl.x_bar = st.x_hat;
      } else {
        SubstreamRng rng(derive_key(truth.seed, 0,
                                    static_cast<std::uint64_t>(i),
                                    static_cast<std::uint64_t>(k),
                                    NoiseRole::kPrivacy));
        nl.x_bar = st.x_hat + sp.Sigma_sqrt[si] * rng.gaussian_vector(model.dim_x);
      }
      nl.P_bar = sp.P_bar[si];
      if (plan.weights.w(i) > 0.0) {
        info_vec += plan.weights.w(i) * (sp.P_bar_inv[si] * nl.x_bar);
      }
    }

    res.fused.x_fused = sp.P_fused * info_vec;
    res.fused.P_fused = sp.P_fused;
    res.fused.delta_P = sp.delta_P;
    res.fused.weights = plan.weights;

    if (plan.algorithm == Algorithm::kAlg2) {
      res.x_pre.resize(static_cast<std::size_t>(M));
      for (int i = 0; i < M; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        res.x_pre[si] =
            sp.adopt_fused[si] ? res.fused.x_fused : res.locals[si].x_hat;
        x_prev[si] = res.x_pre[si];
      }
    } else {
      for (int i = 0; i < M; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        x_prev[si] = res.locals[si].x_hat;
      }
    }
    results.push_back(std::move(res));
  }
  return results;
}

namespace {

AlgorithmOutput run_pipeline(const SystemModel& model, const InputSignal& input,
                             Algorithm algorithm, const PrivacyParams& params,
                             const FusionWeights& weights, int horizon,
                             std::uint64_t seed,
                             const PipelineOptions& options) {
  AlgorithmOutput out;
  out.plan = build_plan(model, algorithm, params, weights, horizon, options);
  out.truth = simulate(model, input, horizon, seed);
  out.steps = run_with_plan(model, out.plan, out.truth);
  return out;
}

}  // namespace

AlgorithmOutput run_algorithm_1(const SystemModel& model,
                                const InputSignal& input,
                                const PrivacyParams& params,
                                const FusionWeights& weights, int horizon,
                                std::uint64_t seed,
                                const PipelineOptions& options) {
  return run_pipeline(model, input, Algorithm::kAlg1, params, weights, horizon,
                      seed, options);
}

AlgorithmOutput run_algorithm_2(const SystemModel& model,
                                const InputSignal& input,
                                const PrivacyParams& params,
                                const FusionWeights& weights, int horizon,
                                std::uint64_t seed,
                                const PipelineOptions& options) {
  return run_pipeline(model, input, Algorithm::kAlg2, params, weights, horizon,
                      seed, options);
}

AlgorithmOutput run_nonprivate(const SystemModel& model,
                               const InputSignal& input,
                               const FusionWeights& weights, int horizon,
                               std::uint64_t seed,
                               const PipelineOptions& options) {
  return run_pipeline(model, input, Algorithm::kNonprivate, PrivacyParams{},
                      weights, horizon, seed, options);
}

}  // namespace dpfusion
