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

#ifndef DPFUSION_RNG_HPP
#define DPFUSION_RNG_HPP

#include <cstdint>
#include <random>

#include "dpfusion/linalg.hpp"

namespace dpfusion {

// Noise streams are split by role so that pipelines drawing different subsets
// of noises (e.g. with and without privacy noise) still observe identical
// values for the streams they share.
enum class NoiseRole : std::uint64_t {
  kInitialState = 1,
  kProcess = 2,
  kMeasurement = 3,
  kPrivacy = 4,
};

/// splitmix64 mixing step.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic substream key: the master seed absorbed with each field in
/// order through splitmix64.
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t run,
                         std::uint64_t sensor, std::uint64_t step,
                         NoiseRole role);

/// Per-run seed used by the harness (run index folded into the master seed).
std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t run);

// One independent Gaussian stream. Box-Muller over mt19937_64, so draws are
// reproducible for a given key independent of the standard library's
// distribution implementations.
class SubstreamRng {
 public:
  explicit SubstreamRng(std::uint64_t key) : engine_(key) {}

  /// Uniform double in (0, 1].
  double uniform();

  /// Standard normal draw.
  double gaussian();

  /// Vector of n independent standard normal draws.
  Vec gaussian_vector(int n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace dpfusion

#endif  // DPFUSION_RNG_HPP
