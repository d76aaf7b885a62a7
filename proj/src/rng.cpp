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

#include "dpfusion/rng.hpp"

#include <cmath>

namespace dpfusion {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t run,
                         std::uint64_t sensor, std::uint64_t step,
                         NoiseRole role) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (run + kGolden));
  h = splitmix64(h ^ (sensor + 2 * kGolden));
  h = splitmix64(h ^ (step + 3 * kGolden));
  h = splitmix64(h ^ static_cast<std::uint64_t>(role));
  return h;
}

std::uint64_t run_seed(std::uint64_t master_seed, std::uint64_t run) {
  return splitmix64(splitmix64(master_seed) ^ (run + kGolden));
}

double SubstreamRng::uniform() {
  // 53-bit mantissa, shifted into (0, 1] so log() below is always finite.
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double SubstreamRng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Vec SubstreamRng::gaussian_vector(int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = gaussian();
  return v;
}

}  // namespace dpfusion
