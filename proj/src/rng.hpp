// Copyright 2026 The PI-GPS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PIGPS_RNG_HPP_
#define PIGPS_RNG_HPP_

#include <cstdint>
#include <initializer_list>
#include <random>

#include "common.hpp"

namespace pigps {

// Seeded random stream. Uniforms take the top 53 bits of a mt19937_64 draw;
// normals use the Box-Muller transform with the sine branch cached. Both are
// spelled out here (rather than std::normal_distribution) so that streams are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform on [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double Uniform(double low, double high) {
    return low + (high - low) * Uniform();
  }

  double Normal();

  Vector NormalVector(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent child seed from a base seed and a list of tags
// (iteration, instance, sample...) with the splitmix64 finalizer.
uint64_t DeriveSeed(uint64_t base, std::initializer_list<uint64_t> tags);

}  // namespace pigps

#endif  // PIGPS_RNG_HPP_
