// Copyright 2026 The qnmlab Authors
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

#ifndef QNM_RNG_HPP
#define QNM_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace qnm {

/// Seeded random stream with platform-independent derived distributions.
///
/// Only the raw 64-bit engine output of std::mt19937_64 is used; integer and
/// Gaussian draws are derived here so that a given seed produces the same
/// sequence with every standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform bit-string of the given length (at most 64 bits).
    std::uint64_t bits(unsigned count);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    /// Standard normal deviate (Box-Muller, one value per call).
    double normal();

    /// Complex Gaussian with independent N(0, 1/2) parts.
    std::complex<double> complex_normal();

    /// Derives an independent child seed, e.g. one per adversary.
    std::uint64_t fork_seed() { return next_u64() ^ 0x9e3779b97f4a7c15ULL; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace qnm

#endif  // QNM_RNG_HPP
