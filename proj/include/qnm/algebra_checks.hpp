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

#ifndef QNM_ALGEBRA_CHECKS_HPP
#define QNM_ALGEBRA_CHECKS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace qnm {

struct AlgebraCheck {
    std::string name;
    double residual = 0.0;   // Frobenius norm, or trace distance for "bound" checks
    double tolerance = 0.0;
    bool passed = false;
};

/// Exhaustive group-sum checks of the twirl and one-design identities on
/// \p qubits qubits (1 or 2): Pauli and subgroup twirls, the modified twirl
/// on purifications, uniform conjugation, one-design averages, the
/// transposed twirl of Pauli-shifted EPR pairs and its closed form for
/// arbitrary states. Random states come from \p seed.
std::vector<AlgebraCheck> verify_algebra(unsigned qubits, std::uint64_t seed, double tolerance = 1e-9);

}  // namespace qnm

#endif  // QNM_ALGEBRA_CHECKS_HPP
