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

#ifndef QNM_ADVERSARY_ZOO_HPP
#define QNM_ADVERSARY_ZOO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "qnm/tamper_harness.hpp"

namespace qnm {

/// Permutation matrix |map(v)><v| on 2^bits basis states. Throws
/// InvalidParams when the map is not a bijection.
Matrix permutation_unitary(const ClassicalMap& map, unsigned bits);
/// Reads the classical map back from a permutation matrix (one 1 per column).
ClassicalMap classical_projection(const Matrix& u);

/// Named split-state strategies. Accepted forms:
///   identity
///   constant_replace(P)     P is a nonempty subset of XYZ, e.g. XY
///   pauli(Z:XZ)             Pauli string on Z (qubit 0 first)
///   pauli(X:5), pauli(Y:1)  xor mask on X or Y
///   swap_entangled          Z swapped with half of a shared EPR pair
///   haar_random(seed)
///   classical(f,g)          f on X and g on Y, each one of id, xor:k, add:k,
///                           mul:k (odd k), const:k, or perm:seed
///   classical_random(seed)  random permutations on X and Y
/// Unknown names throw ConfigError.
SplitAdversary make_split_adversary(const std::string& spec, const CodeParams& prm);

/// The catalogue used by the CLI and the acceptance run (Pauli strings are
/// sized to the message).
std::vector<std::string> split_zoo_names(const CodeParams& prm);

/// Threshold strategies for the quantum NMSS scheme, acting on parties 1..t:
///   identity
///   pauli_left(i:k)         qudit shift X^k on L_i
///   r_xor(i:m)              xor mask m on the packed right share of party i
///   haar_random(seed)
ThresholdAdversary make_threshold_adversary(const std::string& spec, const NmssParams& prm);

/// Leakage strategies for the 2-of-p LRSS scheme; every party outside T leaks:
///   constant                trivial leakage
///   parity                  parity of the packed share (1 bit)
///   teleport                each leaking party shares an EPR pair with the
///                           lowest party of T (a local |0> when T is
///                           empty), applies X^{lowest share bit} to its half
///                           and leaks that qubit
LeakageAdversary make_leakage_adversary(const std::string& spec, const std::vector<unsigned>& unauthorized,
                                        const LrssParams& prm);

}  // namespace qnm

#endif  // QNM_ADVERSARY_ZOO_HPP
