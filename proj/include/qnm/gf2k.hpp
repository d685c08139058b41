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

#pragma once

#include <cstdint>
#include <vector>

namespace qnm {

/// Binary extension field GF(2^k) for 1 <= k <= 16. Elements are integers in
/// [0, 2^k) holding polynomial-basis coefficients (bit i is the coefficient of
/// x^i). The modulus is a fixed primitive polynomial so that x generates the
/// multiplicative group; multiplication goes through exp/log tables.
class GF2k {
public:
    using Elem = std::uint32_t;

    explicit GF2k(unsigned k);

    unsigned degree() const { return k_; }
    std::uint32_t size() const { return 1u << k_; }
    /// The modulus with its leading bit, e.g. 0x13 for x^4 + x + 1.
    std::uint32_t modulus() const { return poly_; }

    static std::uint32_t default_modulus(unsigned k);

    Elem add(Elem a, Elem b) const { return a ^ b; }
    Elem mul(Elem a, Elem b) const;
    Elem inv(Elem a) const;  // throws InvalidParams on zero
    Elem div(Elem a, Elem b) const { return mul(a, inv(b)); }
    Elem pow(Elem a, std::uint64_t e) const;
    /// x^e for any integer e (negative exponents allowed).
    Elem alpha_pow(long long e) const;
    /// Absolute trace Tr(a) = a + a^2 + ... + a^(2^(k-1)), which lies in {0, 1}.
    Elem trace(Elem a) const;
    /// Inner product sum_i a_i b_i over the field.
    Elem dot(const std::vector<Elem>& a, const std::vector<Elem>& b) const;

private:
    void check(Elem a) const;

    unsigned k_;
    std::uint32_t poly_;
    std::vector<Elem> exp_;            // length 2 (2^k - 1)
    std::vector<std::uint32_t> log_;   // log_[0] unused
};

/// Shared immutable instance for GF(2^k), built on first use.
const GF2k& gf2k_field(unsigned k);

}  // namespace qnm
