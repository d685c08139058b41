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

#ifndef QNM_SECRET_SHARING_HPP
#define QNM_SECRET_SHARING_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qnm/extractors.hpp"
#include "qnm/gf2k.hpp"
#include "qnm/qmatrix.hpp"
#include "qnm/rng.hpp"

namespace qnm {

bool is_prime(std::uint64_t n);

// ---------------------------------------------------------------------------
// Quantum threshold sharing of qudits.

/// t-out-of-p sharing of b qudits of prime dimension q.
///
/// Each message qudit s is mapped to the uniform superposition over the
/// evaluation vectors (f(1), ..., f(2t-1)) mod q of the polynomials
/// f(x) = s x^{t-1} + c_{t-2} x^{t-2} + ... + c_0. Putting the secret in the
/// leading coefficient allows evaluation at 0 (point 2t-1 may be q), so
/// q >= 2t - 1 suffices and the qutrit scheme (t, p) = (2, 3) exists. When
/// p < 2t - 1 the last 2t-1-p shares of this base code are discarded.
struct QShamirParams {
    unsigned t = 2;
    unsigned p = 3;
    unsigned q = 3;
    unsigned b = 1;

    unsigned base_parties() const { return 2 * t - 1; }
    std::size_t share_dim() const;    // q^b
    std::size_t message_dim() const;  // q^b
    void validate() const;
};

/// Share register label for party i (1-based) with the given prefix.
std::string share_label(const std::string& prefix, unsigned i);

/// Encoding isometry of the base code, q^b -> (q^b)^{2t-1}, shares in order.
Matrix qshare_isometry(const QShamirParams& prm);

/// Shares the message register; the p share registers replace it in the
/// layout (prefix1 .. prefixp). Works on any operator, not only states.
Operator qshare(const Operator& sigma, const std::string& label, const QShamirParams& prm,
                const std::string& prefix = "S");
DensityOperator qshare(const DensityOperator& sigma, const std::string& label, const QShamirParams& prm,
                       const std::string& prefix = "S");

/// Reconstructs from the parties in T (at least t of them, 1-based). The
/// first t parties of T in increasing order are decoded by a permutation
/// unitary that moves the secret into the first of them; everything else of
/// the share system is traced out. The result holds the message register in
/// place of that share.
Operator qrec(const Operator& shares, const std::vector<unsigned>& parties, const std::string& label,
              const QShamirParams& prm, const std::string& prefix = "S");

// ---------------------------------------------------------------------------
// Classical Shamir over a prime field.

/// f(0) = s with t-1 uniform coefficients drawn in increasing degree; party
/// i receives f(i). Requires q prime, q > p, s < q.
std::vector<std::uint64_t> cshamir_share(std::uint64_t s, unsigned t, unsigned p, std::uint64_t q, Rng& rng);
/// Lagrange interpolation at 0 from the first t (party, value) pairs in
/// increasing party order.
std::uint64_t cshamir_rec(const std::vector<std::pair<unsigned, std::uint64_t>>& shares, unsigned t,
                          std::uint64_t q);

// ---------------------------------------------------------------------------
// Inner-product leakage-resilient sharing.

/// b-bit messages as elements of GF(2^b), shares in GF(2^b)^N.
struct LrssParams {
    unsigned b = 1;
    std::size_t N = 3;
    double ell_leak = 1.0;
    double epsilon = 0.5;
    unsigned p = 2;
};

struct LrssBound {
    double lhs = 0.0;  // N b
    double rhs = 0.0;  // 9b + 2 ell + 8 log2(1/eps) + 40 (+ 16 log2 p)
    bool satisfied = false;
};

/// Share-size inequality for the scheme with prm.p parties.
LrssBound lrss_bound(const LrssParams& prm);
/// Basic sanity checks, plus the share-size inequality when strict.
LrssBound validate_lrss(const LrssParams& prm, bool strict);

std::pair<FieldVector, FieldVector> lrshare2(GF2k::Elem s, const LrssParams& prm, Rng& rng);
GF2k::Elem lrrec2(const FieldVector& x, const FieldVector& y);

/// Share of party i: sub[j] = X^j_i, the half of the (i, j) sub-sharing.
struct LrShare {
    unsigned party = 0;
    std::map<unsigned, FieldVector> sub;
    /// Number of field elements, (p - 1) N.
    std::size_t symbols() const;
};

/// Independent 2-of-2 sharings for the pairs i < j in lexicographic order.
std::vector<LrShare> lrshare_2p(GF2k::Elem s, const LrssParams& prm, Rng& rng);
/// Uses the lexicographically first pair (i, j) among the given shares.
GF2k::Elem lrrec_2p(const std::vector<LrShare>& shares);

/// Exact distribution of lrshare2: every (x, y) with IP(x, y) = s, keyed by
/// (x bits, y bits), each with weight 1 / |IP^{-1}(s)|.
/// Bits of one packed party share, (p - 1) N b.
unsigned lr_share_bits(const LrssParams& prm);
/// Packs a party's sub-shares by ascending partner index, the lowest partner
/// in the most significant bits.
std::uint64_t pack_lr_share(const LrShare& share, const LrssParams& prm);
LrShare unpack_lr_share(std::uint64_t bits, unsigned party, const LrssParams& prm);

/// Exact law of the packed share tuple (one entry per party) for secret s.
/// Throws SizeLimitExceeded beyond 2^22 outcomes.
std::vector<std::pair<std::vector<std::uint64_t>, double>> lrshare_2p_law(GF2k::Elem s, const LrssParams& prm);

std::map<std::pair<std::uint64_t, std::uint64_t>, double> lrshare2_distribution(GF2k::Elem s, unsigned k,
                                                                                std::size_t n);
/// ||P_{share} - U||_1 for one share of lrshare2(s) (first = true: X).
double lrshare2_single_share_distance(GF2k::Elem s, unsigned k, std::size_t n, bool first);
/// The same distance with the message itself uniform.
double lrshare2_average_single_share_distance(unsigned k, std::size_t n, bool first);

struct HybridReport {
    double complement_distance = 0.0;  // other sub-sharings: real vs hybrid
    double independence_distance = 0.0;  // joint vs product of pair marginals
    double replaced_distance = 0.0;     // replaced pair: real vs uniform
    bool pass = false;
};

/// Exhaustive check, for a fixed message, that replacing the (i, j)
/// sub-sharing of lrshare_2p by fresh uniform vectors leaves the joint
/// distribution of all other sub-sharings unchanged. The joint is built
/// from the exact pair distributions; sizes must stay below 2^22 outcomes.
HybridReport lrss_hybrid_check(GF2k::Elem s, const LrssParams& prm, unsigned i, unsigned j);

}  // namespace qnm

#endif  // QNM_SECRET_SHARING_HPP
