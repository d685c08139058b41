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

#ifndef QNM_NMSS_HPP
#define QNM_NMSS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qnm/nmc.hpp"
#include "qnm/qmatrix.hpp"
#include "qnm/rng.hpp"
#include "qnm/secret_sharing.hpp"

namespace qnm {

// Threshold non-malleable secret sharing built from the split-state code.
//
// The codeword (X, Y, Z) is split as R := X (classical, shared with the
// 2-out-of-p leakage-resilient scheme over GF(2^ell)) and L := (Y, Z), which
// is embedded into left_qudits qudits of dimension left_q and shared with the
// quantum threshold scheme. Left basis index v = y 2^b + z; decoding maps any
// index beyond the embedded range to |0>.

inline constexpr const char* kLeftPrefix = "L";
inline constexpr const char* kLeftRegister = "L";

struct NmssParams {
    unsigned t = 3;
    unsigned p = 3;
    CodeParams code = CodeParams::make(1, 3, 1, 3, CodeMode::ExactUniformClifford);
    unsigned left_q = 5;
    unsigned left_qudits = 1;
    std::size_t lr_N = 1;
    /// Leakage budget in bits; must cover one left share.
    double ell_leak = 2.33;
    double epsilon = 0.5;

    /// t = p = 3, b = 1, ell = 3, delta = 1/3, one qudit of dimension 5.
    static NmssParams desk();

    /// 2^(|Y| + b): dimension of the left part before embedding.
    std::size_t left_dim() const;
    std::size_t left_capacity() const;  // left_q^left_qudits
    QShamirParams qshamir() const;
    /// Field GF(2^ell) carries X as one element per coordinate-0 symbol.
    LrssParams lrss() const;

    /// Checks the quantum variant (t >= 3, t <= p <= 2t - 1, capacities,
    /// leakage budget). In strict mode the LRSS share-size inequality must hold;
    /// otherwise a failure is returned as a warning.
    std::vector<std::string> validate(bool strict = false) const;
};

std::string left_share_label(unsigned party);

struct NmssShareSet {
    /// Registers L1..Lp followed by the message's external registers.
    Operator left;
    /// One packed classical share per party.
    std::vector<LrShare> right;
    std::optional<IdealTag> tag;
    std::string message_label;
};

/// |y><y| (x) z embedded into the left register and shared among p parties.
/// z carries the codeword register Z; the output has L1..Lp in place of Z.
Operator nmss_left_shares(const Operator& z_state, std::uint64_t y, const NmssParams& prm);

/// Maps the reconstructed left register to registers (Y, Z), sending
/// out-of-range basis states to |0>.
Operator nmss_decode_left(const Operator& rec, const NmssParams& prm);

/// Composition step: share a given codeword with given right shares.
NmssShareSet nmshare_from_codeword(const SplitStateCodeword& c, const NmssParams& prm, std::vector<LrShare> right);

/// enc, then qshare of (Y, Z), then lrshare_2p of X; randomness is drawn in
/// that order from rng.
NmssShareSet nmshare(const DensityOperator& sigma, const std::string& label, const NmssParams& prm, Rng& rng);

/// qrec on the first t parties of T, lrrec_2p on the two lowest parties of
/// T, then measurement of Y and decoding. Total on tampered inputs.
Operator nmrec(const NmssShareSet& shares, const std::vector<unsigned>& parties, const NmssParams& prm);

/// Exact ||joint(externals, S_T) - sigma_ext (x) zeta_{S_T}||_1 where zeta is
/// the same marginal for the maximally mixed message.
double nmss_privacy_distance(const DensityOperator& sigma, const std::string& label,
                             const std::vector<unsigned>& parties, const NmssParams& prm);

// ---------------------------------------------------------------------------
// Classical-message variant: Z is recorded as the index of the stabilizer
// state C_key |s> within the orbit of the basis states, and L = (Y, index) is
// shared with classical Shamir over the smallest prime exceeding both the
// number of left values and p. Any t <= p is accepted.

/// Distinct states C|s> (up to phase) over all keys and basis states s.
const std::vector<Vector>& classical_left_orbit(const CodeParams& code);
std::uint64_t classical_left_modulus(const NmssParams& prm);
void validate_classical(const NmssParams& prm);

struct NmssClassicalShares {
    std::vector<std::uint64_t> left;
    std::vector<LrShare> right;
    std::optional<IdealTag> tag;
};

NmssClassicalShares nmshare_classical(std::uint64_t s, const NmssParams& prm, Rng& rng);
/// Distribution of the decoded message over the 2^b basis values.
std::vector<double> nmrec_classical(const NmssClassicalShares& shares, const std::vector<unsigned>& parties,
                                    const NmssParams& prm);

}  // namespace qnm

#endif  // QNM_NMSS_HPP
