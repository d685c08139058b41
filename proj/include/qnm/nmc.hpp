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

#ifndef QNM_NMC_HPP
#define QNM_NMC_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qnm/extractors.hpp"
#include "qnm/pauli_clifford.hpp"
#include "qnm/qmatrix.hpp"
#include "qnm/rng.hpp"

namespace qnm {

/// Where the Clifford key comes from.
///   Extractor: R = nmExt(X, Y).
///   Ideal:     R is fresh uniform randomness carried next to the codeword;
///              a decoder that sees the original (X, Y) recovers it, any
///              other (X, Y) yields an independent uniform key.
enum class KeySource { Extractor, Ideal };

/// How a key selects the Clifford.
///   Samp:         the keyed subgroup sampler (5b key bits).
///   ExactUniform: a uniform index into the enumerated subgroup.
enum class CliffordSampling { Samp, ExactUniform };

/// The three named operating modes.
enum class CodeMode { Real, IdealKey, ExactUniformClifford };

std::string to_string(CodeMode mode);
/// Accepts "real", "ideal-key" and "exact-uniform-clifford".
CodeMode parse_code_mode(const std::string& text);

/// Register label of the masked quantum part of a codeword.
inline constexpr const char* kCodewordZ = "Z";

/// Parameters of the split-state code.
///
/// The fraction delta = delta_num / delta_den is kept rational so that the
/// derived lengths are exact: |Y| = floor(delta ell) and the key length
/// r = floor((1/2 - delta) ell).
struct CodeParams {
    unsigned b = 1;
    unsigned ell = 14;
    unsigned delta_num = 1;
    unsigned delta_den = 7;
    KeySource key_source = KeySource::Ideal;
    CliffordSampling sampling = CliffordSampling::ExactUniform;
    /// Custom extractor; the poly-hash descriptor is used when empty.
    std::optional<NmExtDescriptor> nmext;

    static CodeParams make(unsigned b, unsigned ell, unsigned delta_num, unsigned delta_den, CodeMode mode);
    /// b = 1, ell = 14, delta = 1/7: 16 classical bits and r = 5.
    static CodeParams desk(CodeMode mode);

    CodeMode mode() const;
    double delta() const { return static_cast<double>(delta_num) / delta_den; }
    unsigned y_bits() const;
    unsigned r() const;
    /// Codeword length |X| + |Y| + |Z| in (qu)bits.
    unsigned n() const { return ell + y_bits() + b; }
    std::size_t message_dim() const { return std::size_t{1} << b; }

    /// The extractor in use (the custom one or the default poly hash).
    NmExtDescriptor extractor() const;

    /// Throws InvalidParams on inconsistent parameters, including r < 5b when
    /// keys come from the extractor.
    void validate() const;
};

/// Number of distinct keys: 2^{5b} for the sampler, |SC| for exact uniform.
std::uint64_t num_keys(const CodeParams& p);
/// Clifford selected by a key. Cached per (b, sampling).
const CliffordOp& key_clifford(const CodeParams& p, std::uint64_t key);
const Matrix& key_unitary(const CodeParams& p, std::uint64_t key);

/// Key derived from the extractor output: the low 5b bits of nmExt(x, y).
std::uint64_t extractor_key(const CodeParams& p, std::uint64_t x, std::uint64_t y);
/// extractor_key for every (x, y), indexed by (x << |Y|) | y.
std::vector<std::uint32_t> extractor_key_table(const CodeParams& p);

/// Exact distribution of the key over uniform (X, Y) (or the ideal key).
std::vector<double> key_distribution(const CodeParams& p);

struct IdealTag {
    std::uint64_t x = 0;
    std::uint64_t y = 0;
    std::uint64_t key = 0;
};

/// One sampled codeword. Part one is x; part two is (y, z). The quantum
/// part z keeps any external registers of the encoded state, with the
/// message register relabelled to Z.
struct SplitStateCodeword {
    std::uint64_t x = 0;
    std::uint64_t y = 0;
    Operator z;
    std::string message_label;
    std::optional<IdealTag> tag;
};

/// Samples X (ell bits), Y (|Y| bits) and, for the ideal source, the key
/// (in that order from rng), then masks the message with the key's Clifford.
SplitStateCodeword enc(const DensityOperator& sigma, const std::string& label, const CodeParams& p, Rng& rng);

/// Decodes with the key of (x, y). Never aborts: with the ideal source a
/// codeword whose (x, y) differs from the tag is decoded with a fresh
/// uniform key, i.e. averaged over all keys.
Operator dec(const SplitStateCodeword& c, const CodeParams& p);

/// Full mixture over the classical choices as one operator on
/// (X, Y[, K], Z, externals); K holds the ideal key. Limited to tiny
/// parameters (ell + |Y| <= 8).
Operator enc_exact(const DensityOperator& sigma, const std::string& label, const CodeParams& p);
/// Decodes every classical block of an enc_exact-shaped operator with the
/// key determined by its (X, Y) or K value, traces out the classical
/// registers and relabels Z.
Operator dec_exact(const Operator& codeword, const std::string& label, const CodeParams& p);

/// Average of C_k sigma C_k^dagger over the key distribution, i.e. the
/// quantum part of the code with X and Y traced out.
Operator enc_average(const DensityOperator& sigma, const std::string& label, const CodeParams& p);

enum class CodewordPart { X, YZ };

/// ||rho_{ext, part} - sigma_ext (x) zeta_part||_1 where ext are all
/// registers of sigma other than the message and zeta is the part marginal
/// obtained from encoding the maximally mixed message. Computed blockwise
/// over the classical values of the part.
double part_privacy_distance(const DensityOperator& sigma, const std::string& label, const CodeParams& p,
                             CodewordPart part);

struct RateRow {
    double delta = 0.0;
    double n_over_ell = 0.0;
    double b_max_over_ell = 0.0;
    double rate = 0.0;
};

/// n = (1 + delta + 1/10 + delta/5) ell and b_max = (1/2 - delta) ell / 5.
RateRow rate_row(double delta);
std::vector<RateRow> rate_table(const std::vector<double>& deltas);

}  // namespace qnm

#endif  // QNM_NMC_HPP
