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
#include <memory>
#include <string>
#include <vector>

#include "qnm/qmatrix.hpp"
#include "qnm/rng.hpp"

namespace qnm {

/// Largest qubit count for which dense matrices are produced.
inline constexpr unsigned kMaxDenseQubits = 12;
/// Largest qubit count for symbolic Pauli and Clifford operators.
inline constexpr unsigned kMaxSymbolicQubits = 32;

/// n-qubit Pauli operator i^phase X^x Z^z.
///
/// Bit i of the x and z masks refers to bit i of the computational basis
/// index, so with the usual big-endian register convention qubit q (q = 0 is
/// the leftmost tensor factor and the leftmost character in text form) lives
/// at bit n - 1 - q.
struct PauliOp {
    unsigned n = 0;
    std::uint64_t x = 0;
    std::uint64_t z = 0;
    unsigned phase = 0;  // exponent of i, mod 4

    static PauliOp identity(unsigned n);
    /// Hermitian Pauli with the given masks (product of +X, +Y, +Z factors).
    static PauliOp hermitian(unsigned n, std::uint64_t x, std::uint64_t z);
    /// The Hermitian Pauli with index x | (z << n); see all_paulis().
    static PauliOp from_index(unsigned n, std::uint64_t index);
    /// Parses text such as "XIZ", "-XY", "iZ" or "-iYY".
    static PauliOp parse(const std::string& text);
    std::string to_string() const;

    std::uint64_t index() const { return x | (z << n); }
    bool is_identity_up_to_phase() const { return x == 0 && z == 0; }
    bool equal_up_to_phase(const PauliOp& o) const { return n == o.n && x == o.x && z == o.z; }
    bool commutes_with(const PauliOp& o) const;
    bool is_hermitian() const;
    PauliOp adjoint() const;
    PauliOp times_phase(unsigned k) const;

    bool operator==(const PauliOp& o) const {
        return n == o.n && x == o.x && z == o.z && phase % 4 == o.phase % 4;
    }
};

PauliOp operator*(const PauliOp& a, const PauliOp& b);

/// All 4^n Hermitian Paulis in index order (I first).
std::vector<PauliOp> all_paulis(unsigned n);

Matrix pauli_dense(const PauliOp& p);
/// Applies the Pauli to a state vector in O(2^n).
Vector pauli_apply(const PauliOp& p, const Vector& v);

struct PauliTerm {
    PauliOp pauli;  // Hermitian representative
    cplx coefficient;
};

/// Expansion M = sum alpha_P P over Hermitian Paulis with alpha_P =
/// Tr(P^dagger M) / 2^n. Terms with |alpha| <= drop_below are omitted.
std::vector<PauliTerm> pauli_decompose(const Matrix& m, double drop_below = 1e-14);
Matrix pauli_recompose(const std::vector<PauliTerm>& terms, unsigned n);

/// Clifford unitary stored by the images C G C^dagger of the generators
/// G = X_i, Z_i (bit i as in PauliOp). Equality of two CliffordOps means
/// equality up to a global phase. The dense unitary is built on first use
/// and shared between copies.
class CliffordOp {
public:
    CliffordOp(unsigned n, std::vector<PauliOp> x_images, std::vector<PauliOp> z_images);

    static CliffordOp identity(unsigned n);
    static CliffordOp from_pauli(const PauliOp& p);
    static CliffordOp hadamard(unsigned n, unsigned qubit);
    static CliffordOp phase_s(unsigned n, unsigned qubit);
    static CliffordOp cnot(unsigned n, unsigned control, unsigned target);
    /// Product of depth random H, S and CNOT gates.
    static CliffordOp random(unsigned n, unsigned depth, Rng& rng);

    unsigned num_qubits() const { return n_; }
    const std::vector<PauliOp>& x_images() const { return x_img_; }
    const std::vector<PauliOp>& z_images() const { return z_img_; }

    /// Symplectic matrix over GF(2): column j is the (x | z) bit vector of the
    /// image of generator j, generators ordered X_0..X_{n-1}, Z_0..Z_{n-1}.
    std::vector<std::vector<std::uint8_t>> symplectic() const;
    /// Phases of the generator images (mod 4), same order as symplectic().
    std::vector<unsigned> phase_vector() const;

    /// C P C^dagger.
    PauliOp conjugate(const PauliOp& p) const;
    /// C^dagger P C.
    PauliOp conjugate_inverse(const PauliOp& p) const;
    CliffordOp inverse() const;

    /// Dense unitary, defined up to a global phase.
    const Matrix& dense() const;

    bool operator==(const CliffordOp& o) const { return x_img_ == o.x_img_ && z_img_ == o.z_img_; }
    /// Total order on descriptions, usable as a map key.
    bool operator<(const CliffordOp& o) const { return signature() < o.signature(); }
    std::vector<std::uint64_t> signature() const;

private:
    struct DenseCache;
    unsigned n_;
    std::vector<PauliOp> x_img_, z_img_;
    std::shared_ptr<DenseCache> cache_;
};

/// Operator product: (a * b) acts as b first, then a.
CliffordOp operator*(const CliffordOp& a, const CliffordOp& b);

Matrix clifford_dense(const CliffordOp& c);

/// Key for the keyed sampler of the special Clifford subgroup SC on b qubits;
/// exactly 5b bits are used (b <= 12).
///
/// Layout (bit i is (bits >> i) & 1):
///   [0, b)     x mask of the Pauli part
///   [b, 2b)    z mask of the Pauli part
///   [2b, 3b)   a: first column entry of the SL2 matrix
///   [3b, 4b)   c: second first-column entry; (a, c) = (0, 0) is read as (1, 0)
///   [4b, 5b)   t: selects the second column among the q completions
struct SubCliffordKey {
    unsigned b = 0;
    std::uint64_t bits = 0;
    SubCliffordKey(unsigned b, std::uint64_t bits);
    unsigned length() const { return 5 * b; }
};

/// Number of elements 2^{5b} - 2^{3b}.
std::uint64_t sc_size(unsigned b);
/// Deterministic sampler: the element Pauli(x, z) * C_S with S the SL2
/// matrix [[a, beta], [c, d]] over GF(2^b). The all-zero key yields the
/// identity.
CliffordOp sc_samp(const SubCliffordKey& key);
/// Element number i of the subgroup in enumeration order, i < sc_size(b).
CliffordOp sc_element(unsigned b, std::uint64_t i);
/// All elements, in enumeration order (b <= 2).
std::vector<CliffordOp> sc_enumerate(unsigned b);
/// All 4^n Paulis as Clifford operators.
std::vector<CliffordOp> pauli_group(unsigned n);
/// Dense unitaries for a list of Clifford operators.
std::vector<Matrix> dense_group(const std::vector<CliffordOp>& group);

/// (1/|G|) sum_G (G (x) I) M (G^dagger (x) I), G acting on targets.
Operator group_twirl(const Operator& m, const std::vector<std::string>& targets, const std::vector<Matrix>& group);

/// sum_C (C^dagger P C) rho (C^dagger Q^dagger C) where rho lives on the
/// register the Paulis act on.
Matrix twirl_cross_term(const PauliOp& p, const PauliOp& q, const Matrix& rho, const std::vector<CliffordOp>& group);
/// sum_C (I (x) C^dagger P C) rho (I (x) C^dagger Q C) with the Paulis acting
/// on the target registers of rho.
Operator modified_twirl_cross_term(const PauliOp& p, const PauliOp& q, const Operator& rho,
                                   const std::vector<std::string>& targets, const std::vector<CliffordOp>& group);
/// (1/|G|) sum_C C P C^dagger.
Matrix uniform_conjugation(const PauliOp& p, const std::vector<CliffordOp>& group);

struct EprTwirl {
    double p_epr = 0.0;       // Tr(Pi rho)
    Matrix twirled;           // exact group average
    Matrix closed_form;       // p psi + (1 - p) (I - psi) / (4^b - 1)
    double closed_form_residual = 0.0;  // Frobenius norm of the difference
    double mixture_distance = 0.0;      // ||twirled - (p psi + (1 - p) U (x) U)||_1
};

/// Averages (C^T (x) C^dagger) rho (C^T (x) C^dagger)^dagger over the group,
/// where rho lives on (hat, a) in that register order; both registers must
/// have dimension 2^b and the default group is SC(b).
EprTwirl epr_twirl_decomposition(const DensityOperator& rho, const std::string& hat, const std::string& a);
EprTwirl epr_twirl_decomposition(const DensityOperator& rho, const std::string& hat, const std::string& a,
                                 const std::vector<CliffordOp>& group);

}  // namespace qnm
