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

#ifndef QNM_TAMPER_HARNESS_HPP
#define QNM_TAMPER_HARNESS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qnm/nmc.hpp"
#include "qnm/nmss.hpp"
#include "qnm/qmatrix.hpp"
#include "qnm/secret_sharing.hpp"

namespace qnm {

/// Label of the purifying register used by the harness.
inline constexpr const char* kHatLabel = "Mh";

/// Quantum operation with a classical outcome: outcomes[k] holds the Kraus
/// operators of branch k, all square on the same space.
struct Instrument {
    std::vector<std::vector<Matrix>> outcomes;

    static Instrument identity(std::size_t dim);
    static Instrument unitary(const Matrix& u);
    /// One outcome realising the channel with the given Kraus operators.
    static Instrument channel(std::vector<Matrix> kraus);
    /// Outcome k has the single Kraus operator (<k| (x) I) U (|0> (x) I),
    /// with the outcome register leading; u acts on (K (x) system).
    static Instrument from_dilation(const Matrix& u, std::size_t outcomes, std::size_t dim);

    std::size_t num_outcomes() const { return outcomes.size(); }
    std::size_t dim() const;
    /// Throws InvalidState unless the Kraus operators have the given
    /// dimension and sum_k sum_j K^dagger K = I within 1e-10.
    void validate(std::size_t dim) const;
};

/// Image table of a map on a classical register; empty means identity.
using ClassicalMap = std::vector<std::uint64_t>;

/// Action of one tampering party: the classical value selects a class, the
/// class's instrument acts on the party's quantum registers, and the outcome
/// selects the map applied to the classical value.
///
/// Any unitary on (classical register (x) quantum registers) acts on a
/// classical input this way once the classical output is measured, with
/// classes = values and outcomes = output values; tables keep it compact.
struct TamperSide {
    std::vector<std::uint32_t> classes;  // empty: a single class
    std::vector<Instrument> instruments;  // one per class
    std::vector<ClassicalMap> maps;       // one per outcome; empty: identity

    std::size_t num_classes() const { return instruments.size(); }
    std::size_t num_outcomes() const;
    std::size_t class_of(std::uint64_t v) const;
    std::uint64_t apply(std::size_t outcome, std::uint64_t v) const;
    /// Checks table sizes over 2^bits values and instrument dimensions.
    void validate(unsigned bits, std::size_t quantum_dim) const;
};

/// Split-state adversary: side one holds X and W1, side two holds Y, Z and
/// W2 and acts on Z (x) W2 (Z leading).
struct SplitAdversary {
    std::string name;
    std::size_t w1_dim = 1;
    std::size_t w2_dim = 1;
    Vector shared_state;  // on W1 (x) W2; empty means |00>
    TamperSide side1;
    TamperSide side2;

    Vector shared() const;
    void validate(const CodeParams& prm) const;
};

struct PartyTamper {
    unsigned party = 1;
    std::size_t w_dim = 1;
    /// Classical part: packed right share; instruments act on L_i (x) W_i.
    TamperSide side;
};

struct ThresholdAdversary {
    std::string name;
    std::vector<PartyTamper> parties;  // the tampered authorized set
    Vector shared_state;               // on the W registers in party order; empty: |0..0>

    std::vector<unsigned> subset() const;
    Vector shared() const;
    void validate(const NmssParams& prm) const;
};

/// Bounded local leakage from the share of party j (and its entangled
/// register W_j) into Z_j, controlled by the class of the packed share.
struct LeakChannel {
    unsigned party = 2;
    std::size_t w_dim = 1;
    std::size_t z_dim = 2;
    std::vector<std::uint32_t> classes;       // by packed share; empty: one class
    std::vector<std::vector<Matrix>> kraus;   // per class, z_dim x w_dim
};

struct LeakageAdversary {
    std::string name;
    std::vector<unsigned> unauthorized;  // T, whose shares and W are kept
    std::vector<std::size_t> w_dims;     // one per party
    Vector shared_state;                 // on W_1 ... W_p; empty: |0..0>
    std::vector<LeakChannel> leaks;      // one per party outside T

    Vector shared() const;
    void validate(const LrssParams& prm) const;
};

struct Simulator {
    double p_same = 0.0;
    double p_epr = 0.0;
    double p_A = 0.0;
    Matrix gamma;  // on the message register
};

struct ExperimentResult {
    std::string adversary;
    Operator final_state;  // eta on the message and external registers
    Simulator simulator;
    double epsilon = 0.0;
};

/// Exact Dec((U (x) V)(Enc(sigma) (x) psi)(U (x) V)^dagger) as a mixture over
/// all (X, Y) and keys.
Operator run_nmc_experiment(const SplitAdversary& adv, const DensityOperator& sigma, const std::string& label,
                            const CodeParams& prm);

/// (p_A, gamma_A) from independent runs on the maximally entangled message:
/// p_same from the classical transition, p_epr = Tr(Pi theta_3^same) before
/// decoding, and gamma_A mixing U_M with the tampered branch of the run on U_Z.
Simulator build_simulator(const SplitAdversary& adv, const CodeParams& prm);

/// ||eta - (p_A sigma + (1 - p_A) gamma (x) sigma_ext)||_1.
double simulator_distance(const Operator& eta, const Simulator& sim, const DensityOperator& sigma,
                          const std::string& label);

ExperimentResult nm_check(const SplitAdversary& adv, const DensityOperator& sigma, const std::string& label,
                          const CodeParams& prm);

/// Per-branch comparison of the direct pipeline with the transposed and
/// delayed one at the maximally entangled message. Entry i of stage_deviation
/// is the largest entrywise deviation at stage i (0: input, 1: after the
/// Clifford / its transpose on Mh, 2: after tampering, 3: after decoding
/// against the delayed correction); final_deviation compares the aggregated
/// final states.
struct StageReport {
    std::array<double, 4> stage_deviation{};
    double final_deviation = 0.0;
    std::size_t branches = 0;
};
StageReport transpose_delay_check(const SplitAdversary& adv, const CodeParams& prm);

struct Rejection {
    double success_probability = 0.0;
    Operator state;  // normalized conditioned state
    Matrix kraus;    // acts on Mh
};
/// Conditions the final state of the maximally entangled run on the success
/// branch of K = (sqrt(target))^T / sqrt(lambda_max) on Mh.
Rejection rejection_condition(const DensityOperator& target, const Operator& average_final,
                              const std::string& label = "M");

/// Tampering experiment for the threshold scheme, with the simulator built by
/// the same message-free recipe on the composed pipeline.
ExperimentResult run_nmss_experiment(const ThresholdAdversary& adv, const DensityOperator& sigma,
                                     const std::string& label, const NmssParams& prm);
Simulator build_nmss_simulator(const ThresholdAdversary& adv, const NmssParams& prm);

struct LeakageReport {
    double distance = 0.0;
    std::size_t outcomes = 0;  // classical (S_T, class) cells enumerated
};
/// ||tau_{Mh S_T W_T Z} - sigma_Mh (x) gamma||_1 for a classical message with
/// the given law (Mh holds a copy), gamma from the uniform-message run.
LeakageReport run_leakage_experiment(const LeakageAdversary& adv, const std::vector<double>& message_law,
                                     const LrssParams& prm);
LeakageReport run_leakage_experiment(const LeakageAdversary& adv, GF2k::Elem s, const LrssParams& prm);

}  // namespace qnm

#endif  // QNM_TAMPER_HARNESS_HPP
