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

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <map>

#include "qnm/adversary_zoo.hpp"
#include "qnm/errors.hpp"
#include "qnm/pauli_clifford.hpp"
#include "qnm/tamper_harness.hpp"

using namespace qnm;

namespace {

DensityOperator purified(const Matrix& rho) {
    return canonical_purification(DensityOperator(rho, RegisterLayout{{"M", 2}}), kHatLabel).density();
}

DensityOperator epr_message() { return purified(Matrix::Identity(2, 2) / 2.0); }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix uu() { return Matrix::Identity(4, 4) / 4.0; }

Matrix epr() {
    const Vector phi = max_entangled(2);
    return phi * phi.adjoint();
}

}  // namespace

TEST(SplitExperiment, IdentityLeavesStateUnchanged) {
    Rng rng(11);
    const DensityOperator sigma = purified(random_density(2, 2, rng));
    for (auto mode : {CodeMode::ExactUniformClifford, CodeMode::IdealKey, CodeMode::Real}) {
        const auto prm = CodeParams::desk(mode);
        const auto adv = make_split_adversary("identity", prm);
        const auto res = nm_check(adv, sigma, "M", prm);
        EXPECT_LT(max_abs(res.final_state.matrix - sigma.matrix()), 1e-10) << to_string(mode);
        EXPECT_NEAR(res.simulator.p_same, 1.0, 1e-12);
        EXPECT_NEAR(res.simulator.p_epr, 1.0, 1e-12);
        EXPECT_NEAR(res.simulator.p_A, 1.0, 1e-12);
        EXPECT_LT(res.epsilon, 1e-8);
    }
}

TEST(SplitExperiment, ConstantReplaceHasSingleCoincidence) {
    for (auto mode : {CodeMode::ExactUniformClifford, CodeMode::Real}) {
        const auto prm = CodeParams::desk(mode);
        const auto sim = build_simulator(make_split_adversary("constant_replace(XYZ)", prm), prm);
        EXPECT_NEAR(sim.p_same, std::ldexp(1.0, -static_cast<int>(prm.ell + prm.y_bits())), 1e-15);
    }
}

TEST(SplitExperiment, PauliXOnZMatchesCliffordSum) {
    const auto prm = CodeParams::desk(CodeMode::ExactUniformClifford);
    const auto adv = make_split_adversary("pauli(Z:X)", prm);
    const DensityOperator sigma = epr_message();
    const auto res = nm_check(adv, sigma, "M", prm);

    // Direct average of (C^dag X C) over the subgroup, acting on the EPR pair.
    const auto group = sc_enumerate(1);
    ASSERT_EQ(group.size(), 24u);
    const Matrix x = pauli_dense(PauliOp::parse("X"));
    Matrix oracle = Matrix::Zero(4, 4);
    for (const auto& c : group) {
        const Matrix u = clifford_dense(c);
        const Matrix a = kron(Matrix(u.adjoint() * x * u), Matrix(Matrix::Identity(2, 2)));
        oracle += a * epr() * a.adjoint() / 24.0;
    }
    EXPECT_LT(max_abs(oracle - (4.0 * uu() - epr()) / 3.0), 1e-12);
    EXPECT_LT(max_abs(res.final_state.matrix - oracle), 1e-10);
    EXPECT_NEAR(res.simulator.p_same, 1.0, 1e-12);
    EXPECT_NEAR(res.simulator.p_epr, 0.0, 1e-12);
    EXPECT_NEAR(res.epsilon, 0.5, 1e-10);
}

TEST(SplitExperiment, HatMarginalIsUntouched) {
    Rng rng(5);
    const DensityOperator sigma = purified(random_density(2, 2, rng));
    const Operator hat = marginal(sigma.op(), {kHatLabel});
    for (auto mode : {CodeMode::ExactUniformClifford, CodeMode::Real}) {
        const auto prm = CodeParams::desk(mode);
        for (const auto& name : split_zoo_names(prm)) {
            const Operator eta = run_nmc_experiment(make_split_adversary(name, prm), sigma, "M", prm);
            EXPECT_NEAR(eta.matrix.trace().real(), 1.0, 1e-10) << name;
            EXPECT_LT(max_abs(marginal(eta, {kHatLabel}).matrix - hat.matrix), 1e-10) << name;
        }
    }
}

TEST(SplitExperiment, ZOnlyTamperingKeepsClassicalParts) {
    const auto prm = CodeParams::desk(CodeMode::ExactUniformClifford);
    Rng rng(21);
    SplitAdversary adv;
    adv.name = "z_only";
    adv.w1_dim = 2;
    adv.w2_dim = 2;
    adv.shared_state = haar_state(4, rng);
    adv.side1.instruments = {Instrument::unitary(haar_unitary(2, rng))};
    adv.side2.instruments = {Instrument::unitary(haar_unitary(4, rng))};
    const auto sim = build_simulator(adv, prm);
    EXPECT_NEAR(sim.p_same, 1.0, 1e-12);
    EXPECT_NEAR(sim.p_A, sim.p_epr, 1e-12);
    EXPECT_GE(sim.p_epr, 0.0);
    EXPECT_LE(sim.p_epr, 1.0);
}

TEST(SplitExperiment, SimulatorIgnoresMessage) {
    const auto prm = CodeParams::desk(CodeMode::Real);
    const auto adv = make_split_adversary("haar_random(3)", prm);
    Rng rng(8);
    const auto a = nm_check(adv, purified(random_density(2, 2, rng)), "M", prm);
    const auto b = nm_check(adv, purified(random_density(2, 1, rng)), "M", prm);
    const auto c = build_simulator(adv, prm);
    EXPECT_EQ(a.simulator.p_A, b.simulator.p_A);
    EXPECT_EQ(a.simulator.p_A, c.p_A);
    EXPECT_TRUE(a.simulator.gamma == b.simulator.gamma);
    EXPECT_TRUE(a.simulator.gamma == c.gamma);
    EXPECT_NEAR(c.gamma.trace().real(), 1.0, 1e-10);
}

TEST(SplitExperiment, ClassicalAdversariesMeetResidual) {
    const auto prm = CodeParams::desk(CodeMode::ExactUniformClifford);
    const DensityOperator sigma = epr_message();
    for (const std::string name : {"classical(xor:1,add:1)", "classical(mul:3,id)", "classical_random(4)",
                                   "classical(const:0,const:3)", "pauli(X:9)"}) {
        const auto res = nm_check(make_split_adversary(name, prm), sigma, "M", prm);
        EXPECT_LE(res.epsilon, 0.5 + 1e-8) << name;
    }
}

TEST(StageCheck, TransposedPipelineAgrees) {
    for (auto mode : {CodeMode::ExactUniformClifford, CodeMode::Real}) {
        const auto prm = CodeParams::desk(mode);
        for (const std::string name : {"haar_random(1)", "swap_entangled", "pauli(Z:Y)"}) {
            const auto rep = transpose_delay_check(make_split_adversary(name, prm), prm);
            for (double dev : rep.stage_deviation) EXPECT_LT(dev, 1e-10) << name;
            EXPECT_LT(rep.final_deviation, 1e-10) << name;
            EXPECT_GT(rep.branches, 0u);
        }
    }
}

TEST(Rejection, UniformTargetIsFree) {
    const auto prm = CodeParams::desk(CodeMode::ExactUniformClifford);
    const auto adv = make_split_adversary("haar_random(2)", prm);
    const Operator avg = run_nmc_experiment(adv, epr_message(), "M", prm);
    const auto rej = rejection_condition(DensityOperator::maximally_mixed(RegisterLayout{{"M", 2}}), avg);
    EXPECT_NEAR(rej.success_probability, 1.0, 1e-12);
    EXPECT_LT(max_abs(rej.state.matrix - avg.matrix), 1e-12);
}

TEST(Rejection, ReproducesDirectRuns) {
    const auto prm = CodeParams::desk(CodeMode::Real);
    Rng rng(31);
    for (const std::string name : {"haar_random(5)", "swap_entangled"}) {
        const auto adv = make_split_adversary(name, prm);
        const Operator avg = run_nmc_experiment(adv, epr_message(), "M", prm);
        for (std::size_t rank : {1u, 2u}) {
            const DensityOperator target(random_density(2, rank, rng), RegisterLayout{{"M", 2}});
            const auto rej = rejection_condition(target, avg);
            const Operator direct = run_nmc_experiment(adv, purified(target.matrix()), "M", prm);
            EXPECT_LT(max_abs(rej.state.matrix - direct.matrix), 1e-9) << name;
            EXPECT_GE(rej.success_probability, 0.5 - 1e-12);
            if (rank == 1) EXPECT_NEAR(rej.success_probability, 0.5, 1e-10);
        }
    }
}

TEST(Rejection, AverageToWorstFactor) {
    const auto prm = CodeParams::desk(CodeMode::ExactUniformClifford);
    Rng rng(77);
    for (int seed = 1; seed <= 3; ++seed) {
        const auto adv = make_split_adversary("haar_random(" + std::to_string(seed) + ")", prm);
        const auto avg = nm_check(adv, epr_message(), "M", prm);
        for (int m = 0; m < 2; ++m) {
            const Vector psi = haar_state(2, rng);
            const DensityOperator pure(psi * psi.adjoint(), RegisterLayout{{"M", 2}});
            const auto worst = nm_check(adv, pure, "M", prm);
            EXPECT_LE(worst.epsilon, 2.0 * avg.epsilon + 1e-8);
        }
    }
}

TEST(Rejection, RejectsShapeMismatch) {
    const auto prm = CodeParams::desk(CodeMode::ExactUniformClifford);
    const Operator avg = run_nmc_experiment(make_split_adversary("identity", prm), epr_message(), "M", prm);
    EXPECT_THROW(rejection_condition(DensityOperator::maximally_mixed(RegisterLayout{{"M", 4}}), avg),
                 DimensionMismatch);
}

TEST(Zoo, ClassicalMapsLiftToPermutations) {
    const auto prm = CodeParams::make(1, 6, 1, 3, CodeMode::ExactUniformClifford);
    const auto adv = make_split_adversary("classical(xor:5,add:3)", prm);
    const auto& f = adv.side1.maps.at(0);
    const auto& g = adv.side2.maps.at(0);
    for (std::uint64_t v = 0; v < f.size(); ++v) EXPECT_EQ(f[v], v ^ 5);
    for (std::uint64_t v = 0; v < g.size(); ++v) EXPECT_EQ(g[v], (v + 3) % 4);
    const Matrix uf = permutation_unitary(f, prm.ell);
    EXPECT_LT(max_abs(uf.adjoint() * uf - Matrix::Identity(uf.rows(), uf.cols())), 1e-15);
    EXPECT_EQ(classical_projection(uf), f);
    EXPECT_EQ(classical_projection(permutation_unitary(g, prm.y_bits())), g);
    EXPECT_THROW(permutation_unitary(ClassicalMap{0, 0}, 1), InvalidParams);
}

TEST(Zoo, HaarIsDeterministicPerSeed) {
    const auto prm = CodeParams::desk(CodeMode::Real);
    const auto a = make_split_adversary("haar_random(9)", prm);
    const auto b = make_split_adversary("haar_random(9)", prm);
    const auto c = make_split_adversary("haar_random(10)", prm);
    EXPECT_TRUE(a.shared_state == b.shared_state);
    EXPECT_TRUE(a.side2.instruments[0].outcomes[0][0] == b.side2.instruments[0].outcomes[0][0]);
    EXPECT_FALSE(a.shared_state == c.shared_state);
}

TEST(Zoo, IdentityIsTrivial) {
    const auto prm = CodeParams::desk(CodeMode::Real);
    const auto adv = make_split_adversary("identity", prm);
    EXPECT_EQ(adv.w1_dim, 1u);
    EXPECT_EQ(adv.w2_dim, 1u);
    EXPECT_TRUE(adv.side2.instruments[0].outcomes[0][0] == Matrix::Identity(2, 2));
}

TEST(Zoo, RejectsUnknownAndMalformed) {
    const auto prm = CodeParams::desk(CodeMode::Real);
    for (const std::string bad : {"teleport", "pauli(Q:1)", "pauli(Z:XX)", "classical(mul:2,id)",
                                  "constant_replace()", "haar_random(x)", "identity(3)"})
        EXPECT_THROW(make_split_adversary(bad, prm), ConfigError) << bad;
    const auto nm = NmssParams::desk();
    EXPECT_THROW(make_threshold_adversary("swap", nm), ConfigError);
    EXPECT_THROW(make_threshold_adversary("pauli_left(4:1)", nm), ConfigError);
    LrssParams lp;
    EXPECT_THROW(make_leakage_adversary("everything", {1}, lp), ConfigError);
}

TEST(Zoo, AdversaryValidation) {
    const auto prm = CodeParams::desk(CodeMode::Real);
    auto adv = make_split_adversary("identity", prm);
    adv.side2.instruments = {Instrument::unitary(Matrix::Identity(2, 2) * 2.0)};
    EXPECT_THROW(adv.validate(prm), InvalidState);
    adv = make_split_adversary("identity", prm);
    adv.side1.maps = {ClassicalMap(3, 0)};
    EXPECT_THROW(adv.validate(prm), DimensionMismatch);
}

// ------------------------------------------------------------------ NMSS

namespace {

// Direct pipeline: explicit share sets through nmrec, grouped by the
// tampered right-share outcome.
Operator nmss_rxor_oracle(const DensityOperator& sigma, const NmssParams& prm, unsigned party, std::uint64_t mask) {
    const CodeParams& code = prm.code;
    const LrssParams lp = prm.lrss();
    const std::size_t nx = std::size_t{1} << code.ell, ny = std::size_t{1} << code.y_bits();
    const auto kd = key_distribution(code);
    const std::vector<unsigned> T{1, 2, 3};
    Operator acc(Matrix::Zero(2, 2), sigma.layout());
    for (std::size_t x = 0; x < nx; ++x) {
        std::map<std::uint64_t, std::pair<std::vector<std::uint64_t>, double>> by_x;
        for (auto [tuple, w] : lrshare_2p_law(static_cast<GF2k::Elem>(x), lp)) {
            tuple[party - 1] ^= mask;
            std::vector<LrShare> right;
            for (unsigned i = 1; i <= prm.p; ++i) right.push_back(unpack_lr_share(tuple[i - 1], i, lp));
            const std::uint64_t xp = lrrec_2p(right);
            auto& slot = by_x[xp];
            if (slot.first.empty()) slot.first = tuple;
            slot.second += w;
        }
        for (std::size_t y = 0; y < ny; ++y)
            for (std::uint64_t r = 0; r < num_keys(code); ++r) {
                SplitStateCodeword c;
                c.x = x;
                c.y = y;
                c.z = conjugate_local(sigma.op(), {"M"}, key_unitary(code, r));
                c.z.layout = c.z.layout.renamed("M", kCodewordZ);
                c.message_label = "M";
                c.tag = IdealTag{x, y, r};
                for (const auto& [xp, rep] : by_x) {
                    std::vector<LrShare> right;
                    for (unsigned i = 1; i <= prm.p; ++i) right.push_back(unpack_lr_share(rep.first[i - 1], i, lp));
                    const auto shares = nmshare_from_codeword(c, prm, right);
                    acc.matrix += rep.second * kd[r] / static_cast<double>(nx * ny) * nmrec(shares, T, prm).matrix;
                }
            }
    }
    return acc;
}

}  // namespace

TEST(NmssExperiment, IdentityIsNonMalleableTrivially) {
    const auto prm = NmssParams::desk();
    const auto res = run_nmss_experiment(make_threshold_adversary("identity", prm), epr_message(), "M", prm);
    EXPECT_LT(max_abs(res.final_state.matrix - epr_message().matrix()), 1e-8);
    EXPECT_NEAR(res.simulator.p_A, 1.0, 1e-10);
    EXPECT_LT(res.epsilon, 1e-7);
}

TEST(NmssExperiment, RightShareTamperingMatchesDirectPipeline) {
    const auto prm = NmssParams::desk();
    Rng rng(4);
    const DensityOperator sigma(random_density(2, 2, rng), RegisterLayout{{"M", 2}});
    const auto adv = make_threshold_adversary("r_xor(1:8)", prm);
    const auto res = run_nmss_experiment(adv, sigma, "M", prm);
    const Operator oracle = nmss_rxor_oracle(sigma, prm, 1, 8);
    EXPECT_LT(max_abs(res.final_state.matrix - oracle.matrix), 1e-10);
    EXPECT_LT(res.simulator.p_same, 1.0);
}

TEST(NmssExperiment, LeftPauliIsReproducible) {
    const auto prm = NmssParams::desk();
    const auto adv = make_threshold_adversary("pauli_left(2:1)", prm);
    const auto a = run_nmss_experiment(adv, epr_message(), "M", prm);
    const auto b = run_nmss_experiment(adv, epr_message(), "M", prm);
    EXPECT_EQ(a.epsilon, b.epsilon);
    EXPECT_TRUE(a.final_state.matrix == b.final_state.matrix);
    EXPECT_NEAR(a.final_state.matrix.trace().real(), 1.0, 1e-10);
    EXPECT_LT(max_abs(marginal(a.final_state, {kHatLabel}).matrix - Matrix::Identity(2, 2) / 2.0), 1e-10);
}

TEST(NmssExperiment, ThresholdValidation) {
    const auto prm = NmssParams::desk();
    auto adv = make_threshold_adversary("identity", prm);
    adv.parties.pop_back();
    EXPECT_THROW(adv.validate(prm), InvalidParams);
}

// --------------------------------------------------------------- leakage

TEST(Leakage, ConstantLeakageRevealsNothing) {
    LrssParams lp;
    const auto adv = make_leakage_adversary("constant", {}, lp);
    EXPECT_LT(run_leakage_experiment(adv, GF2k::Elem{1}, lp).distance, 1e-12);
    EXPECT_LT(run_leakage_experiment(adv, std::vector<double>{0.5, 0.5}, lp).distance, 1e-12);
}

TEST(Leakage, ConstantLeakageKeepsShareBias) {
    // With T = {1} the kept share x carries the statistical privacy error of
    // the inner-product sharing: P(x | s = 1) = 1/7 on nonzero x, P(x | s = 0)
    // puts 8/36 on x = 0 and 1/9 elsewhere; both sit 2/9 from their average.
    LrssParams lp;
    const auto adv = make_leakage_adversary("constant", {1}, lp);
    EXPECT_NEAR(run_leakage_experiment(adv, GF2k::Elem{0}, lp).distance, 2.0 / 9.0, 1e-12);
    EXPECT_NEAR(run_leakage_experiment(adv, GF2k::Elem{1}, lp).distance, 2.0 / 9.0, 1e-12);
}

TEST(Leakage, ParityMatchesEnumeration) {
    LrssParams lp;  // q = 2, N = 3, two parties
    const auto adv = make_leakage_adversary("parity", {1}, lp);
    // P_s(x, parity(y)) over IP^{-1}(s), and the uniform-secret mixture.
    std::map<std::pair<int, int>, double> p[2];
    for (int s = 0; s < 2; ++s) {
        int count = 0;
        for (int x = 0; x < 8; ++x)
            for (int y = 0; y < 8; ++y)
                if (std::popcount(static_cast<unsigned>(x & y)) % 2 == s) ++count;
        for (int x = 0; x < 8; ++x)
            for (int y = 0; y < 8; ++y)
                if (std::popcount(static_cast<unsigned>(x & y)) % 2 == s)
                    p[s][{x, std::popcount(static_cast<unsigned>(y)) % 2}] += 1.0 / count;
    }
    for (int s = 0; s < 2; ++s) {
        double expected = 0.0;
        for (int x = 0; x < 8; ++x)
            for (int z = 0; z < 2; ++z) {
                const double ps = p[s][{x, z}];
                const double g = 0.5 * (p[0][{x, z}] + p[1][{x, z}]);
                expected += std::abs(ps - g);
            }
        EXPECT_NEAR(run_leakage_experiment(adv, static_cast<GF2k::Elem>(s), lp).distance, expected, 1e-12);
        EXPECT_GT(expected, 0.0);
    }
}

TEST(Leakage, TeleportStaysBelowRevealingBound) {
    LrssParams lp;
    const auto adv = make_leakage_adversary("teleport", {1}, lp);
    EXPECT_EQ(adv.w_dims[0], 2u);
    for (GF2k::Elem s : {0u, 1u}) {
        const double d = run_leakage_experiment(adv, s, lp).distance;
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 2.0 + 1e-12);
    }
}

TEST(Leakage, BudgetIsEnforced) {
    LrssParams lp;
    lp.ell_leak = 0.5;
    EXPECT_THROW(make_leakage_adversary("parity", {1}, lp), InvalidParams);
    lp.ell_leak = 1.0;
    EXPECT_THROW(make_leakage_adversary("parity", {1, 2}, lp), InvalidParams);
}
