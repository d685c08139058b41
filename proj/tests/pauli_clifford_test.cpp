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

#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "qnm/errors.hpp"
#include "qnm/pauli_clifford.hpp"

namespace qnm {
namespace {

const cplx kI(0, 1);

// Equality up to a global phase for unitaries of the same size.
bool same_up_to_phase(const Matrix& a, const Matrix& b, double tol) {
    const cplx overlap = (a.adjoint() * b).trace() / static_cast<double>(a.rows());
    if (std::abs(std::abs(overlap) - 1.0) > tol) return false;
    return (a * (overlap / std::abs(overlap)) - b).norm() < tol * static_cast<double>(a.rows());
}

TEST(PauliOp, DenseSingleQubitMatrices) {
    Matrix x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, -kI, kI, 0;
    z << 1, 0, 0, -1;
    EXPECT_LT((pauli_dense(PauliOp::parse("X")) - x).norm(), 1e-15);
    EXPECT_LT((pauli_dense(PauliOp::parse("Y")) - y).norm(), 1e-15);
    EXPECT_LT((pauli_dense(PauliOp::parse("Z")) - z).norm(), 1e-15);
    EXPECT_LT((pauli_dense(PauliOp::identity(3)) - Matrix::Identity(8, 8)).norm(), 1e-15);
    EXPECT_LT((pauli_dense(PauliOp::parse("-iZ")) + kI * z).norm(), 1e-15);
}

TEST(PauliOp, TextOrderMatchesKronecker) {
    Matrix x(2, 2), z(2, 2), y(2, 2);
    x << 0, 1, 1, 0;
    z << 1, 0, 0, -1;
    y << 0, -kI, kI, 0;
    Matrix expect = kron(kron(x, Matrix::Identity(2, 2)), z);
    EXPECT_LT((pauli_dense(PauliOp::parse("XIZ")) - expect).norm(), 1e-15);
    EXPECT_LT((pauli_dense(PauliOp::parse("-YX")) + kron(y, x)).norm(), 1e-15);
}

TEST(PauliOp, TextRoundTrip) {
    for (const std::string s : {"X", "IZ", "-XYZ", "iY", "-iIIX", "YYYY"}) EXPECT_EQ(PauliOp::parse(s).to_string(), s);
    EXPECT_EQ(PauliOp::parse("+XZ").to_string(), "XZ");
    EXPECT_THROW(PauliOp::parse("XQ"), InvalidParams);
    EXPECT_THROW(PauliOp::parse("-"), InvalidParams);
    EXPECT_THROW(PauliOp::parse(std::string(33, 'X')), SizeLimitExceeded);
}

TEST(PauliOp, ProductAndCommutationMatchDense) {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        const unsigned n = 1 + static_cast<unsigned>(rng.below(3));
        PauliOp a = PauliOp::from_index(n, rng.below(1ULL << (2 * n))).times_phase(static_cast<unsigned>(rng.below(4)));
        PauliOp b = PauliOp::from_index(n, rng.below(1ULL << (2 * n))).times_phase(static_cast<unsigned>(rng.below(4)));
        const Matrix da = pauli_dense(a), db = pauli_dense(b);
        EXPECT_LT((pauli_dense(a * b) - da * db).norm(), 1e-12);
        EXPECT_LT((pauli_dense(a.adjoint()) - da.adjoint()).norm(), 1e-12);
        EXPECT_EQ(a.commutes_with(b), (da * db - db * da).norm() < 1e-12);
        EXPECT_EQ(a.is_hermitian(), (da - da.adjoint()).norm() < 1e-12);
    }
}

TEST(PauliDecompose, AnalyticCases) {
    auto terms = pauli_decompose(pauli_dense(PauliOp::parse("X")));
    ASSERT_EQ(terms.size(), 1u);
    EXPECT_EQ(terms[0].pauli.to_string(), "X");
    EXPECT_NEAR(std::abs(terms[0].coefficient - 1.0), 0.0, 1e-15);

    Matrix zero = Matrix::Zero(2, 2);
    zero(0, 0) = 1.0;
    terms = pauli_decompose(zero);
    ASSERT_EQ(terms.size(), 2u);
    std::map<std::string, cplx> got;
    for (const auto& t : terms) got[t.pauli.to_string()] = t.coefficient;
    EXPECT_NEAR(std::abs(got["I"] - 0.5), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(got["Z"] - 0.5), 0.0, 1e-15);
    EXPECT_THROW(pauli_decompose(Matrix::Identity(3, 3)), DimensionMismatch);
}

TEST(PauliDecompose, RandomReconstruction) {
    Rng rng(2);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix m(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) = rng.complex_normal();
        auto terms = pauli_decompose(m, 0.0);
        EXPECT_EQ(terms.size(), 16u);
        EXPECT_LT((pauli_recompose(terms, 2) - m).norm(), 1e-10);
        for (const auto& t : terms) {
            const cplx oracle = (pauli_dense(t.pauli).adjoint() * m).trace() / 4.0;
            EXPECT_LT(std::abs(oracle - t.coefficient), 1e-12);
        }
    }
}

TEST(CliffordOp, GateMatrices) {
    const double r = 1.0 / std::sqrt(2.0);
    Matrix h(2, 2), s(2, 2), cx = Matrix::Zero(4, 4);
    h << r, r, r, -r;
    s << 1, 0, 0, kI;
    cx(0, 0) = cx(1, 1) = cx(2, 3) = cx(3, 2) = 1.0;
    EXPECT_TRUE(same_up_to_phase(CliffordOp::hadamard(1, 0).dense(), h, 1e-12));
    EXPECT_TRUE(same_up_to_phase(CliffordOp::phase_s(1, 0).dense(), s, 1e-12));
    EXPECT_TRUE(same_up_to_phase(CliffordOp::cnot(2, 0, 1).dense(), cx, 1e-12));
    EXPECT_TRUE(same_up_to_phase(CliffordOp::identity(3).dense(), Matrix::Identity(8, 8), 1e-12));
    EXPECT_TRUE(same_up_to_phase(CliffordOp::hadamard(2, 1).dense(), kron(Matrix::Identity(2, 2), h), 1e-12));
}

TEST(CliffordOp, RejectsInvalidImages) {
    auto x = PauliOp::parse("X"), z = PauliOp::parse("Z");
    EXPECT_THROW(CliffordOp(1, {x}, {x}), InvalidParams);
    EXPECT_THROW(CliffordOp(1, {x.times_phase(1)}, {z}), InvalidParams);
    EXPECT_NO_THROW(CliffordOp(1, {z}, {x.times_phase(2)}));
}

TEST(CliffordOp, SymplecticDenseHomomorphism) {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const unsigned n = 1 + static_cast<unsigned>(rng.below(3));
        CliffordOp c = CliffordOp::random(n, 12, rng);
        CliffordOp c2 = CliffordOp::random(n, 12, rng);
        const Matrix& u = c.dense();
        ASSERT_LT((u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).norm(), 1e-11);
        PauliOp p = PauliOp::from_index(n, rng.below(1ULL << (2 * n))).times_phase(static_cast<unsigned>(rng.below(4)));
        EXPECT_LT((u * pauli_dense(p) * u.adjoint() - pauli_dense(c.conjugate(p))).norm(), 1e-11);
        EXPECT_LT((u.adjoint() * pauli_dense(p) * u - pauli_dense(c.conjugate_inverse(p))).norm(), 1e-11);
        EXPECT_TRUE(same_up_to_phase((c * c2).dense(), u * c2.dense(), 1e-11));
        EXPECT_EQ(c * c.inverse(), CliffordOp::identity(n));
    }
}

TEST(CliffordOp, SymplecticMatrixPreservesForm) {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        const unsigned n = 1 + static_cast<unsigned>(rng.below(4));
        auto s = CliffordOp::random(n, 20, rng).symplectic();
        // Omega = [[0, I], [I, 0]]; check S^T Omega S = Omega over GF(2).
        for (unsigned i = 0; i < 2 * n; ++i)
            for (unsigned j = 0; j < 2 * n; ++j) {
                unsigned acc = 0;
                for (unsigned k = 0; k < n; ++k) acc += s[k][i] * s[k + n][j] + s[k + n][i] * s[k][j];
                const unsigned omega = (i + n == j || j + n == i) ? 1u : 0u;
                EXPECT_EQ(acc % 2, omega);
            }
    }
}

TEST(SubClifford, SizeAndDistinctness) {
    EXPECT_EQ(sc_size(1), 24u);
    EXPECT_EQ(sc_size(2), 960u);
    for (unsigned b : {1u, 2u}) {
        auto all = sc_enumerate(b);
        EXPECT_EQ(all.size(), sc_size(b));
        std::set<CliffordOp> distinct(all.begin(), all.end());
        EXPECT_EQ(distinct.size(), all.size());
    }
    EXPECT_THROW(sc_enumerate(3), SizeLimitExceeded);
}

TEST(SubClifford, ClosedUnderCompositionAndContainsPaulis) {
    auto all = sc_enumerate(1);
    std::set<CliffordOp> set(all.begin(), all.end());
    for (const auto& a : all)
        for (const auto& b : all) EXPECT_TRUE(set.count(a * b));
    for (const auto& p : pauli_group(1)) EXPECT_TRUE(set.count(p));
    auto all2 = sc_enumerate(2);
    std::set<CliffordOp> set2(all2.begin(), all2.end());
    for (const auto& p : pauli_group(2)) EXPECT_TRUE(set2.count(p));
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const auto& a = all2[rng.below(all2.size())];
        const auto& b = all2[rng.below(all2.size())];
        EXPECT_TRUE(set2.count(a * b));
        EXPECT_TRUE(set2.count(a.inverse()));
    }
}

TEST(SubClifford, UniformOverNonIdentityTargets) {
    for (unsigned b : {1u, 2u}) {
        auto all = sc_enumerate(b);
        const std::uint64_t expected = sc_size(b) / ((1ULL << (2 * b)) - 1);
        const std::uint64_t paulis = 1ULL << (2 * b);
        for (std::uint64_t pi = 1; pi < paulis; ++pi) {
            std::map<std::uint64_t, std::uint64_t> hits;
            const PauliOp p = PauliOp::from_index(b, pi);
            for (const auto& c : all) {
                const PauliOp q = c.conjugate_inverse(p);
                ASSERT_FALSE(q.is_identity_up_to_phase());
                ++hits[q.index()];
            }
            EXPECT_EQ(hits.size(), paulis - 1);
            for (const auto& [q, count] : hits) EXPECT_EQ(count, expected) << "b=" << b << " P=" << pi;
        }
    }
    // b=1, P = X: each of X, Y, Z is reached 8 times.
    std::map<std::uint64_t, int> x_targets;
    for (const auto& c : sc_enumerate(1)) ++x_targets[c.conjugate_inverse(PauliOp::parse("X")).index()];
    EXPECT_EQ(x_targets, (std::map<std::uint64_t, int>{{1, 8}, {2, 8}, {3, 8}}));
}

TEST(SubClifford, SamplerAnchorsAndCoverage) {
    EXPECT_EQ(sc_samp(SubCliffordKey(1, 0)), CliffordOp::identity(1));
    EXPECT_EQ(sc_samp(SubCliffordKey(2, 0)), CliffordOp::identity(2));
    EXPECT_THROW(SubCliffordKey(1, 32), InvalidParams);
    EXPECT_EQ(sc_samp(SubCliffordKey(2, 0x2a5)), sc_samp(SubCliffordKey(2, 0x2a5)));
    for (unsigned b : {1u, 2u}) {
        auto all = sc_enumerate(b);
        std::map<CliffordOp, double> prob;
        const std::uint64_t keys = 1ULL << (5 * b);
        for (std::uint64_t k = 0; k < keys; ++k) prob[sc_samp(SubCliffordKey(b, k))] += 1.0 / static_cast<double>(keys);
        std::set<CliffordOp> set(all.begin(), all.end());
        for (const auto& [c, p] : prob) EXPECT_TRUE(set.count(c));
        EXPECT_EQ(prob.size(), all.size());
        double sd = 0.0;
        for (const auto& c : all) sd += std::abs(prob[c] - 1.0 / static_cast<double>(all.size()));
        sd *= 0.5;
        EXPECT_LE(sd, std::ldexp(1.0, -2 * static_cast<int>(b)));
        if (b == 1) EXPECT_NEAR(sd, 1.0 / 6.0, 1e-12);
    }
}

TEST(SubClifford, SamplerRunsForLargerB) {
    Rng rng(6);
    for (unsigned b : {3u, 5u, 8u}) {
        const CliffordOp c = sc_samp(SubCliffordKey(b, rng.bits(5 * b)));
        EXPECT_EQ(c * c.inverse(), CliffordOp::identity(b));
    }
}

DensityOperator random_state(const RegisterLayout& l, std::size_t rank, Rng& rng) {
    return DensityOperator(random_density(l.total_dim(), rank, rng), l);
}

TEST(Twirl, OneDesignsGiveMaximallyMixedTimesMarginal) {
    Rng rng(7);
    for (unsigned b : {1u, 2u}) {
        RegisterLayout l({{"A", 1u << b}, {"B", 2}});
        auto rho = random_state(l, 3, rng);
        const Matrix expect = kron(Matrix::Identity(1 << b, 1 << b) / double(1 << b), partial_trace(rho, {"A"}).matrix());
        auto pauli = group_twirl(rho.op(), {"A"}, dense_group(pauli_group(b)));
        EXPECT_LT((pauli.matrix - expect).norm(), 1e-10);
        auto sc = group_twirl(rho.op(), {"A"}, dense_group(sc_enumerate(b)));
        EXPECT_LT((sc.matrix - expect).norm(), 1e-10);
        Operator fixed(expect, l);
        EXPECT_LT((group_twirl(fixed, {"A"}, dense_group(sc_enumerate(b))).matrix - expect).norm(), 1e-10);
    }
    EXPECT_THROW(group_twirl(Operator(Matrix::Identity(2, 2), RegisterLayout({{"A", 2}})), {"A"}, {}), InvalidParams);
}

TEST(Twirl, CrossTermsVanishForDistinctPaulis) {
    Rng rng(8);
    const auto sc = sc_enumerate(1);
    const auto pg = pauli_group(1);
    auto rho = random_density(2, 2, rng);
    for (const auto& p : all_paulis(1))
        for (const auto& q : all_paulis(1)) {
            if (p == q) continue;
            EXPECT_LT(twirl_cross_term(p, q, rho, sc).norm(), 1e-9);
            EXPECT_LT(twirl_cross_term(p, q, rho, pg).norm(), 1e-9);
        }
    const Matrix xz = twirl_cross_term(PauliOp::parse("X"), PauliOp::parse("Z"), rho, sc);
    EXPECT_LT(xz.norm(), 1e-9);
}

TEST(Twirl, ModifiedCrossTermOnPurifications) {
    Rng rng(9);
    const auto sc = sc_enumerate(1);
    auto rho_a = random_state(RegisterLayout({{"A", 2}}), 2, rng);
    auto purified = canonical_purification(rho_a, "Ah").density();
    PureState epr(max_entangled(2), RegisterLayout({{"A", 2}, {"Ah", 2}}));
    for (const auto& p : all_paulis(1))
        for (const auto& q : all_paulis(1)) {
            if (p == q) continue;
            EXPECT_LT(modified_twirl_cross_term(p, q, purified.op(), {"A"}, sc).matrix.norm(), 1e-9);
            EXPECT_LT(modified_twirl_cross_term(p, q, epr.density().op(), {"A"}, sc).matrix.norm(), 1e-9);
        }
}

TEST(Twirl, UniformConjugation) {
    for (unsigned b : {1u, 2u}) {
        const auto sc = sc_enumerate(b);
        const auto pg = pauli_group(b);
        const auto id = Matrix::Identity(1 << b, 1 << b);
        EXPECT_LT((uniform_conjugation(PauliOp::identity(b), sc) - id).norm(), 1e-12);
        EXPECT_LT((uniform_conjugation(PauliOp::identity(b), pg) - id).norm(), 1e-12);
        for (const auto& p : all_paulis(b)) {
            if (p.is_identity_up_to_phase()) continue;
            EXPECT_LT(uniform_conjugation(p, sc).norm(), 1e-12);
            EXPECT_LT(uniform_conjugation(p, pg).norm(), 1e-12);
        }
    }
}

TEST(EprTwirl, MaximallyEntangledIsFixed) {
    PureState epr(max_entangled(2), RegisterLayout({{"Mh", 2}, {"Z", 2}}));
    auto res = epr_twirl_decomposition(epr.density(), "Mh", "Z");
    EXPECT_NEAR(res.p_epr, 1.0, 1e-12);
    EXPECT_LT((res.twirled - epr.density().matrix()).norm(), 1e-10);
}

TEST(EprTwirl, FlippedEprBecomesOrthogonalMixture) {
    RegisterLayout l({{"Mh", 2}, {"Z", 2}});
    PureState epr(max_entangled(2), l);
    Operator flipped = conjugate_local(epr.density().op(), {"Z"}, pauli_dense(PauliOp::parse("X")));
    auto res = epr_twirl_decomposition(DensityOperator(flipped.matrix, l), "Mh", "Z");
    EXPECT_NEAR(res.p_epr, 0.0, 1e-12);
    const Matrix psi = epr.density().matrix();
    EXPECT_LT((res.twirled - (Matrix::Identity(4, 4) - psi) / 3.0).norm(), 1e-10);
}

TEST(EprTwirl, RandomStatesMatchClosedForm) {
    Rng rng(10);
    for (unsigned b : {1u, 2u}) {
        const auto sc = sc_enumerate(b);
        RegisterLayout l({{"Mh", 1u << b}, {"Z", 1u << b}});
        for (int trial = 0; trial < (b == 1 ? 10 : 3); ++trial) {
            auto rho = random_state(l, 3, rng);
            auto res = epr_twirl_decomposition(rho, "Mh", "Z", sc);
            EXPECT_LT(res.closed_form_residual, 1e-9);
            EXPECT_LE(res.mixture_distance, 2.0 / double(1u << (2 * b)) + 1e-12);
            // Group sum via register-level operations as an independent path.
            Matrix acc = Matrix::Zero(rho.matrix().rows(), rho.matrix().cols());
            for (const auto& c : sc) {
                Operator step = conjugate_local(rho.op(), {"Mh"}, c.dense().transpose());
                acc += conjugate_local(step, {"Z"}, c.dense().adjoint()).matrix;
            }
            acc /= static_cast<double>(sc.size());
            EXPECT_LT((acc - res.twirled).norm(), 1e-10);
        }
    }
    RegisterLayout bad({{"Mh", 2}, {"Z", 4}});
    EXPECT_THROW(epr_twirl_decomposition(DensityOperator::maximally_mixed(bad), "Mh", "Z"), DimensionMismatch);
}

}  // namespace
}  // namespace qnm
