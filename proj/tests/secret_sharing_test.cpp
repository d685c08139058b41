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
#include "qnm/secret_sharing.hpp"

namespace qnm {
namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix maximally_mixed(std::size_t d) { return Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) / static_cast<double>(d); }

// Generalized qudit Pauli X^a Z^c.
Matrix qudit_pauli(unsigned q, unsigned a, unsigned c) {
    Matrix m = Matrix::Zero(q, q);
    const double pi = std::acos(-1.0);
    for (unsigned j = 0; j < q; ++j)
        m((j + a) % q, j) = std::polar(1.0, 2.0 * pi * c * j / q);
    return m;
}

DensityOperator purified(std::size_t d, Rng& rng) {
    const DensityOperator m(random_density(d, d, rng), RegisterLayout{{"M", d}});
    return canonical_purification(m, "Mh").density();
}

const QShamirParams kQutrit{2, 3, 3, 1};

TEST(QShamirTest, QutritCodeMatchesHandWrittenEncoding) {
    // Points 1, 2, 0 and f(x) = s x + c: |s> -> (1/sqrt 3) sum_c |s+c, 2s+c, c>.
    const Matrix v = qshare_isometry(kQutrit);
    Matrix oracle = Matrix::Zero(27, 3);
    for (unsigned s = 0; s < 3; ++s)
        for (unsigned c = 0; c < 3; ++c) oracle(((s + c) % 3) * 9 + ((2 * s + c) % 3) * 3 + c, s) = 1.0 / std::sqrt(3.0);
    EXPECT_LT(max_abs(v - oracle), 1e-15);
    EXPECT_LT(max_abs(v.adjoint() * v - Matrix::Identity(3, 3)), 1e-12);
}

TEST(QShamirTest, SingleShareOfBasisMessageIsMaximallyMixed) {
    const auto shares = qshare(DensityOperator::basis_state(RegisterLayout{{"M", 3}}, 0), "M", kQutrit);
    for (unsigned i = 1; i <= 3; ++i)
        EXPECT_LT(max_abs(marginal(shares, {share_label("S", i)}).matrix() - maximally_mixed(3)), 1e-12);
}

TEST(QShamirTest, EveryAuthorizedSetReconstructsWithPurification) {
    Rng rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const DensityOperator sigma = purified(3, rng);
        const auto shares = qshare(sigma, "M", kQutrit);
        EXPECT_EQ(shares.layout().labels(), (std::vector<std::string>{"S1", "S2", "S3", "Mh"}));
        Matrix first;
        for (const auto& T : std::vector<std::vector<unsigned>>{{1, 2}, {1, 3}, {2, 3}, {1, 2, 3}, {3, 1}}) {
            const Operator out = qrec(shares.op(), T, "M", kQutrit);
            ASSERT_EQ(out.layout, sigma.layout());
            EXPECT_LT(max_abs(out.matrix - sigma.matrix()), 1e-10);
            if (first.size() == 0) first = out.matrix;
            EXPECT_LT(max_abs(out.matrix - first), 1e-10);
        }
    }
}

TEST(QShamirTest, NonIdentityPauliSharesVanishOnUnauthorizedSets) {
    for (unsigned a = 0; a < 3; ++a)
        for (unsigned c = 0; c < 3; ++c) {
            if (a == 0 && c == 0) continue;
            const Operator p(qudit_pauli(3, a, c), RegisterLayout{{"M", 3}});
            const Operator shared = qshare(p, "M", kQutrit);
            for (unsigned i = 1; i <= 3; ++i)
                EXPECT_LT(max_abs(marginal(shared, {share_label("S", i)}).matrix), 1e-12) << a << c;
        }
}

TEST(QShamirTest, UnauthorizedSharesFactorFromEntangledSideRegister) {
    Rng rng(9);
    for (int trial = 0; trial < 5; ++trial) {
        const DensityOperator sigma(random_density(6, 6, rng), RegisterLayout{{"E", 2}, {"M", 3}});
        const auto shares = qshare(sigma, "M", kQutrit);
        const Matrix e = marginal(sigma, {"E"}).matrix();
        for (unsigned i = 1; i <= 3; ++i) {
            const auto es = marginal(shares, {"E", share_label("S", i)});
            EXPECT_LT(max_abs(es.matrix() - kron(e, maximally_mixed(3))), 1e-10);
        }
    }
}

TEST(QShamirTest, DroppedSharesVariantThreeOfThree) {
    const QShamirParams prm{3, 3, 5, 1};
    Rng rng(4);
    const DensityOperator sigma = purified(5, rng);
    const auto shares = qshare(sigma, "M", prm);
    EXPECT_EQ(shares.dim(), 125u * 5u);
    for (auto pair : std::vector<std::vector<std::string>>{{"S1", "S2"}, {"S1", "S3"}, {"S2", "S3"}})
        EXPECT_LT(max_abs(marginal(shares, pair).matrix() - maximally_mixed(25)), 1e-12);
    EXPECT_LT(max_abs(qrec(shares.op(), {1, 2, 3}, "M", prm).matrix - sigma.matrix()), 1e-10);
    EXPECT_THROW(qrec(shares.op(), {1, 2}, "M", prm), InvalidParams);
}

TEST(QShamirTest, TwoQuditMessages) {
    const QShamirParams prm{2, 3, 3, 2};
    Rng rng(6);
    const DensityOperator sigma(random_density(9, 9, rng), RegisterLayout{{"M", 9}});
    const auto shares = qshare(sigma, "M", prm);
    EXPECT_LT(max_abs(marginal(shares, {"S2"}).matrix() - maximally_mixed(9)), 1e-12);
    EXPECT_LT(max_abs(qrec(shares.op(), {2, 3}, "M", prm).matrix - sigma.matrix()), 1e-10);
}

TEST(QShamirTest, ParameterValidation) {
    EXPECT_THROW((QShamirParams{2, 4, 5, 1}.validate()), InvalidParams);  // p > 2t - 1
    EXPECT_THROW((QShamirParams{2, 3, 4, 1}.validate()), InvalidParams);  // q not prime
    EXPECT_THROW((QShamirParams{3, 5, 3, 1}.validate()), InvalidParams);  // q < 2t - 1
    EXPECT_NO_THROW((QShamirParams{3, 4, 5, 1}.validate()));
}

TEST(ClassicalShamirTest, SingleSharesUniformOverAllPolynomials) {
    // t = p = 2, q = 5, s = 3: share i is 3 + a i for the uniform coefficient a.
    for (unsigned i = 1; i <= 2; ++i) {
        std::map<unsigned, int> counts;
        for (unsigned a = 0; a < 5; ++a) ++counts[(3 + a * i) % 5];
        EXPECT_EQ(counts.size(), 5u);
    }
    Rng rng(1);
    for (int k = 0; k < 200; ++k) {
        const auto sh = cshamir_share(3, 2, 2, 5, rng);
        const std::uint64_t a = (sh[1] + 5 - sh[0]) % 5;
        EXPECT_EQ(sh[0], (3 + a) % 5);
    }
}

TEST(ClassicalShamirTest, RoundTripEverySecretAndSubset) {
    Rng rng(5);
    for (auto [t, p, q] : std::vector<std::tuple<unsigned, unsigned, std::uint64_t>>{{2, 3, 5}, {3, 5, 7}, {3, 5, 13}}) {
        for (std::uint64_t s = 0; s < q; ++s) {
            const auto sh = cshamir_share(s, t, p, q, rng);
            for (unsigned mask = 0; mask < (1u << p); ++mask) {
                std::vector<std::pair<unsigned, std::uint64_t>> subset;
                for (unsigned i = 0; i < p; ++i)
                    if (mask >> i & 1) subset.emplace_back(i + 1, sh[i]);
                if (subset.size() >= t) {
                    EXPECT_EQ(cshamir_rec(subset, t, q), s);
                } else {
                    EXPECT_THROW(cshamir_rec(subset, t, q), InvalidParams);
                }
            }
        }
    }
}

TEST(ClassicalShamirTest, ThresholdOneReplicates) {
    Rng rng(3);
    EXPECT_EQ(cshamir_share(4, 1, 3, 5, rng), (std::vector<std::uint64_t>{4, 4, 4}));
    EXPECT_THROW(cshamir_share(1, 2, 5, 5, rng), InvalidParams);
}

TEST(LrssTest, TwoOfTwoRoundTripExhaustive) {
    const LrssParams prm{1, 3, 1.0, 0.5, 2};
    Rng rng(8);
    for (GF2k::Elem s = 0; s < 2; ++s) {
        const auto law = lrshare2_distribution(s, 1, 3);
        EXPECT_EQ(law.size(), s == 0 ? 36u : 28u);
        for (const auto& [key, w] : law)
            EXPECT_EQ(lrrec2(FieldVector::from_bits(key.first, 1, 3), FieldVector::from_bits(key.second, 1, 3)), s);
        for (int k = 0; k < 100; ++k) {
            const auto [x, y] = lrshare2(s, prm, rng);
            EXPECT_EQ(lrrec2(x, y), s);
        }
    }
}

TEST(LrssTest, SingleShareLawForFixedAndUniformSecrets) {
    // s = 1: x is uniform on the 7 nonzero vectors, so ||P - U||_1 = 1/8 + 7 (1/7 - 1/8).
    EXPECT_NEAR(lrshare2_single_share_distance(1, 1, 3, true), 0.25, 1e-15);
    // s = 0: x = 0 carries 8 of the 36 preimages.
    EXPECT_NEAR(lrshare2_single_share_distance(0, 1, 3, true), (8.0 / 36 - 1.0 / 8) + 7 * (1.0 / 8 - 4.0 / 36), 1e-15);
    // Uniform s: P(0) = 8/72 and P(x) = 4/72 + 1/14 otherwise, still not uniform
    // because |IP^{-1}(0)| = 36 differs from |IP^{-1}(1)| = 28.
    const double avg = std::abs(8.0 / 72 - 1.0 / 8) + 7 * std::abs(4.0 / 72 + 1.0 / 14 - 1.0 / 8);
    EXPECT_NEAR(avg, 1.0 / 36, 1e-15);
    EXPECT_NEAR(lrshare2_average_single_share_distance(1, 3, true), avg, 1e-15);
    EXPECT_NEAR(lrshare2_average_single_share_distance(1, 3, false), avg, 1e-15);
}

TEST(LrssTest, ValidatorEnforcesShareSizeBound) {
    LrssParams prm{1, 59, 1.0, 0.5, 2};  // 9 + 2 + 8 + 40 = 59
    EXPECT_TRUE(validate_lrss(prm, true).satisfied);
    prm.N = 58;
    EXPECT_THROW(validate_lrss(prm, true), InvalidParams);
    EXPECT_FALSE(validate_lrss(prm, false).satisfied);
    prm.p = 3;
    prm.N = 59;
    EXPECT_NEAR(lrss_bound(prm).rhs, 59 + 16 * std::log2(3.0), 1e-12);
    EXPECT_THROW(validate_lrss(prm, true), InvalidParams);
    prm.N = 85;
    EXPECT_TRUE(validate_lrss(prm, true).satisfied);
}

TEST(LrssTest, TwoOfThreeEveryPairReconstructs) {
    const LrssParams prm{2, 2, 1.0, 0.5, 3};
    Rng rng(12);
    for (GF2k::Elem s = 0; s < 4; ++s)
        for (int k = 0; k < 20; ++k) {
            const auto shares = lrshare_2p(s, prm, rng);
            for (const auto& sh : shares) {
                EXPECT_EQ(sh.symbols(), 2u * 2u);  // (p - 1) N field elements
                EXPECT_EQ(sh.symbols() * prm.b, 8u);
            }
            EXPECT_EQ(lrrec_2p({shares[0], shares[1]}), s);
            EXPECT_EQ(lrrec_2p({shares[2], shares[0]}), s);
            EXPECT_EQ(lrrec_2p({shares[1], shares[2]}), s);
            EXPECT_EQ(lrrec_2p(shares), s);
            EXPECT_THROW(lrrec_2p({shares[1]}), InvalidParams);
        }
}

TEST(LrssTest, PackedSharesAndExactLaw) {
    const LrssParams prm{3, 1, 1.0, 0.5, 3};
    EXPECT_EQ(lr_share_bits(prm), 6u);
    Rng rng(31);
    for (int k = 0; k < 50; ++k) {
        const auto shares = lrshare_2p(static_cast<GF2k::Elem>(k % 8), prm, rng);
        for (const auto& sh : shares) {
            const auto back = unpack_lr_share(pack_lr_share(sh, prm), sh.party, prm);
            EXPECT_EQ(back.sub, sh.sub);
        }
    }
    // Party 2 holds y of pair (1,2) in the high bits and x of pair (2,3) in the low bits.
    LrShare two;
    two.party = 2;
    two.sub[1] = FieldVector::from_bits(5, 3, 1);
    two.sub[3] = FieldVector::from_bits(6, 3, 1);
    EXPECT_EQ(pack_lr_share(two, prm), (5u << 3) | 6u);

    for (GF2k::Elem s : {GF2k::Elem{0}, GF2k::Elem{5}}) {
        const auto law = lrshare_2p_law(s, prm);
        EXPECT_EQ(law.size(), s == 0 ? 15u * 15u * 15u : 7u * 7u * 7u);
        double total = 0.0;
        for (const auto& [tuple, w] : law) {
            total += w;
            std::vector<LrShare> sh;
            for (unsigned i = 1; i <= 3; ++i) sh.push_back(unpack_lr_share(tuple[i - 1], i, prm));
            EXPECT_EQ(lrrec_2p({sh[0], sh[1]}), s);
            EXPECT_EQ(lrrec_2p({sh[0], sh[2]}), s);
            EXPECT_EQ(lrrec_2p({sh[1], sh[2]}), s);
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
    }
}

TEST(LrssTest, HybridReplacementLeavesOtherSubSharingsUnchanged) {
    const LrssParams prm{1, 3, 1.0, 0.5, 3};
    for (GF2k::Elem s = 0; s < 2; ++s)
        for (auto [i, j] : std::vector<std::pair<unsigned, unsigned>>{{1, 2}, {1, 3}, {2, 3}}) {
            const auto rep = lrss_hybrid_check(s, prm, i, j);
            EXPECT_TRUE(rep.pass);
            EXPECT_LE(rep.complement_distance, 1e-12);
            EXPECT_LE(rep.independence_distance, 1e-12);
            // The replaced pair itself is far from uniform: it lives on IP^{-1}(s).
            EXPECT_NEAR(rep.replaced_distance, s == 0 ? 2.0 * (1 - 36.0 / 64) : 2.0 * (1 - 28.0 / 64), 1e-12);
        }
}

TEST(LrssTest, SampledSubSharingsFollowExactLaw) {
    const LrssParams prm{1, 2, 1.0, 0.5, 3};
    Rng rng(77);
    const int draws = 60000;
    std::map<std::pair<std::uint64_t, std::uint64_t>, int> counts;
    for (int k = 0; k < draws; ++k) {
        const auto sh = lrshare_2p(1, prm, rng);
        ++counts[{sh[0].sub.at(3).to_bits(), sh[2].sub.at(1).to_bits()}];
    }
    const auto law = lrshare2_distribution(1, 1, 2);
    EXPECT_EQ(counts.size(), law.size());
    double chi2 = 0.0;
    for (const auto& [key, w] : law) {
        const double e = w * draws;
        const double o = counts.count(key) ? counts.at(key) : 0;
        chi2 += (o - e) * (o - e) / e;
    }
    EXPECT_LT(chi2, 30.0);  // 5 degrees of freedom
}

}  // namespace
}  // namespace qnm
