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

#include "qnm/nmss.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include "qnm/errors.hpp"

namespace qnm {

namespace {

std::vector<unsigned> normalized_parties(const std::vector<unsigned>& parties, unsigned p) {
    std::vector<unsigned> T = parties;
    std::sort(T.begin(), T.end());
    T.erase(std::unique(T.begin(), T.end()), T.end());
    for (unsigned i : T)
        if (i == 0 || i > p) throw InvalidParams("party index out of range");
    return T;
}

Operator mask_message(const Operator& sigma, const std::string& label, const Matrix& u) {
    Operator out = conjugate_local(sigma, {label}, u);
    out.layout = out.layout.renamed(label, kCodewordZ);
    return out;
}

std::uint64_t codeword_key(const CodeParams& code, const SplitStateCodeword& c) {
    if (code.key_source == KeySource::Extractor) return extractor_key(code, c.x, c.y);
    if (!c.tag) throw InvalidParams("ideal-key codeword without tag");
    return c.tag->key;
}

std::vector<LrShare> select_right(const std::vector<LrShare>& right, const std::vector<unsigned>& T) {
    std::vector<LrShare> out;
    for (unsigned i : T) {
        const auto it = std::find_if(right.begin(), right.end(), [i](const LrShare& s) { return s.party == i; });
        if (it == right.end()) throw LayoutError("missing right share");
        out.push_back(*it);
    }
    return out;
}

}  // namespace

NmssParams NmssParams::desk() {
    NmssParams prm;
    prm.ell_leak = std::log2(5.0);
    return prm;
}

std::size_t NmssParams::left_dim() const { return std::size_t{1} << (code.y_bits() + code.b); }

std::size_t NmssParams::left_capacity() const {
    std::size_t c = 1;
    for (unsigned i = 0; i < left_qudits; ++i) c *= left_q;
    return c;
}

QShamirParams NmssParams::qshamir() const { return QShamirParams{t, p, left_q, left_qudits}; }

LrssParams NmssParams::lrss() const { return LrssParams{code.ell, lr_N, ell_leak, epsilon, p}; }

std::vector<std::string> NmssParams::validate(bool strict) const {
    if (t < 3) throw InvalidParams("threshold must be at least 3");
    if (p < t || p > 2 * t - 1) throw InvalidParams("quantum variant needs t <= p <= 2t - 1");
    code.validate();
    if (code.ell == 0 || code.ell > 16) throw InvalidParams("X must fit one GF(2^k) element with k <= 16");
    if (lr_N == 0) throw InvalidParams("LRSS vector length must be positive");
    qshamir().validate();
    if (left_capacity() < left_dim()) throw InvalidParams("left shares cannot hold (Y, Z)");
    if (ell_leak + 1e-9 < std::log2(static_cast<double>(left_capacity())))
        throw InvalidParams("leakage budget smaller than one left share");
    std::vector<std::string> warnings;
    const LrssBound bound = validate_lrss(lrss(), strict);
    if (!bound.satisfied)
        warnings.push_back("LRSS share-size inequality not met: N b = " + std::to_string(bound.lhs) +
                           " < " + std::to_string(bound.rhs));
    return warnings;
}

std::string left_share_label(unsigned party) { return share_label(kLeftPrefix, party); }

Operator nmss_left_shares(const Operator& z_state, std::uint64_t y, const NmssParams& prm) {
    const std::size_t zd = prm.code.message_dim();
    if (z_state.layout.dim_of(kCodewordZ) != zd) throw DimensionMismatch("Z register does not match b");
    if (y >= (std::uint64_t{1} << prm.code.y_bits())) throw InvalidParams("y out of range");
    Matrix embed = Matrix::Zero(static_cast<Eigen::Index>(prm.left_capacity()), static_cast<Eigen::Index>(zd));
    for (std::size_t z = 0; z < zd; ++z) embed(static_cast<Eigen::Index>(y * zd + z), static_cast<Eigen::Index>(z)) = 1.0;
    const Operator left = apply_kraus_local(z_state, {kCodewordZ}, {embed},
                                            RegisterLayout{{kLeftRegister, prm.left_capacity()}});
    return qshare(left, kLeftRegister, prm.qshamir(), kLeftPrefix);
}

Operator nmss_decode_left(const Operator& rec, const NmssParams& prm) {
    const std::size_t cap = prm.left_capacity();
    const std::size_t ld = prm.left_dim();
    if (rec.layout.dim_of(kLeftRegister) != cap) throw DimensionMismatch("left register size mismatch");
    std::vector<Matrix> kraus;
    Matrix keep = Matrix::Zero(static_cast<Eigen::Index>(ld), static_cast<Eigen::Index>(cap));
    for (std::size_t v = 0; v < ld; ++v) keep(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v)) = 1.0;
    kraus.push_back(keep);
    for (std::size_t v = ld; v < cap; ++v) {
        Matrix k = Matrix::Zero(static_cast<Eigen::Index>(ld), static_cast<Eigen::Index>(cap));
        k(0, static_cast<Eigen::Index>(v)) = 1.0;
        kraus.push_back(k);
    }
    const RegisterLayout out{{"Y", std::size_t{1} << prm.code.y_bits()}, {kCodewordZ, prm.code.message_dim()}};
    return apply_kraus_local(rec, {kLeftRegister}, kraus, out);
}

NmssShareSet nmshare_from_codeword(const SplitStateCodeword& c, const NmssParams& prm, std::vector<LrShare> right) {
    if (right.size() != prm.p) throw InvalidParams("need one right share per party");
    NmssShareSet out;
    out.left = nmss_left_shares(c.z, c.y, prm);
    out.right = std::move(right);
    out.tag = c.tag;
    out.message_label = c.message_label;
    return out;
}

NmssShareSet nmshare(const DensityOperator& sigma, const std::string& label, const NmssParams& prm, Rng& rng) {
    prm.validate(false);
    const SplitStateCodeword c = enc(sigma, label, prm.code, rng);
    auto right = lrshare_2p(static_cast<GF2k::Elem>(c.x), prm.lrss(), rng);
    return nmshare_from_codeword(c, prm, std::move(right));
}

Operator nmrec(const NmssShareSet& shares, const std::vector<unsigned>& parties, const NmssParams& prm) {
    prm.validate(false);
    const auto T = normalized_parties(parties, prm.p);
    if (T.size() < prm.t) throw InvalidParams("reconstruction needs at least t shares");
    const Operator rec = qrec(shares.left, T, kLeftRegister, prm.qshamir(), kLeftPrefix);
    const Operator yz = nmss_decode_left(rec, prm);
    const auto x = static_cast<std::uint64_t>(lrrec_2p(select_right(shares.right, T)));
    const std::size_t ny = std::size_t{1} << prm.code.y_bits();
    Operator acc;
    for (std::size_t y = 0; y < ny; ++y) {
        Matrix proj = Matrix::Zero(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(ny));
        proj(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(y)) = 1.0;
        SplitStateCodeword c;
        c.x = x;
        c.y = y;
        c.z = partial_trace(conjugate_local(yz, {"Y"}, proj), {"Y"});
        c.message_label = shares.message_label;
        c.tag = shares.tag;
        const Operator out = dec(c, prm.code);
        if (acc.matrix.size() == 0) {
            acc = out;
        } else {
            acc.matrix += out.matrix;
        }
    }
    return acc;
}

double nmss_privacy_distance(const DensityOperator& sigma, const std::string& label,
                             const std::vector<unsigned>& parties, const NmssParams& prm) {
    prm.validate(false);
    const auto T = normalized_parties(parties, prm.p);
    if (T.size() >= prm.t) throw InvalidParams("privacy concerns unauthorized sets");
    const CodeParams& code = prm.code;
    const std::size_t nx = std::size_t{1} << code.ell;
    const std::size_t ny = std::size_t{1} << code.y_bits();
    const bool ideal = code.key_source == KeySource::Ideal;
    const auto keys = key_distribution(code);

    std::vector<std::string> ext;
    for (const auto& l : sigma.layout().labels())
        if (l != label) ext.push_back(l);
    std::vector<std::string> kept;
    for (unsigned i : T) kept.push_back(left_share_label(i));
    kept.insert(kept.end(), ext.begin(), ext.end());

    const DensityOperator uniform = DensityOperator::maximally_mixed(RegisterLayout{{label, sigma.layout().dim_of(label)}});
    const Operator sigma_ext = ext.empty() ? Operator(Matrix::Ones(1, 1), RegisterLayout{}) : marginal(sigma.op(), ext);

    // Left-share marginal for a message, given (y, key).
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::pair<Matrix, Matrix>> cache;
    auto left_pair = [&](std::uint64_t y, std::uint64_t key) -> const std::pair<Matrix, Matrix>& {
        auto it = cache.find({y, key});
        if (it != cache.end()) return it->second;
        const Matrix& u = key_unitary(code, key);
        const Operator real = marginal(nmss_left_shares(mask_message(sigma.op(), label, u), y, prm), kept);
        std::vector<std::string> lt(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(T.size()));
        const Operator unif = marginal(nmss_left_shares(mask_message(uniform.op(), label, u), y, prm), lt);
        Operator target = ext.empty() ? unif : tensor(unif, sigma_ext);
        target = reorder(target, real.layout.labels());
        return cache.emplace(std::make_pair(y, key), std::make_pair(real.matrix, target.matrix)).first->second;
    };

    // D_x = rho_x - zeta_x (x) sigma_ext for every x.
    std::vector<Matrix> diff(nx);
    for (std::size_t x = 0; x < nx; ++x) {
        Matrix acc;
        auto add = [&](const Matrix& m, double w) {
            if (acc.size() == 0) acc = Matrix::Zero(m.rows(), m.cols());
            acc += w * m;
        };
        for (std::size_t y = 0; y < ny; ++y) {
            if (ideal) {
                for (std::uint64_t k = 0; k < keys.size(); ++k) {
                    const auto& pr = left_pair(y, k);
                    add(pr.first - pr.second, keys[k] / static_cast<double>(ny));
                }
            } else {
                const auto& pr = left_pair(y, extractor_key(code, x, y));
                add(pr.first - pr.second, 1.0 / static_cast<double>(ny));
            }
        }
        diff[x] = std::move(acc);
    }

    // Classical right shares of T: joint law given x.
    std::map<std::vector<std::uint64_t>, std::vector<double>> law;  // r_T -> weight per x
    for (std::size_t x = 0; x < nx; ++x)
        for (const auto& [tuple, w] : lrshare_2p_law(static_cast<GF2k::Elem>(x), prm.lrss())) {
            std::vector<std::uint64_t> rt;
            for (unsigned i : T) rt.push_back(tuple[i - 1]);
            auto& slot = law[rt];
            if (slot.empty()) slot.assign(nx, 0.0);
            slot[x] += w;
        }
    double total = 0.0;
    for (const auto& [rt, wx] : law) {
        Matrix block = Matrix::Zero(diff[0].rows(), diff[0].cols());
        for (std::size_t x = 0; x < nx; ++x)
            if (wx[x] != 0.0) block += (wx[x] / static_cast<double>(nx)) * diff[x];
        total += trace_norm(block);
    }
    return total;
}

// --------------------------------------------------------- classical variant

const std::vector<Vector>& classical_left_orbit(const CodeParams& code) {
    static std::mutex mu;
    static std::map<std::pair<unsigned, int>, std::vector<Vector>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(code.b, static_cast<int>(code.sampling));
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::vector<Vector> orbit;
    const std::size_t d = code.message_dim();
    for (std::uint64_t k = 0; k < num_keys(code); ++k)
        for (std::size_t s = 0; s < d; ++s) {
            const Vector v = key_unitary(code, k).col(static_cast<Eigen::Index>(s));
            const bool seen = std::any_of(orbit.begin(), orbit.end(),
                                          [&](const Vector& w) { return std::abs(std::abs(w.dot(v)) - 1.0) < 1e-9; });
            if (!seen) orbit.push_back(v);
        }
    return cache.emplace(key, std::move(orbit)).first->second;
}

std::uint64_t classical_left_modulus(const NmssParams& prm) {
    const std::uint64_t values = (std::uint64_t{1} << prm.code.y_bits()) * classical_left_orbit(prm.code).size();
    std::uint64_t q = std::max<std::uint64_t>(values, prm.p) + 1;
    while (!is_prime(q)) ++q;
    return q;
}

void validate_classical(const NmssParams& prm) {
    if (prm.t < 3) throw InvalidParams("threshold must be at least 3");
    if (prm.p < prm.t) throw InvalidParams("need t <= p");
    prm.code.validate();
    if (prm.code.ell == 0 || prm.code.ell > 16) throw InvalidParams("X must fit one GF(2^k) element with k <= 16");
    if (prm.code.b > 2) throw SizeLimitExceeded("classical variant enumerates stabilizer orbits for b <= 2");
    if (prm.lr_N == 0) throw InvalidParams("LRSS vector length must be positive");
}

NmssClassicalShares nmshare_classical(std::uint64_t s, const NmssParams& prm, Rng& rng) {
    validate_classical(prm);
    const CodeParams& code = prm.code;
    if (s >= code.message_dim()) throw InvalidParams("message out of range");
    const RegisterLayout ml{{"M", code.message_dim()}};
    const SplitStateCodeword c = enc(DensityOperator::basis_state(ml, s), "M", code, rng);
    const Vector v = key_unitary(code, codeword_key(code, c)).col(static_cast<Eigen::Index>(s));
    const auto& orbit = classical_left_orbit(code);
    std::size_t idx = orbit.size();
    for (std::size_t i = 0; i < orbit.size(); ++i)
        if (std::abs(std::abs(orbit[i].dot(v)) - 1.0) < 1e-9) {
            idx = i;
            break;
        }
    if (idx == orbit.size()) throw InvalidState("masked basis state outside the recorded orbit");
    NmssClassicalShares out;
    out.left = cshamir_share(c.y * orbit.size() + idx, prm.t, prm.p, classical_left_modulus(prm), rng);
    out.right = lrshare_2p(static_cast<GF2k::Elem>(c.x), prm.lrss(), rng);
    out.tag = c.tag;
    return out;
}

std::vector<double> nmrec_classical(const NmssClassicalShares& shares, const std::vector<unsigned>& parties,
                                    const NmssParams& prm) {
    validate_classical(prm);
    const auto T = normalized_parties(parties, prm.p);
    if (T.size() < prm.t) throw InvalidParams("reconstruction needs at least t shares");
    if (shares.left.size() != prm.p) throw InvalidParams("need one left share per party");
    const CodeParams& code = prm.code;
    const auto& orbit = classical_left_orbit(code);
    std::vector<std::pair<unsigned, std::uint64_t>> pts;
    for (unsigned i : T) pts.emplace_back(i, shares.left[i - 1]);
    std::uint64_t l = cshamir_rec(pts, prm.t, classical_left_modulus(prm));
    if (l >= (std::uint64_t{1} << code.y_bits()) * orbit.size()) l = 0;
    const Vector& v = orbit[l % orbit.size()];
    SplitStateCodeword c;
    c.x = static_cast<std::uint64_t>(lrrec_2p(select_right(shares.right, T)));
    c.y = l / orbit.size();
    c.z = Operator(v * v.adjoint(), RegisterLayout{{kCodewordZ, code.message_dim()}});
    c.message_label = "M";
    c.tag = shares.tag;
    const Operator m = dec(c, code);
    std::vector<double> out(code.message_dim());
    for (std::size_t s = 0; s < out.size(); ++s) out[s] = std::max(0.0, m.matrix(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s)).real());
    return out;
}

}  // namespace qnm
