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

#include "qnm/tamper_harness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include "qnm/errors.hpp"

namespace qnm {

// ------------------------------------------------------------- instruments

Instrument Instrument::identity(std::size_t dim) {
    return Instrument{{{Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))}}};
}

Instrument Instrument::unitary(const Matrix& u) { return Instrument{{{u}}}; }

Instrument Instrument::channel(std::vector<Matrix> kraus) { return Instrument{{std::move(kraus)}}; }

Instrument Instrument::from_dilation(const Matrix& u, std::size_t outcomes, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    if (u.rows() != static_cast<Eigen::Index>(outcomes * dim) || u.cols() != u.rows())
        throw DimensionMismatch("dilation must act on outcomes x dim");
    Instrument out;
    for (std::size_t k = 0; k < outcomes; ++k)
        out.outcomes.push_back({u.block(static_cast<Eigen::Index>(k) * d, 0, d, d)});
    return out;
}

std::size_t Instrument::dim() const {
    if (outcomes.empty() || outcomes[0].empty()) return 0;
    return static_cast<std::size_t>(outcomes[0][0].rows());
}

void Instrument::validate(std::size_t d) const {
    if (outcomes.empty()) throw InvalidState("instrument without outcomes");
    const auto n = static_cast<Eigen::Index>(d);
    Matrix sum = Matrix::Zero(n, n);
    for (const auto& branch : outcomes)
        for (const auto& k : branch) {
            if (k.rows() != n || k.cols() != n) throw DimensionMismatch("instrument operator has the wrong size");
            sum += k.adjoint() * k;
        }
    if ((sum - Matrix::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidState("instrument is not trace preserving");
}

std::size_t TamperSide::num_outcomes() const { return instruments.empty() ? 0 : instruments[0].num_outcomes(); }

std::size_t TamperSide::class_of(std::uint64_t v) const {
    return classes.empty() ? 0 : classes[static_cast<std::size_t>(v)];
}

std::uint64_t TamperSide::apply(std::size_t outcome, std::uint64_t v) const {
    if (maps.empty() || maps[outcome].empty()) return v;
    return maps[outcome][static_cast<std::size_t>(v)];
}

void TamperSide::validate(unsigned bits, std::size_t quantum_dim) const {
    if (bits > 24) throw SizeLimitExceeded("tampering tables limited to 24-bit registers");
    const std::uint64_t count = std::uint64_t{1} << bits;
    if (instruments.empty()) throw InvalidParams("tampering side without instruments");
    if (classes.empty() && instruments.size() != 1) throw InvalidParams("class table missing");
    if (!classes.empty()) {
        if (classes.size() != count) throw DimensionMismatch("class table size mismatch");
        for (auto c : classes)
            if (c >= instruments.size()) throw InvalidParams("class index without instrument");
    }
    const std::size_t k = instruments[0].num_outcomes();
    for (const auto& ins : instruments) {
        if (ins.num_outcomes() != k) throw InvalidParams("instruments disagree on the outcome count");
        ins.validate(quantum_dim);
    }
    if (!maps.empty() && maps.size() != k) throw InvalidParams("one classical map per outcome required");
    for (const auto& m : maps) {
        if (m.empty()) continue;
        if (m.size() != count) throw DimensionMismatch("classical map size mismatch");
        for (auto v : m)
            if (v >= count) throw InvalidParams("classical map leaves the register");
    }
}

namespace {

Vector default_state(const Vector& v, std::size_t dim) {
    if (v.size() != 0) {
        if (static_cast<std::size_t>(v.size()) != dim) throw DimensionMismatch("shared state has the wrong size");
        if (std::abs(v.norm() - 1.0) > 1e-10) throw InvalidState("shared state is not normalized");
        return v;
    }
    Vector z = Vector::Zero(static_cast<Eigen::Index>(dim));
    z(0) = 1.0;
    return z;
}

std::string w_label(unsigned party) { return "W" + std::to_string(party); }

}  // namespace

Vector SplitAdversary::shared() const { return default_state(shared_state, w1_dim * w2_dim); }

void SplitAdversary::validate(const CodeParams& prm) const {
    prm.validate();
    if (w1_dim == 0 || w2_dim == 0) throw InvalidParams("entanglement registers need dimension >= 1");
    (void)shared();
    side1.validate(prm.ell, w1_dim);
    side2.validate(prm.y_bits(), prm.message_dim() * w2_dim);
}

std::vector<unsigned> ThresholdAdversary::subset() const {
    std::vector<unsigned> T;
    for (const auto& p : parties) T.push_back(p.party);
    return T;
}

Vector ThresholdAdversary::shared() const {
    std::size_t d = 1;
    for (const auto& p : parties) d *= p.w_dim;
    return default_state(shared_state, d);
}

void ThresholdAdversary::validate(const NmssParams& prm) const {
    prm.validate(false);
    if (parties.size() != prm.t) throw InvalidParams("threshold adversary must tamper exactly t shares");
    std::set<unsigned> seen;
    for (std::size_t i = 0; i < parties.size(); ++i) {
        const auto& p = parties[i];
        if (p.party == 0 || p.party > prm.p) throw InvalidParams("party index out of range");
        if (!seen.insert(p.party).second) throw InvalidParams("party listed twice");
        if (i > 0 && p.party < parties[i - 1].party) throw InvalidParams("parties must be listed in increasing order");
        if (p.w_dim == 0) throw InvalidParams("entanglement registers need dimension >= 1");
        p.side.validate(lr_share_bits(prm.lrss()), prm.left_capacity() * p.w_dim);
    }
    (void)shared();
}

Vector LeakageAdversary::shared() const {
    std::size_t d = 1;
    for (auto w : w_dims) d *= w;
    return default_state(shared_state, d);
}

void LeakageAdversary::validate(const LrssParams& prm) const {
    if (w_dims.size() != prm.p) throw InvalidParams("one entanglement register per party");
    for (auto w : w_dims)
        if (w == 0) throw InvalidParams("entanglement registers need dimension >= 1");
    std::set<unsigned> T(unauthorized.begin(), unauthorized.end());
    if (T.size() != unauthorized.size()) throw InvalidParams("party listed twice");
    if (T.size() >= 2) throw InvalidParams("leakage is defined for unauthorized sets (|T| < 2)");
    for (unsigned i : T)
        if (i == 0 || i > prm.p) throw InvalidParams("party index out of range");
    std::set<unsigned> leaking;
    const std::uint64_t count = std::uint64_t{1} << lr_share_bits(prm);
    for (const auto& l : leaks) {
        if (l.party == 0 || l.party > prm.p || T.count(l.party)) throw InvalidParams("leakage from an invalid party");
        if (!leaking.insert(l.party).second) throw InvalidParams("two leakage channels for one party");
        if (l.w_dim != w_dims[l.party - 1]) throw DimensionMismatch("leakage input does not match W_j");
        if (std::log2(static_cast<double>(l.z_dim)) > prm.ell_leak + 1e-9)
            throw InvalidParams("leakage exceeds the budget");
        if (l.kraus.empty()) throw InvalidParams("leakage channel without Kraus operators");
        if (l.classes.empty() && l.kraus.size() != 1) throw InvalidParams("class table missing");
        if (!l.classes.empty()) {
            if (l.classes.size() != count) throw DimensionMismatch("class table size mismatch");
            for (auto c : l.classes)
                if (c >= l.kraus.size()) throw InvalidParams("class index without channel");
        }
        const auto w = static_cast<Eigen::Index>(l.w_dim);
        for (const auto& ks : l.kraus) {
            Matrix sum = Matrix::Zero(w, w);
            for (const auto& k : ks) {
                if (k.rows() != static_cast<Eigen::Index>(l.z_dim) || k.cols() != w)
                    throw DimensionMismatch("leakage Kraus operator has the wrong size");
                sum += k.adjoint() * k;
            }
            if ((sum - Matrix::Identity(w, w)).cwiseAbs().maxCoeff() > 1e-10)
                throw InvalidState("leakage channel is not trace preserving");
        }
    }
    if (leaking.size() + T.size() != prm.p) throw InvalidParams("every party outside T needs a leakage channel");
    (void)shared();
}

// ------------------------------------------------------------- common core

namespace {

// A quantum branch before decoding together with the classical weights of
// its decoding keys. z is sub-normalized on Z and the external registers.
struct Branch {
    std::uint64_t r = 0;
    Operator z;
    double same = 0.0;          // (X', Y') = (X, Y): decoded with r
    std::vector<double> tamp;   // decoded with the indexed key
    double fresh = 0.0;         // decoded with a fresh uniform key
};

void check_message(const DensityOperator& sigma, const std::string& label, std::size_t d) {
    if (!sigma.layout().contains(label)) throw LayoutError("message register '" + label + "' not found");
    if (sigma.layout().dim_of(label) != d) throw DimensionMismatch("message register must have dimension 2^b");
    for (const auto& l : sigma.layout().labels())
        if (l != label && (l == kCodewordZ || l == "Y" || l == kLeftRegister || l.rfind("W", 0) == 0 ||
                           l.rfind(kLeftPrefix, 0) == 0))
            throw LayoutError("external register name '" + l + "' is reserved by the harness");
}

Operator masked(const Operator& sigma, const std::string& label, const Matrix& u) {
    Operator out = conjugate_local(sigma, {label}, u);
    out.layout = out.layout.renamed(label, kCodewordZ);
    return out;
}

Operator decoded(const Operator& z, const Matrix& u, const std::string& label) {
    Operator out = conjugate_local(z, {kCodewordZ}, u.adjoint());
    out.layout = out.layout.renamed(kCodewordZ, label);
    return out;
}

Operator twirl_decoded(const Operator& z, const CodeParams& prm, const std::string& label) {
    const std::uint64_t nk = num_keys(prm);
    Operator acc = decoded(z, key_unitary(prm, 0), label);
    for (std::uint64_t k = 1; k < nk; ++k) acc.matrix += decoded(z, key_unitary(prm, k), label).matrix;
    acc.matrix /= static_cast<double>(nk);
    return acc;
}

void add_into(Operator& acc, const Operator& term, double w) {
    if (w == 0.0) return;
    if (acc.matrix.size() == 0) {
        acc = Operator(w * term.matrix, term.layout);
        return;
    }
    if (!(acc.layout == term.layout)) throw LayoutError("branch layouts differ");
    acc.matrix += w * term.matrix;
}

Operator decode_branch(const Branch& br, const CodeParams& prm, const std::string& label) {
    Operator acc;
    add_into(acc, decoded(br.z, key_unitary(prm, br.r), label), br.same);
    for (std::size_t k = 0; k < br.tamp.size(); ++k)
        if (br.tamp[k] != 0.0) add_into(acc, decoded(br.z, key_unitary(prm, k), label), br.tamp[k]);
    if (br.fresh != 0.0) add_into(acc, twirl_decoded(br.z, prm, label), br.fresh);
    return acc;
}

Operator accumulate_final(const std::vector<Branch>& branches, const CodeParams& prm, const std::string& label,
                          const RegisterLayout& out_layout) {
    Operator acc(Matrix::Zero(static_cast<Eigen::Index>(out_layout.total_dim()),
                              static_cast<Eigen::Index>(out_layout.total_dim())),
                 out_layout);
    for (const auto& br : branches) {
        Operator term = decode_branch(br, prm, label);
        if (term.matrix.size() == 0) continue;
        acc.matrix += reorder(term, out_layout.labels()).matrix;
    }
    return acc;
}

Operator max_entangled_zm(std::size_t d) {
    const Vector phi = max_entangled(d);
    return Operator(phi * phi.adjoint(), RegisterLayout{{kCodewordZ, d}, {kHatLabel, d}});
}

// Branches from a run on the unmasked maximally entangled input (Z, Mh).
Simulator simulator_from(const std::vector<Branch>& branches, const CodeParams& prm) {
    const std::size_t d = prm.message_dim();
    const auto di = static_cast<Eigen::Index>(d);
    Simulator sim;
    Matrix theta = Matrix::Zero(di * di, di * di);
    Operator tamp_m(Matrix::Zero(di, di), RegisterLayout{{"M", d}});
    for (const auto& br : branches) {
        const Operator z = reorder(br.z, {kCodewordZ, kHatLabel});
        if (br.same != 0.0) {
            sim.p_same += br.same * z.matrix.trace().real();
            theta += br.same * z.matrix;
        }
        Branch t = br;
        t.same = 0.0;
        t.z = partial_trace(z, {kHatLabel});
        const Operator m = decode_branch(t, prm, "M");
        if (m.matrix.size() != 0) tamp_m.matrix += m.matrix;
    }
    if (sim.p_same > 1e-15) {
        const Vector phi = max_entangled(d);
        sim.p_epr = std::clamp((phi.adjoint() * theta * phi)(0, 0).real() / sim.p_same, 0.0, 1.0);
    } else {
        sim.p_same = std::max(sim.p_same, 0.0);
        sim.p_epr = 0.0;
    }
    sim.p_A = sim.p_same * sim.p_epr;
    const Matrix u = Matrix::Identity(di, di) / static_cast<double>(d);
    const double rest = 1.0 - sim.p_A;
    if (rest < 1e-14) {
        sim.gamma = u;
    } else {
        sim.gamma = (sim.p_same * (1.0 - sim.p_epr) * u + tamp_m.matrix) / rest;
    }
    return sim;
}

// ------------------------------------------------------------ split-state

struct NmcCell {
    double same = 0.0;
    std::vector<double> tamp;
    double fresh = 0.0;
};

struct NmcKey {
    std::uint64_t r;
    std::size_t c1, k1, c2, k2;
    bool operator<(const NmcKey& o) const {
        return std::tie(r, c1, k1, c2, k2) < std::tie(o.r, o.c1, o.k1, o.c2, o.k2);
    }
};

std::map<NmcKey, NmcCell> nmc_cells(const SplitAdversary& adv, const CodeParams& prm, bool collapse_r) {
    const unsigned yb = prm.y_bits();
    const std::size_t nx = std::size_t{1} << prm.ell;
    const std::size_t ny = std::size_t{1} << yb;
    const std::size_t C1 = adv.side1.num_classes(), K1 = adv.side1.num_outcomes();
    const std::size_t C2 = adv.side2.num_classes(), K2 = adv.side2.num_outcomes();
    const std::uint64_t nk = num_keys(prm);
    std::map<NmcKey, NmcCell> cells;
    auto cell = [&](const NmcKey& key) -> NmcCell& {
        auto& c = cells[key];
        if (c.tamp.empty() && prm.key_source == KeySource::Extractor) c.tamp.assign(nk, 0.0);
        return c;
    };

    if (prm.key_source == KeySource::Ideal) {
        // Sides act on independent uniform strings: tally each separately.
        std::vector<double> t1(C1 * K1 * 2, 0.0), t2(C2 * K2 * 2, 0.0);
        for (std::size_t x = 0; x < nx; ++x) {
            const std::size_t c = adv.side1.class_of(x);
            for (std::size_t k = 0; k < K1; ++k)
                t1[(c * K1 + k) * 2 + (adv.side1.apply(k, x) == x ? 1 : 0)] += 1.0 / static_cast<double>(nx);
        }
        for (std::size_t y = 0; y < ny; ++y) {
            const std::size_t c = adv.side2.class_of(y);
            for (std::size_t k = 0; k < K2; ++k)
                t2[(c * K2 + k) * 2 + (adv.side2.apply(k, y) == y ? 1 : 0)] += 1.0 / static_cast<double>(ny);
        }
        const auto kd = key_distribution(prm);
        for (std::size_t c1 = 0; c1 < C1; ++c1)
            for (std::size_t k1 = 0; k1 < K1; ++k1)
                for (std::size_t c2 = 0; c2 < C2; ++c2)
                    for (std::size_t k2 = 0; k2 < K2; ++k2) {
                        const double* a = &t1[(c1 * K1 + k1) * 2];
                        const double* b = &t2[(c2 * K2 + k2) * 2];
                        const double total = (a[0] + a[1]) * (b[0] + b[1]);
                        if (total == 0.0) continue;
                        const double same = a[1] * b[1];
                        if (collapse_r) {
                            auto& c = cell({0, c1, k1, c2, k2});
                            c.same += same;
                            c.fresh += total - same;
                        } else {
                            for (std::uint64_t r = 0; r < nk; ++r) {
                                auto& c = cell({r, c1, k1, c2, k2});
                                c.same += kd[r] * same;
                                c.fresh += kd[r] * (total - same);
                            }
                        }
                    }
        return cells;
    }

    const auto table = extractor_key_table(prm);
    const double w = 1.0 / static_cast<double>(nx * ny);
    std::vector<std::size_t> cy(ny);
    std::vector<std::uint64_t> gy(ny * K2);
    for (std::size_t y = 0; y < ny; ++y) {
        cy[y] = adv.side2.class_of(y);
        for (std::size_t k = 0; k < K2; ++k) gy[y * K2 + k] = adv.side2.apply(k, y);
    }
    // Dense accumulation per (r, c1, k1, c2, k2), folded into the map at the end.
    const std::size_t inner = C1 * K1 * C2 * K2;
    std::vector<double> same(nk * inner, 0.0), tamp(nk * inner * nk, 0.0);
    for (std::size_t x = 0; x < nx; ++x) {
        const std::size_t c1 = adv.side1.class_of(x);
        for (std::size_t k1 = 0; k1 < K1; ++k1) {
            const std::uint64_t xp = adv.side1.apply(k1, x);
            for (std::size_t y = 0; y < ny; ++y) {
                const std::uint64_t r = collapse_r ? 0 : table[(x << yb) | y];
                for (std::size_t k2 = 0; k2 < K2; ++k2) {
                    const std::uint64_t yp = gy[y * K2 + k2];
                    const std::size_t slot = r * inner + ((c1 * K1 + k1) * C2 + cy[y]) * K2 + k2;
                    if (xp == x && yp == y) {
                        same[slot] += w;
                    } else {
                        tamp[slot * nk + table[(xp << yb) | yp]] += w;
                    }
                }
            }
        }
    }
    for (std::uint64_t r = 0; r < nk; ++r)
        for (std::size_t c1 = 0; c1 < C1; ++c1)
            for (std::size_t k1 = 0; k1 < K1; ++k1)
                for (std::size_t c2 = 0; c2 < C2; ++c2)
                    for (std::size_t k2 = 0; k2 < K2; ++k2) {
                        const std::size_t slot = r * inner + ((c1 * K1 + k1) * C2 + c2) * K2 + k2;
                        double total = same[slot];
                        for (std::uint64_t k = 0; k < nk; ++k) total += tamp[slot * nk + k];
                        if (total == 0.0) continue;
                        auto& c = cell({r, c1, k1, c2, k2});
                        c.same = same[slot];
                        for (std::uint64_t k = 0; k < nk; ++k) c.tamp[k] = tamp[slot * nk + k];
                    }
    return cells;
}

Operator with_shared_state(const Operator& rho, const SplitAdversary& adv) {
    const Vector psi = adv.shared();
    return tensor(rho, Operator(psi * psi.adjoint(), RegisterLayout{{"W1", adv.w1_dim}, {"W2", adv.w2_dim}}));
}

Operator apply_branch_ops(const Operator& rho, const std::vector<Matrix>& ops, const std::vector<std::string>& targets) {
    std::vector<Register> regs;
    for (const auto& t : targets) regs.push_back({t, rho.layout.dim_of(t)});
    return apply_kraus_local(rho, targets, ops, RegisterLayout(regs));
}

// Tampered state for one cell, W registers kept.
Operator tampered(const Operator& with_w, const SplitAdversary& adv, const NmcKey& key) {
    const Operator a = apply_branch_ops(with_w, adv.side1.instruments[key.c1].outcomes[key.k1], {"W1"});
    return apply_branch_ops(a, adv.side2.instruments[key.c2].outcomes[key.k2], {kCodewordZ, "W2"});
}

std::vector<Branch> nmc_branches(const SplitAdversary& adv, const CodeParams& prm,
                                 const std::function<Operator(std::uint64_t)>& prepare, bool collapse_r) {
    const auto cells = nmc_cells(adv, prm, collapse_r);
    std::vector<Branch> out;
    std::map<std::uint64_t, Operator> prepared;
    for (const auto& [key, cell] : cells) {
        auto it = prepared.find(key.r);
        if (it == prepared.end()) it = prepared.emplace(key.r, with_shared_state(prepare(key.r), adv)).first;
        Branch br;
        br.r = key.r;
        br.z = partial_trace(tampered(it->second, adv, key), {"W1", "W2"});
        br.same = cell.same;
        br.tamp = cell.tamp;
        br.fresh = cell.fresh;
        out.push_back(std::move(br));
    }
    return out;
}

}  // namespace

Operator run_nmc_experiment(const SplitAdversary& adv, const DensityOperator& sigma, const std::string& label,
                            const CodeParams& prm) {
    adv.validate(prm);
    check_message(sigma, label, prm.message_dim());
    const auto branches = nmc_branches(
        adv, prm, [&](std::uint64_t r) { return masked(sigma.op(), label, key_unitary(prm, r)); }, false);
    return accumulate_final(branches, prm, label, sigma.layout());
}

Simulator build_simulator(const SplitAdversary& adv, const CodeParams& prm) {
    adv.validate(prm);
    const Operator phi = max_entangled_zm(prm.message_dim());
    const auto branches = nmc_branches(adv, prm, [&](std::uint64_t) { return phi; }, true);
    return simulator_from(branches, prm);
}

double simulator_distance(const Operator& eta, const Simulator& sim, const DensityOperator& sigma,
                          const std::string& label) {
    const std::size_t d = sigma.layout().dim_of(label);
    std::vector<std::string> ext;
    for (const auto& l : sigma.layout().labels())
        if (l != label) ext.push_back(l);
    Operator product(sim.gamma, RegisterLayout{{label, d}});
    if (!ext.empty()) product = tensor(product, marginal(sigma.op(), ext));
    product = reorder(product, sigma.layout().labels());
    const Operator e = reorder(eta, sigma.layout().labels());
    return trace_norm(e.matrix - (sim.p_A * sigma.matrix() + (1.0 - sim.p_A) * product.matrix));
}

ExperimentResult nm_check(const SplitAdversary& adv, const DensityOperator& sigma, const std::string& label,
                          const CodeParams& prm) {
    ExperimentResult res;
    res.adversary = adv.name;
    res.final_state = run_nmc_experiment(adv, sigma, label, prm);
    res.simulator = build_simulator(adv, prm);
    res.epsilon = simulator_distance(res.final_state, res.simulator, sigma, label);
    return res;
}

StageReport transpose_delay_check(const SplitAdversary& adv, const CodeParams& prm) {
    adv.validate(prm);
    const std::size_t d = prm.message_dim();
    const Operator theta0 = with_shared_state(max_entangled_zm(d), adv);
    const auto cells = nmc_cells(adv, prm, false);
    const std::uint64_t nk = num_keys(prm);
    StageReport rep;
    auto dev = [](const Operator& a, const Operator& b) {
        return (a.matrix - reorder(b, a.layout.labels()).matrix).cwiseAbs().maxCoeff();
    };
    auto upd = [&](std::size_t i, double v) { rep.stage_deviation[i] = std::max(rep.stage_deviation[i], v); };

    const RegisterLayout out_layout{{"M", d}, {kHatLabel, d}};
    Operator delayed(Matrix::Zero(static_cast<Eigen::Index>(d * d), static_cast<Eigen::Index>(d * d)), out_layout);
    for (const auto& [key, cell] : cells) {
        const Matrix& cr = key_unitary(prm, key.r);
        const Matrix crt = cr.transpose();
        // Direct pipeline: Clifford on Z, tampering, decoding.
        const Operator sigma1 = conjugate_local(theta0, {kCodewordZ}, cr);
        const Operator sigma2 = tampered(sigma1, adv, key);
        // Transposed pipeline: no Clifford, tampering, then the delayed corrections.
        const Operator theta2 = tampered(theta0, adv, key);
        upd(0, 0.0);
        upd(1, dev(sigma1, conjugate_local(theta0, {kHatLabel}, crt)));
        upd(2, dev(sigma2, conjugate_local(theta2, {kHatLabel}, crt)));

        std::vector<std::pair<std::uint64_t, double>> rprime;
        if (cell.same != 0.0) rprime.emplace_back(key.r, cell.same);
        for (std::uint64_t k = 0; k < cell.tamp.size(); ++k)
            if (cell.tamp[k] != 0.0) rprime.emplace_back(k, cell.tamp[k]);
        if (cell.fresh != 0.0)
            for (std::uint64_t k = 0; k < nk; ++k) rprime.emplace_back(k, cell.fresh / static_cast<double>(nk));
        for (const auto& [rp, w] : rprime) {
            const Matrix dag = key_unitary(prm, rp).adjoint();
            const Operator sigma3 = conjugate_local(sigma2, {kCodewordZ}, dag);
            const Operator theta4 = conjugate_local(conjugate_local(theta2, {kCodewordZ}, dag), {kHatLabel}, crt);
            upd(3, dev(sigma3, theta4));
            Operator fin = partial_trace(theta4, {"W1", "W2"});
            fin.layout = fin.layout.renamed(kCodewordZ, "M");
            delayed.matrix += w * reorder(fin, out_layout.labels()).matrix;
            ++rep.branches;
        }
    }
    const DensityOperator phi(max_entangled_zm(d).matrix, out_layout);
    const Operator direct = run_nmc_experiment(adv, phi, "M", prm);
    rep.final_deviation = (direct.matrix - delayed.matrix).cwiseAbs().maxCoeff();
    return rep;
}

Rejection rejection_condition(const DensityOperator& target, const Operator& average_final, const std::string& label) {
    const std::size_t d = target.dim();
    if (target.layout().size() != 1) throw LayoutError("target must live on the message register alone");
    if (average_final.layout.dim_of(label) != d || average_final.layout.dim_of(kHatLabel) != d)
        throw DimensionMismatch("final state does not carry message and purification registers");
    const double lmax = lambda_max(target.matrix());
    if (!(lmax > 0.0)) throw InvalidState("target has empty support");
    Rejection rej;
    rej.kraus = psd_sqrt(target.matrix()).transpose() / std::sqrt(lmax);
    Operator cond = conjugate_local(average_final, {kHatLabel}, rej.kraus);
    rej.success_probability = cond.matrix.trace().real();
    if (rej.success_probability <= 0.0) throw ZeroProbability("rejection sampling never succeeds");
    cond.matrix /= rej.success_probability;
    rej.state = std::move(cond);
    return rej;
}

// ------------------------------------------------------------- threshold

namespace {

std::size_t digit(std::size_t index, const std::vector<std::size_t>& radix, std::size_t pos) {
    for (std::size_t i = radix.size(); i-- > pos + 1;) index /= radix[i];
    return index % radix[pos];
}

std::vector<Branch> nmss_branches(const ThresholdAdversary& adv, const NmssParams& prm,
                                  const std::function<Operator(std::uint64_t)>& prepare, bool collapse_r) {
    const CodeParams& code = prm.code;
    const LrssParams lp = prm.lrss();
    const auto T = adv.subset();
    const std::size_t t = T.size();
    const std::size_t nx = std::size_t{1} << code.ell;
    const std::size_t ny = std::size_t{1} << code.y_bits();
    const bool ideal = code.key_source == KeySource::Ideal;
    const std::uint64_t nk = num_keys(code);

    std::vector<std::size_t> cr(t), kr(t);
    std::size_t ncomb = 1, kcomb = 1;
    for (std::size_t i = 0; i < t; ++i) {
        cr[i] = adv.parties[i].side.num_classes();
        kr[i] = adv.parties[i].side.num_outcomes();
        ncomb *= cr[i];
        kcomb *= kr[i];
    }

    // Classical transition: weight[c][k][x * nx + x'] given x.
    std::vector<std::vector<std::vector<double>>> wt(ncomb, std::vector<std::vector<double>>(kcomb));
    const unsigned a = T[0], b = T[1];
    for (std::size_t x = 0; x < nx; ++x)
        for (const auto& [tuple, w] : lrshare_2p_law(static_cast<GF2k::Elem>(x), lp)) {
            std::size_t c = 0;
            for (std::size_t i = 0; i < t; ++i) c = c * cr[i] + adv.parties[i].side.class_of(tuple[T[i] - 1]);
            for (std::size_t k = 0; k < kcomb; ++k) {
                const std::uint64_t ra = adv.parties[0].side.apply(digit(k, kr, 0), tuple[a - 1]);
                const std::uint64_t rb = adv.parties[1].side.apply(digit(k, kr, 1), tuple[b - 1]);
                const LrShare sa = unpack_lr_share(ra, a, lp), sb = unpack_lr_share(rb, b, lp);
                const auto xp = static_cast<std::size_t>(lrrec2(sa.sub.at(b), sb.sub.at(a)));
                auto& v = wt[c][k];
                if (v.empty()) v.assign(nx * nx, 0.0);
                v[x * nx + xp] += w;
            }
        }

    // (y, r) pairs with weight per x.
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::vector<double>> yr;
    const auto kd = key_distribution(code);
    const double pxy = 1.0 / static_cast<double>(nx * ny);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y) {
            if (collapse_r) {
                auto& v = yr[{y, 0}];
                if (v.empty()) v.assign(nx, 0.0);
                v[x] += pxy;
            } else if (ideal) {
                for (std::uint64_t r = 0; r < nk; ++r) {
                    auto& v = yr[{y, r}];
                    if (v.empty()) v.assign(nx, 0.0);
                    v[x] += pxy * kd[r];
                }
            } else {
                auto& v = yr[{y, extractor_key(code, x, y)}];
                if (v.empty()) v.assign(nx, 0.0);
                v[x] += pxy;
            }
        }

    std::vector<std::string> unused;
    for (unsigned i = 1; i <= prm.p; ++i)
        if (std::find(T.begin(), T.end(), i) == T.end()) unused.push_back(left_share_label(i));
    std::vector<Register> wregs;
    for (const auto& p : adv.parties) wregs.push_back({w_label(p.party), p.w_dim});
    const Vector psi = adv.shared();
    const Operator psi_op(psi * psi.adjoint(), RegisterLayout(wregs));

    std::vector<Branch> out;
    for (const auto& [ykey, wx] : yr) {
        const auto [y, r] = ykey;
        Operator shares = nmss_left_shares(prepare(r), y, prm);
        if (!unused.empty()) shares = partial_trace(shares, unused);
        const Operator start = tensor(shares, psi_op);

        // Depth-first over parties, tracing W_i once party i has acted.
        std::function<void(std::size_t, const Operator&, std::size_t, std::size_t)> walk =
            [&](std::size_t i, const Operator& rho, std::size_t c, std::size_t k) {
                if (i == t) {
                    const Operator rec = qrec(rho, T, kLeftRegister, prm.qshamir(), kLeftPrefix);
                    const Operator yz = nmss_decode_left(rec, prm);
                    for (std::size_t yp = 0; yp < ny; ++yp) {
                        Matrix proj = Matrix::Zero(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(ny));
                        proj(static_cast<Eigen::Index>(yp), static_cast<Eigen::Index>(yp)) = 1.0;
                        Branch br;
                        br.r = r;
                        br.z = partial_trace(conjugate_local(yz, {"Y"}, proj), {"Y"});
                        if (!ideal) br.tamp.assign(nk, 0.0);
                        const auto& v = wt[c][k];
                        if (v.empty()) continue;
                        for (std::size_t x = 0; x < nx; ++x) {
                            if (wx[x] == 0.0) continue;
                            for (std::size_t xp = 0; xp < nx; ++xp) {
                                const double w = wx[x] * v[x * nx + xp];
                                if (w == 0.0) continue;
                                if (xp == x && yp == y) {
                                    br.same += w;
                                } else if (ideal) {
                                    br.fresh += w;
                                } else {
                                    br.tamp[extractor_key(code, xp, yp)] += w;
                                }
                            }
                        }
                        out.push_back(std::move(br));
                    }
                    return;
                }
                const auto& party = adv.parties[i];
                const std::string li = left_share_label(party.party), wi = w_label(party.party);
                for (std::size_t ci = 0; ci < cr[i]; ++ci)
                    for (std::size_t ki = 0; ki < kr[i]; ++ki) {
                        const Operator next = partial_trace(
                            apply_branch_ops(rho, party.side.instruments[ci].outcomes[ki], {li, wi}), {wi});
                        walk(i + 1, next, c * cr[i] + ci, k * kr[i] + ki);
                    }
            };
        walk(0, start, 0, 0);
    }
    return out;
}

}  // namespace

Simulator build_nmss_simulator(const ThresholdAdversary& adv, const NmssParams& prm) {
    adv.validate(prm);
    const Operator phi = max_entangled_zm(prm.code.message_dim());
    return simulator_from(nmss_branches(adv, prm, [&](std::uint64_t) { return phi; }, true), prm.code);
}

ExperimentResult run_nmss_experiment(const ThresholdAdversary& adv, const DensityOperator& sigma,
                                     const std::string& label, const NmssParams& prm) {
    adv.validate(prm);
    check_message(sigma, label, prm.code.message_dim());
    const auto branches = nmss_branches(
        adv, prm, [&](std::uint64_t r) { return masked(sigma.op(), label, key_unitary(prm.code, r)); }, false);
    ExperimentResult res;
    res.adversary = adv.name;
    res.final_state = accumulate_final(branches, prm.code, label, sigma.layout());
    res.simulator = build_nmss_simulator(adv, prm);
    res.epsilon = simulator_distance(res.final_state, res.simulator, sigma, label);
    return res;
}

// ------------------------------------------------------------- leakage

LeakageReport run_leakage_experiment(const LeakageAdversary& adv, const std::vector<double>& message_law,
                                     const LrssParams& prm) {
    adv.validate(prm);
    const std::size_t q = std::size_t{1} << prm.b;
    if (message_law.size() != q) throw DimensionMismatch("message law needs one entry per field element");

    std::vector<const LeakChannel*> leaks;
    for (const auto& l : adv.leaks) leaks.push_back(&l);
    std::sort(leaks.begin(), leaks.end(), [](auto* x, auto* y) { return x->party < y->party; });
    std::vector<unsigned> T(adv.unauthorized.begin(), adv.unauthorized.end());
    std::sort(T.begin(), T.end());

    // Quantum part per tuple of leakage classes.
    std::vector<Register> wregs;
    for (unsigned j = 1; j <= prm.p; ++j) wregs.push_back({w_label(j), adv.w_dims[j - 1]});
    const Vector psi = adv.shared();
    const Operator psi_op(psi * psi.adjoint(), RegisterLayout(wregs));
    std::map<std::vector<std::uint32_t>, Operator> leaked;
    auto leaked_state = [&](const std::vector<std::uint32_t>& cls) -> const Operator& {
        auto it = leaked.find(cls);
        if (it != leaked.end()) return it->second;
        Operator rho = psi_op;
        for (std::size_t i = 0; i < leaks.size(); ++i) {
            const auto* l = leaks[i];
            rho = apply_kraus_local(rho, {w_label(l->party)}, l->kraus[cls[i]],
                                    RegisterLayout{{"Z" + std::to_string(l->party), l->z_dim}});
        }
        return leaked.emplace(cls, std::move(rho)).first->second;
    };

    // Blocks indexed by (s, S_T).
    using Cells = std::map<std::vector<std::uint64_t>, std::map<std::vector<std::uint32_t>, double>>;
    std::vector<Cells> cells(q);
    for (std::size_t s = 0; s < q; ++s)
        for (const auto& [tuple, w] : lrshare_2p_law(static_cast<GF2k::Elem>(s), prm)) {
            std::vector<std::uint64_t> st;
            for (unsigned i : T) st.push_back(tuple[i - 1]);
            std::vector<std::uint32_t> cls;
            for (const auto* l : leaks)
                cls.push_back(l->classes.empty() ? 0u : l->classes[static_cast<std::size_t>(tuple[l->party - 1])]);
            cells[s][st][cls] += w;
        }
    auto block = [&](const std::map<std::vector<std::uint32_t>, double>& m) {
        Matrix acc;
        for (const auto& [cls, w] : m) {
            const Operator& rho = leaked_state(cls);
            if (acc.size() == 0) acc = Matrix::Zero(rho.matrix.rows(), rho.matrix.cols());
            acc += w * rho.matrix;
        }
        return acc;
    };
    std::map<std::vector<std::uint64_t>, Matrix> gamma;
    for (std::size_t s = 0; s < q; ++s)
        for (const auto& [st, m] : cells[s]) {
            Matrix b = block(m) / static_cast<double>(q);
            auto it = gamma.find(st);
            if (it == gamma.end()) {
                gamma.emplace(st, std::move(b));
            } else {
                it->second += b;
            }
        }
    LeakageReport rep;
    for (std::size_t s = 0; s < q; ++s) {
        if (message_law[s] == 0.0) continue;
        for (const auto& [st, g] : gamma) {
            const auto it = cells[s].find(st);
            const Matrix diff = it == cells[s].end() ? Matrix(-g) : Matrix(block(it->second) - g);
            rep.distance += message_law[s] * trace_norm(diff);
            ++rep.outcomes;
        }
    }
    return rep;
}

LeakageReport run_leakage_experiment(const LeakageAdversary& adv, GF2k::Elem s, const LrssParams& prm) {
    std::vector<double> law(std::size_t{1} << prm.b, 0.0);
    if (s >= law.size()) throw InvalidParams("secret out of range");
    law[s] = 1.0;
    return run_leakage_experiment(adv, law, prm);
}

}  // namespace qnm
