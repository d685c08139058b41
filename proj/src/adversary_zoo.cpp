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

#include "qnm/adversary_zoo.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <numeric>

#include "qnm/errors.hpp"
#include "qnm/pauli_clifford.hpp"

namespace qnm {

Matrix permutation_unitary(const ClassicalMap& map, unsigned bits) {
    const std::size_t n = std::size_t{1} << bits;
    if (map.size() != n) throw DimensionMismatch("map must cover every basis state");
    std::vector<bool> hit(n, false);
    Matrix u = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t v = 0; v < n; ++v) {
        if (map[v] >= n || hit[map[v]]) throw InvalidParams("classical map is not a permutation");
        hit[map[v]] = true;
        u(static_cast<Eigen::Index>(map[v]), static_cast<Eigen::Index>(v)) = 1.0;
    }
    return u;
}

ClassicalMap classical_projection(const Matrix& u) {
    ClassicalMap map(static_cast<std::size_t>(u.cols()));
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        Eigen::Index row = -1;
        for (Eigen::Index r = 0; r < u.rows(); ++r) {
            const double a = std::abs(u(r, c));
            if (a > 1e-12) {
                if (row >= 0 || std::abs(a - 1.0) > 1e-12) throw NotClassical("column is not a basis state");
                row = r;
            }
        }
        if (row < 0) throw NotClassical("empty column");
        map[static_cast<std::size_t>(c)] = static_cast<std::uint64_t>(row);
    }
    return map;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

struct Call {
    std::string name;
    std::string args;
};

Call split_call(const std::string& spec) {
    const std::string s = trim(spec);
    const auto open = s.find('(');
    if (open == std::string::npos) return {s, ""};
    if (s.back() != ')') throw ConfigError("malformed adversary spec '" + spec + "'");
    return {trim(s.substr(0, open)), trim(s.substr(open + 1, s.size() - open - 2))};
}

std::uint64_t parse_uint(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw ConfigError("expected a non-negative integer for " + what + ", got '" + text + "'");
    try {
        return std::stoull(t);
    } catch (const std::exception&) {
        throw ConfigError("integer out of range for " + what);
    }
}

std::pair<std::string, std::string> split_pair(const std::string& args, char sep, const std::string& what) {
    const auto pos = args.find(sep);
    if (pos == std::string::npos) throw ConfigError(what + " expects two arguments separated by '" + sep + "'");
    return {trim(args.substr(0, pos)), trim(args.substr(pos + 1))};
}

ClassicalMap random_permutation(std::size_t n, Rng& rng) {
    ClassicalMap m(n);
    std::iota(m.begin(), m.end(), std::uint64_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(m[i - 1], m[static_cast<std::size_t>(rng.below(i))]);
    return m;
}

ClassicalMap classical_function(const std::string& text, unsigned bits) {
    const std::size_t n = std::size_t{1} << bits;
    const std::uint64_t mask = n - 1;
    const std::string t = trim(text);
    if (t == "id") {
        ClassicalMap m(n);
        std::iota(m.begin(), m.end(), std::uint64_t{0});
        return m;
    }
    const auto [kind, arg] = split_pair(t, ':', "classical function '" + t + "'");
    const std::uint64_t k = parse_uint(arg, kind);
    ClassicalMap m(n);
    if (kind == "perm") {
        Rng rng(k);
        return random_permutation(n, rng);
    }
    if (kind != "xor" && kind != "add" && kind != "mul" && kind != "const")
        throw ConfigError("unknown classical function '" + kind + "'");
    if (kind == "mul" && k % 2 == 0) throw ConfigError("mul:k needs an odd k to stay bijective");
    if ((kind == "xor" || kind == "const") && k > mask) throw ConfigError("constant does not fit the register");
    for (std::uint64_t v = 0; v < n; ++v) {
        if (kind == "xor") m[v] = v ^ k;
        if (kind == "add") m[v] = (v + k) & mask;
        if (kind == "mul") m[v] = (v * k) & mask;
        if (kind == "const") m[v] = k;
    }
    return m;
}

TamperSide identity_side(std::size_t dim) {
    TamperSide s;
    s.instruments.push_back(Instrument::identity(dim));
    return s;
}

TamperSide map_side(std::size_t dim, ClassicalMap map) {
    TamperSide s = identity_side(dim);
    s.maps.push_back(std::move(map));
    return s;
}

Matrix swap_unitary(std::size_t d) {
    const auto n = static_cast<Eigen::Index>(d);
    Matrix u = Matrix::Zero(n * n, n * n);
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) u(b * n + a, a * n + b) = 1.0;
    return u;
}

Matrix shift_unitary(std::size_t d, std::uint64_t k) {
    const auto n = static_cast<Eigen::Index>(d);
    Matrix u = Matrix::Zero(n, n);
    for (Eigen::Index v = 0; v < n; ++v) u((v + static_cast<Eigen::Index>(k)) % n, v) = 1.0;
    return u;
}

// Two-outcome instrument from a Haar dilation; outcome 1 flips a random
// nonzero mask of the classical value, classes follow the lowest bit.
TamperSide haar_side(std::size_t qdim, unsigned bits, Rng& rng) {
    TamperSide s;
    const std::size_t n = std::size_t{1} << bits;
    const std::size_t classes = bits > 0 ? 2 : 1;
    if (classes == 2) {
        s.classes.resize(n);
        for (std::size_t v = 0; v < n; ++v) s.classes[v] = static_cast<std::uint32_t>(v & 1);
    }
    for (std::size_t c = 0; c < classes; ++c)
        s.instruments.push_back(Instrument::from_dilation(haar_unitary(2 * qdim, rng), 2, qdim));
    ClassicalMap flip(n);
    const std::uint64_t mask = bits > 0 ? 1 + rng.below(n - 1) : 0;
    for (std::uint64_t v = 0; v < n; ++v) flip[v] = v ^ mask;
    s.maps = {ClassicalMap{}, flip};
    return s;
}

}  // namespace

SplitAdversary make_split_adversary(const std::string& spec, const CodeParams& prm) {
    prm.validate();
    const Call call = split_call(spec);
    const std::size_t d = prm.message_dim();
    const unsigned yb = prm.y_bits();
    SplitAdversary adv;
    adv.name = trim(spec);
    adv.side1 = identity_side(1);
    adv.side2 = identity_side(d);

    if (call.name == "identity" && call.args.empty()) {
    } else if (call.name == "constant_replace") {
        if (call.args.empty()) throw ConfigError("constant_replace needs a part list");
        for (char c : call.args) {
            if (c == 'X') {
                adv.side1.maps = {ClassicalMap(std::size_t{1} << prm.ell, 0)};
            } else if (c == 'Y') {
                adv.side2.maps = {ClassicalMap(std::size_t{1} << yb, 0)};
            } else if (c == 'Z') {
                std::vector<Matrix> kraus;
                for (std::size_t j = 0; j < d; ++j) {
                    Matrix k = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
                    k(0, static_cast<Eigen::Index>(j)) = 1.0;
                    kraus.push_back(k);
                }
                adv.side2.instruments = {Instrument::channel(std::move(kraus))};
            } else {
                throw ConfigError("constant_replace parts are X, Y and Z");
            }
        }
    } else if (call.name == "pauli") {
        const auto [reg, arg] = split_pair(call.args, ':', "pauli");
        if (reg == "Z") {
            const PauliOp p = PauliOp::parse(arg);
            if (p.n != prm.b) throw ConfigError("Pauli string length must equal b");
            adv.side2 = TamperSide{{}, {Instrument::unitary(pauli_dense(p))}, {}};
        } else if (reg == "X") {
            adv.side1 = map_side(1, classical_function("xor:" + arg, prm.ell));
        } else if (reg == "Y") {
            adv.side2 = map_side(d, classical_function("xor:" + arg, yb));
        } else {
            throw ConfigError("pauli targets X, Y or Z");
        }
    } else if (call.name == "swap_entangled" && call.args.empty()) {
        adv.w1_dim = adv.w2_dim = d;
        adv.shared_state = max_entangled(d);
        adv.side1 = identity_side(d);
        adv.side2 = TamperSide{{}, {Instrument::unitary(swap_unitary(d))}, {}};
    } else if (call.name == "haar_random") {
        Rng rng(parse_uint(call.args, "haar_random seed"));
        adv.w1_dim = adv.w2_dim = 2;
        adv.shared_state = haar_state(4, rng);
        adv.side1 = haar_side(2, prm.ell, rng);
        adv.side2 = haar_side(2 * d, yb, rng);
    } else if (call.name == "classical") {
        const auto [f, g] = split_pair(call.args, ',', "classical");
        adv.side1 = map_side(1, classical_function(f, prm.ell));
        adv.side2 = map_side(d, classical_function(g, yb));
    } else if (call.name == "classical_random") {
        Rng rng(parse_uint(call.args, "classical_random seed"));
        adv.side1 = map_side(1, random_permutation(std::size_t{1} << prm.ell, rng));
        adv.side2 = map_side(d, random_permutation(std::size_t{1} << yb, rng));
    } else {
        throw ConfigError("unknown split-state adversary '" + spec + "'");
    }
    adv.validate(prm);
    return adv;
}

std::vector<std::string> split_zoo_names(const CodeParams& prm) {
    const std::string px = "X" + std::string(prm.b - 1, 'I');
    const std::string py = "Y" + std::string(prm.b - 1, 'I');
    return {"identity",
            "constant_replace(XYZ)",
            "constant_replace(Z)",
            "pauli(Z:" + px + ")",
            "pauli(Z:" + py + ")",
            "pauli(X:1)",
            "swap_entangled",
            "classical(xor:1,add:1)",
            "classical(mul:3,id)",
            "classical_random(7)",
            "haar_random(1)",
            "haar_random(2)"};
}

ThresholdAdversary make_threshold_adversary(const std::string& spec, const NmssParams& prm) {
    prm.validate(false);
    const Call call = split_call(spec);
    const std::size_t q = prm.left_capacity();
    const unsigned bits = lr_share_bits(prm.lrss());
    ThresholdAdversary adv;
    adv.name = trim(spec);
    for (unsigned i = 1; i <= prm.t; ++i) adv.parties.push_back({i, 1, identity_side(q)});
    auto party = [&](const std::string& text) -> PartyTamper& {
        const auto i = parse_uint(text, "party");
        if (i == 0 || i > prm.t) throw ConfigError("party must lie in 1..t");
        return adv.parties[i - 1];
    };

    if (call.name == "identity" && call.args.empty()) {
    } else if (call.name == "pauli_left") {
        const auto [i, k] = split_pair(call.args, ':', "pauli_left");
        party(i).side = TamperSide{{}, {Instrument::unitary(shift_unitary(q, parse_uint(k, "shift") % q))}, {}};
    } else if (call.name == "r_xor") {
        const auto [i, m] = split_pair(call.args, ':', "r_xor");
        party(i).side = map_side(q, classical_function("xor:" + m, bits));
    } else if (call.name == "haar_random") {
        Rng rng(parse_uint(call.args, "haar_random seed"));
        // Entanglement only between the first two parties keeps dimensions small.
        std::size_t wtot = 1;
        for (auto& p : adv.parties) {
            p.w_dim = p.party <= 2 ? 2 : 1;
            wtot *= p.w_dim;
            p.side = haar_side(q * p.w_dim, bits, rng);
        }
        adv.shared_state = haar_state(wtot, rng);
    } else {
        throw ConfigError("unknown threshold adversary '" + spec + "'");
    }
    adv.validate(prm);
    return adv;
}

LeakageAdversary make_leakage_adversary(const std::string& spec, const std::vector<unsigned>& unauthorized,
                                        const LrssParams& prm) {
    const Call call = split_call(spec);
    if (!call.args.empty()) throw ConfigError("leakage strategies take no arguments");
    LeakageAdversary adv;
    adv.name = trim(spec);
    adv.unauthorized = unauthorized;
    adv.w_dims.assign(prm.p, 1);
    const std::size_t n = std::size_t{1} << lr_share_bits(prm);
    std::vector<unsigned> leakers;
    for (unsigned j = 1; j <= prm.p; ++j)
        if (std::find(unauthorized.begin(), unauthorized.end(), j) == unauthorized.end()) leakers.push_back(j);

    if (call.name == "constant") {
        for (unsigned j : leakers) adv.leaks.push_back({j, 1, 1, {}, {{Matrix::Ones(1, 1)}}});
    } else if (call.name == "parity") {
        for (unsigned j : leakers) {
            LeakChannel l{j, 1, 2, std::vector<std::uint32_t>(n), {}};
            for (std::size_t v = 0; v < n; ++v) l.classes[v] = static_cast<std::uint32_t>(std::popcount(v) & 1);
            for (int c = 0; c < 2; ++c) {
                Matrix k = Matrix::Zero(2, 1);
                k(c, 0) = 1.0;
                l.kraus.push_back({k});
            }
            adv.leaks.push_back(std::move(l));
        }
    } else if (call.name == "teleport") {
        const Matrix x = shift_unitary(2, 1);
        for (unsigned j : leakers) {
            adv.w_dims[j - 1] = 2;
            LeakChannel l{j, 2, 2, std::vector<std::uint32_t>(n), {{Matrix::Identity(2, 2)}, {x}}};
            for (std::size_t v = 0; v < n; ++v) l.classes[v] = static_cast<std::uint32_t>(v & 1);
            adv.leaks.push_back(std::move(l));
        }
        const std::size_t m = leakers.size();
        if (!unauthorized.empty() && m > 0) {
            // One EPR pair per leaker, all halves held by the lowest party of T.
            const unsigned holder = *std::min_element(unauthorized.begin(), unauthorized.end());
            adv.w_dims[holder - 1] = std::size_t{1} << m;
            std::size_t total = 1;
            for (auto w : adv.w_dims) total *= w;
            Vector psi = Vector::Zero(static_cast<Eigen::Index>(total));
            for (std::size_t a = 0; a < (std::size_t{1} << m); ++a) {
                std::size_t index = 0;
                for (unsigned j = 1; j <= prm.p; ++j) {
                    std::size_t v = 0;
                    if (j == holder) {
                        v = a;
                    } else {
                        const auto pos = static_cast<std::size_t>(
                            std::find(leakers.begin(), leakers.end(), j) - leakers.begin());
                        if (pos < m) v = (a >> (m - 1 - pos)) & 1;
                    }
                    index = index * adv.w_dims[j - 1] + v;
                }
                psi(static_cast<Eigen::Index>(index)) = 1.0 / std::sqrt(static_cast<double>(std::size_t{1} << m));
            }
            adv.shared_state = psi;
        }
    } else {
        throw ConfigError("unknown leakage adversary '" + spec + "'");
    }
    adv.validate(prm);
    return adv;
}

}  // namespace qnm
