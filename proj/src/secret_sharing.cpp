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

#include "qnm/secret_sharing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qnm/errors.hpp"

namespace qnm {

namespace {

constexpr std::size_t kMaxBaseCodeDim = 1u << 15;

std::uint64_t mod_pow(std::uint64_t a, std::uint64_t e, std::uint64_t q) {
    std::uint64_t r = 1 % q;
    a %= q;
    while (e) {
        if (e & 1) r = r * a % q;
        a = a * a % q;
        e >>= 1;
    }
    return r;
}

std::uint64_t mod_inv(std::uint64_t a, std::uint64_t q) {
    if (a % q == 0) throw InvalidParams("no inverse of zero");
    return mod_pow(a, q - 2, q);
}

std::size_t ipow(std::size_t base, unsigned e) {
    std::size_t r = 1;
    for (unsigned i = 0; i < e; ++i) r *= base;
    return r;
}

// Evaluation point of base-code party i (1-based).
std::uint64_t point(unsigned i, unsigned q) { return i % q; }

// Coefficients (c_0, ..., c_{t-1}) of the polynomial of degree < t through
// the given points, by Gauss-Jordan elimination on the Vandermonde system.
std::vector<std::uint64_t> interpolate(const std::vector<std::uint64_t>& xs, const std::vector<std::uint64_t>& ys,
                                       std::uint64_t q) {
    const std::size_t t = xs.size();
    std::vector<std::vector<std::uint64_t>> a(t, std::vector<std::uint64_t>(t + 1));
    for (std::size_t r = 0; r < t; ++r) {
        std::uint64_t pw = 1;
        for (std::size_t c = 0; c < t; ++c) {
            a[r][c] = pw;
            pw = pw * xs[r] % q;
        }
        a[r][t] = ys[r] % q;
    }
    for (std::size_t c = 0; c < t; ++c) {
        std::size_t piv = c;
        while (piv < t && a[piv][c] == 0) ++piv;
        if (piv == t) throw InvalidParams("evaluation points are not distinct");
        std::swap(a[piv], a[c]);
        const std::uint64_t inv = mod_inv(a[c][c], q);
        for (auto& v : a[c]) v = v * inv % q;
        for (std::size_t r = 0; r < t; ++r) {
            if (r == c || a[r][c] == 0) continue;
            const std::uint64_t f = a[r][c];
            for (std::size_t k = 0; k <= t; ++k) a[r][k] = (a[r][k] + (q - f) * a[c][k]) % q;
        }
    }
    std::vector<std::uint64_t> coef(t);
    for (std::size_t r = 0; r < t; ++r) coef[r] = a[r][t];
    return coef;
}

std::uint64_t evaluate(const std::vector<std::uint64_t>& coef, std::uint64_t x, std::uint64_t q) {
    std::uint64_t acc = 0;
    for (std::size_t i = coef.size(); i-- > 0;) acc = (acc * x + coef[i]) % q;
    return acc;
}

// Digits of a register value, most significant first.
std::vector<unsigned> digits(std::size_t v, unsigned q, unsigned count) {
    std::vector<unsigned> d(count);
    for (unsigned i = count; i-- > 0;) {
        d[i] = static_cast<unsigned>(v % q);
        v /= q;
    }
    return d;
}

std::size_t from_digits(const std::vector<unsigned>& d, unsigned q) {
    std::size_t v = 0;
    for (unsigned x : d) v = v * q + x;
    return v;
}

}  // namespace

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// ------------------------------------------------------------ quantum Shamir

std::size_t QShamirParams::share_dim() const { return ipow(q, b); }
std::size_t QShamirParams::message_dim() const { return ipow(q, b); }

void QShamirParams::validate() const {
    if (t == 0 || p == 0) throw InvalidParams("threshold and party count must be positive");
    if (t > p) throw InvalidParams("threshold exceeds the number of parties");
    if (p > 2 * t - 1) throw InvalidParams("quantum sharing needs p <= 2t - 1 (no cloning)");
    if (!is_prime(q)) throw InvalidParams("share dimension q must be prime");
    if (q < 2 * t - 1) throw InvalidParams("q must be at least 2t - 1");
    if (b == 0) throw InvalidParams("at least one message qudit");
    std::size_t dim = 1;
    for (unsigned i = 0; i < base_parties(); ++i) {
        dim *= share_dim();
        if (dim > kMaxBaseCodeDim) throw SizeLimitExceeded("base code dimension too large");
    }
}

std::string share_label(const std::string& prefix, unsigned i) { return prefix + std::to_string(i); }

Matrix qshare_isometry(const QShamirParams& prm) {
    prm.validate();
    const unsigned n = prm.base_parties();
    const unsigned q = prm.q;
    const std::size_t din = prm.message_dim();
    const std::size_t dout = ipow(prm.share_dim(), n);
    const std::size_t nfree = ipow(q, (prm.t - 1) * prm.b);
    const double amp = 1.0 / std::sqrt(static_cast<double>(nfree));
    Matrix v = Matrix::Zero(static_cast<Eigen::Index>(dout), static_cast<Eigen::Index>(din));
    for (std::size_t s = 0; s < din; ++s) {
        const auto sd = digits(s, q, prm.b);
        for (std::size_t c = 0; c < nfree; ++c) {
            const auto cd = digits(c, q, (prm.t - 1) * prm.b);
            // share_digits[i][layer]
            std::vector<std::vector<unsigned>> share(n, std::vector<unsigned>(prm.b));
            for (unsigned layer = 0; layer < prm.b; ++layer) {
                std::vector<std::uint64_t> coef(prm.t);
                for (unsigned j = 0; j + 1 < prm.t; ++j) coef[j] = cd[layer * (prm.t - 1) + j];
                coef[prm.t - 1] = sd[layer];
                for (unsigned i = 0; i < n; ++i)
                    share[i][layer] = static_cast<unsigned>(evaluate(coef, point(i + 1, q), q));
            }
            std::size_t out = 0;
            for (unsigned i = 0; i < n; ++i) out = out * prm.share_dim() + from_digits(share[i], q);
            v(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(s)) += amp;
        }
    }
    return v;
}

Operator qshare(const Operator& sigma, const std::string& label, const QShamirParams& prm,
                const std::string& prefix) {
    prm.validate();
    if (sigma.layout.dim_of(label) != prm.message_dim())
        throw DimensionMismatch("message register must have dimension q^b");
    const Matrix v = qshare_isometry(prm);
    const std::size_t kept = ipow(prm.share_dim(), prm.p);
    const std::size_t dropped = ipow(prm.share_dim(), prm.base_parties() - prm.p);
    std::vector<Matrix> kraus;
    kraus.reserve(dropped);
    for (std::size_t d = 0; d < dropped; ++d) {
        Matrix k(static_cast<Eigen::Index>(kept), v.cols());
        for (std::size_t r = 0; r < kept; ++r) k.row(static_cast<Eigen::Index>(r)) = v.row(static_cast<Eigen::Index>(r * dropped + d));
        kraus.push_back(std::move(k));
    }
    std::vector<Register> regs;
    for (unsigned i = 1; i <= prm.p; ++i) regs.push_back({share_label(prefix, i), prm.share_dim()});
    return apply_kraus_local(sigma, {label}, kraus, RegisterLayout(regs));
}

DensityOperator qshare(const DensityOperator& sigma, const std::string& label, const QShamirParams& prm,
                       const std::string& prefix) {
    return DensityOperator(qshare(sigma.op(), label, prm, prefix));
}

Operator qrec(const Operator& shares, const std::vector<unsigned>& parties, const std::string& label,
              const QShamirParams& prm, const std::string& prefix) {
    prm.validate();
    std::vector<unsigned> T = parties;
    std::sort(T.begin(), T.end());
    T.erase(std::unique(T.begin(), T.end()), T.end());
    if (T.size() < prm.t) throw InvalidParams("reconstruction needs at least t shares");
    for (unsigned i : T)
        if (i == 0 || i > prm.p) throw InvalidParams("party index out of range");
    T.resize(prm.t);

    std::vector<std::string> drop, used;
    for (unsigned i = 1; i <= prm.p; ++i) {
        const std::string l = share_label(prefix, i);
        if (!shares.layout.contains(l)) continue;
        if (std::find(T.begin(), T.end(), i) == T.end()) drop.push_back(l);
    }
    for (unsigned i : T) used.push_back(share_label(prefix, i));
    Operator reduced = drop.empty() ? shares : partial_trace(shares, drop);

    // Permutation: values on T -> (secret, values at the base points outside T).
    const unsigned q = prm.q;
    std::vector<std::uint64_t> xs, others;
    for (unsigned i : T) xs.push_back(point(i, q));
    for (unsigned i = 1; i <= prm.base_parties(); ++i)
        if (std::find(T.begin(), T.end(), i) == T.end()) others.push_back(point(i, q));
    const std::size_t dim = ipow(prm.share_dim(), prm.t);
    Matrix w = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t in = 0; in < dim; ++in) {
        const auto vd = digits(in, q, prm.t * prm.b);  // party-major, layer-minor
        std::vector<std::vector<unsigned>> out(prm.t, std::vector<unsigned>(prm.b));
        for (unsigned layer = 0; layer < prm.b; ++layer) {
            std::vector<std::uint64_t> ys(prm.t);
            for (unsigned i = 0; i < prm.t; ++i) ys[i] = vd[i * prm.b + layer];
            const auto coef = interpolate(xs, ys, q);
            out[0][layer] = static_cast<unsigned>(coef[prm.t - 1]);
            for (unsigned j = 0; j + 1 < prm.t; ++j)
                out[j + 1][layer] = static_cast<unsigned>(evaluate(coef, others[j], q));
        }
        std::vector<unsigned> od;
        for (const auto& o : out) od.insert(od.end(), o.begin(), o.end());
        w(static_cast<Eigen::Index>(from_digits(od, q)), static_cast<Eigen::Index>(in)) = 1.0;
    }
    Operator decoded = conjugate_local(reduced, used, w);
    std::vector<std::string> junk(used.begin() + 1, used.end());
    Operator result = junk.empty() ? decoded : partial_trace(decoded, junk);
    result.layout = result.layout.renamed(used.front(), label);
    return result;
}

// ----------------------------------------------------------- classical Shamir

std::vector<std::uint64_t> cshamir_share(std::uint64_t s, unsigned t, unsigned p, std::uint64_t q, Rng& rng) {
    if (t == 0 || t > p) throw InvalidParams("need 1 <= t <= p");
    if (!is_prime(q) || q <= p) throw InvalidParams("q must be a prime larger than p");
    if (q > (1ULL << 31)) throw SizeLimitExceeded("q must fit in 31 bits");
    if (s >= q) throw InvalidParams("secret out of range");
    std::vector<std::uint64_t> coef(t);
    coef[0] = s;
    for (unsigned j = 1; j < t; ++j) coef[j] = rng.below(q);
    std::vector<std::uint64_t> out(p);
    for (unsigned i = 1; i <= p; ++i) out[i - 1] = evaluate(coef, i, q);
    return out;
}

std::uint64_t cshamir_rec(const std::vector<std::pair<unsigned, std::uint64_t>>& shares, unsigned t,
                          std::uint64_t q) {
    if (!is_prime(q)) throw InvalidParams("q must be prime");
    auto sorted = shares;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end(),
                             [](const auto& a, const auto& b) { return a.first == b.first; }),
                 sorted.end());
    if (sorted.size() < t || t == 0) throw InvalidParams("reconstruction needs at least t shares");
    sorted.resize(t);
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < t; ++i) {
        std::uint64_t num = 1, den = 1;
        for (std::size_t j = 0; j < t; ++j) {
            if (i == j) continue;
            num = num * (sorted[j].first % q) % q;
            den = den * ((sorted[j].first + q - sorted[i].first % q) % q) % q;
        }
        acc = (acc + sorted[i].second % q * num % q * mod_inv(den, q)) % q;
    }
    return acc;
}

// ----------------------------------------------------------------------- LRSS

LrssBound lrss_bound(const LrssParams& prm) {
    LrssBound out;
    out.lhs = static_cast<double>(prm.N) * prm.b;
    out.rhs = 9.0 * prm.b + 2.0 * prm.ell_leak + 8.0 * std::log2(1.0 / prm.epsilon) + 40.0;
    if (prm.p >= 3) out.rhs += 16.0 * std::log2(static_cast<double>(prm.p));
    out.satisfied = out.lhs >= out.rhs;
    return out;
}

LrssBound validate_lrss(const LrssParams& prm, bool strict) {
    if (prm.b == 0 || prm.b > 16) throw InvalidParams("message length b must be in [1, 16]");
    if (prm.N == 0) throw InvalidParams("vector length N must be positive");
    if (!(prm.epsilon > 0.0 && prm.epsilon < 1.0)) throw InvalidParams("epsilon must lie in (0, 1)");
    if (prm.ell_leak < 0.0) throw InvalidParams("leakage budget must be non-negative");
    if (prm.p < 2) throw InvalidParams("at least two parties");
    const LrssBound bound = lrss_bound(prm);
    if (strict && !bound.satisfied)
        throw InvalidParams("share size N b = " + std::to_string(bound.lhs) + " is below the required " +
                            std::to_string(bound.rhs));
    return bound;
}

std::pair<FieldVector, FieldVector> lrshare2(GF2k::Elem s, const LrssParams& prm, Rng& rng) {
    return ip_preimage_sample(s, prm.b, prm.N, rng);
}

GF2k::Elem lrrec2(const FieldVector& x, const FieldVector& y) { return ip_extract(x, y); }

std::size_t LrShare::symbols() const {
    std::size_t n = 0;
    for (const auto& [j, v] : sub) n += v.size();
    return n;
}

std::vector<LrShare> lrshare_2p(GF2k::Elem s, const LrssParams& prm, Rng& rng) {
    if (prm.p < 2) throw InvalidParams("at least two parties");
    std::vector<LrShare> out(prm.p);
    for (unsigned i = 0; i < prm.p; ++i) out[i].party = i + 1;
    for (unsigned i = 1; i <= prm.p; ++i)
        for (unsigned j = i + 1; j <= prm.p; ++j) {
            auto [x, y] = lrshare2(s, prm, rng);
            out[i - 1].sub[j] = std::move(x);
            out[j - 1].sub[i] = std::move(y);
        }
    return out;
}

GF2k::Elem lrrec_2p(const std::vector<LrShare>& shares) {
    std::vector<const LrShare*> sorted;
    for (const auto& s : shares) sorted.push_back(&s);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->party < b->party; });
    if (sorted.size() < 2 || sorted[0]->party == sorted[1]->party)
        throw InvalidParams("reconstruction needs two distinct shares");
    const LrShare& a = *sorted[0];
    const LrShare& b = *sorted[1];
    const auto xa = a.sub.find(b.party);
    const auto xb = b.sub.find(a.party);
    if (xa == a.sub.end() || xb == b.sub.end()) throw LayoutError("shares lack the common sub-sharing");
    return lrrec2(xa->second, xb->second);
}

unsigned lr_share_bits(const LrssParams& prm) {
    return (prm.p - 1) * static_cast<unsigned>(prm.N) * prm.b;
}

std::uint64_t pack_lr_share(const LrShare& share, const LrssParams& prm) {
    const unsigned vec_bits = static_cast<unsigned>(prm.N) * prm.b;
    if (lr_share_bits(prm) > 64) throw SizeLimitExceeded("packed share exceeds 64 bits");
    if (share.sub.size() != prm.p - 1) throw LayoutError("share does not hold p - 1 sub-shares");
    std::uint64_t out = 0;
    for (const auto& [partner, vec] : share.sub) {
        if (vec.size() != prm.N || vec.k != prm.b) throw DimensionMismatch("sub-share shape mismatch");
        out = (vec_bits == 64 ? 0 : out << vec_bits) | vec.to_bits();
    }
    return out;
}

LrShare unpack_lr_share(std::uint64_t bits, unsigned party, const LrssParams& prm) {
    if (party == 0 || party > prm.p) throw InvalidParams("party index out of range");
    const unsigned vec_bits = static_cast<unsigned>(prm.N) * prm.b;
    if (lr_share_bits(prm) > 64) throw SizeLimitExceeded("packed share exceeds 64 bits");
    const std::uint64_t mask = vec_bits == 64 ? ~0ULL : (1ULL << vec_bits) - 1;
    LrShare out;
    out.party = party;
    unsigned slot = prm.p - 1;
    for (unsigned partner = 1; partner <= prm.p; ++partner) {
        if (partner == party) continue;
        --slot;
        const std::uint64_t v = (bits >> (slot * vec_bits)) & mask;
        out.sub[partner] = FieldVector::from_bits(v, prm.b, prm.N);
    }
    return out;
}

std::vector<std::pair<std::vector<std::uint64_t>, double>> lrshare_2p_law(GF2k::Elem s, const LrssParams& prm) {
    if (prm.p < 2) throw InvalidParams("at least two parties");
    const unsigned vec_bits = static_cast<unsigned>(prm.N) * prm.b;
    if (lr_share_bits(prm) > 64) throw SizeLimitExceeded("packed share exceeds 64 bits");
    const auto pair_law = lrshare2_distribution(s, prm.b, prm.N);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> support;
    for (const auto& [key, w] : pair_law) support.push_back(key);
    std::vector<std::pair<unsigned, unsigned>> pairs;
    for (unsigned i = 1; i <= prm.p; ++i)
        for (unsigned j = i + 1; j <= prm.p; ++j) pairs.emplace_back(i, j);
    long double total = 1;
    for (std::size_t k = 0; k < pairs.size(); ++k) total *= static_cast<long double>(support.size());
    if (total > static_cast<long double>(1u << 22)) throw SizeLimitExceeded("share law limited to 2^22 outcomes");
    const double w = 1.0 / static_cast<double>(total);

    // Position of the sub-share from partner j inside party i's packed value.
    auto shift = [&](unsigned i, unsigned j) {
        const unsigned rank = j < i ? j - 1 : j - 2;  // index among partners
        return (prm.p - 2 - rank) * vec_bits;
    };
    std::vector<std::pair<std::vector<std::uint64_t>, double>> out;
    out.reserve(static_cast<std::size_t>(total));
    std::vector<std::size_t> idx(pairs.size(), 0);
    while (true) {
        std::vector<std::uint64_t> packed(prm.p, 0);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const auto [i, j] = pairs[k];
            packed[i - 1] |= support[idx[k]].first << shift(i, j);
            packed[j - 1] |= support[idx[k]].second << shift(j, i);
        }
        out.emplace_back(std::move(packed), w);
        std::size_t k = pairs.size();
        while (k > 0) {
            --k;
            if (++idx[k] < support.size()) break;
            idx[k] = 0;
            if (k == 0) return out;
        }
        if (pairs.empty()) return out;
    }
}

std::map<std::pair<std::uint64_t, std::uint64_t>, double> lrshare2_distribution(GF2k::Elem s, unsigned k,
                                                                                std::size_t n) {
    const unsigned bits = k * static_cast<unsigned>(n);
    if (bits > 11) throw SizeLimitExceeded("exhaustive preimage enumeration limited to 11-bit vectors");
    std::map<std::pair<std::uint64_t, std::uint64_t>, double> out;
    const std::uint64_t count = 1ULL << bits;
    for (std::uint64_t x = 0; x < count; ++x)
        for (std::uint64_t y = 0; y < count; ++y)
            if (ip_extract(FieldVector::from_bits(x, k, n), FieldVector::from_bits(y, k, n)) == s) out[{x, y}] = 1.0;
    const double w = 1.0 / static_cast<double>(out.size());
    for (auto& [key, v] : out) v = w;
    return out;
}

double lrshare2_single_share_distance(GF2k::Elem s, unsigned k, std::size_t n, bool first) {
    const auto dist = lrshare2_distribution(s, k, n);
    const std::size_t count = std::size_t{1} << (k * n);
    std::vector<double> marg(count, 0.0);
    for (const auto& [key, w] : dist) marg[first ? key.first : key.second] += w;
    double d = 0.0;
    for (double m : marg) d += std::abs(m - 1.0 / static_cast<double>(count));
    return d;
}

double lrshare2_average_single_share_distance(unsigned k, std::size_t n, bool first) {
    const std::size_t count = std::size_t{1} << (k * n);
    const std::uint32_t q = 1u << k;
    std::vector<double> marg(count, 0.0);
    for (std::uint32_t s = 0; s < q; ++s)
        for (const auto& [key, w] : lrshare2_distribution(s, k, n)) marg[first ? key.first : key.second] += w / q;
    double d = 0.0;
    for (double m : marg) d += std::abs(m - 1.0 / static_cast<double>(count));
    return d;
}

HybridReport lrss_hybrid_check(GF2k::Elem s, const LrssParams& prm, unsigned i, unsigned j) {
    if (i == 0 || i >= j || j > prm.p) throw InvalidParams("need 1 <= i < j <= p");
    const unsigned vec_bits = prm.b * static_cast<unsigned>(prm.N);
    std::vector<std::pair<unsigned, unsigned>> pairs;
    for (unsigned a = 1; a <= prm.p; ++a)
        for (unsigned c = a + 1; c <= prm.p; ++c) pairs.emplace_back(a, c);
    const unsigned pair_bits = 2 * vec_bits;
    const unsigned total_bits = pair_bits * static_cast<unsigned>(pairs.size());
    if (total_bits > 22) throw SizeLimitExceeded("hybrid check limited to 2^22 outcomes");
    const std::size_t replaced =
        static_cast<std::size_t>(std::find(pairs.begin(), pairs.end(), std::make_pair(i, j)) - pairs.begin());

    // Exact law of one sub-sharing, indexed by (x << vec_bits) | y.
    const std::size_t pair_count = std::size_t{1} << pair_bits;
    std::vector<double> pair_law(pair_count, 0.0);
    for (const auto& [key, w] : lrshare2_distribution(s, prm.b, prm.N)) pair_law[(key.first << vec_bits) | key.second] = w;
    const double uniform = 1.0 / static_cast<double>(pair_count);

    const std::size_t outcomes = std::size_t{1} << total_bits;
    auto pair_value = [&](std::size_t o, std::size_t k) {
        return (o >> (pair_bits * (pairs.size() - 1 - k))) & (pair_count - 1);
    };
    std::vector<double> real(outcomes), hybrid(outcomes);
    for (std::size_t o = 0; o < outcomes; ++o) {
        // The scheme draws every sub-sharing from its own preimage sample.
        double pr = 1.0, ph = 1.0;
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const double w = pair_law[pair_value(o, k)];
            pr *= w;
            ph *= (k == replaced ? uniform : w);
        }
        real[o] = pr;
        hybrid[o] = ph;
    }

    HybridReport rep;
    // Marginals with the replaced pair summed out.
    const std::size_t rest = outcomes / pair_count;
    auto drop_pair = [&](const std::vector<double>& law) {
        std::vector<double> m(rest, 0.0);
        const unsigned shift = pair_bits * static_cast<unsigned>(pairs.size() - 1 - replaced);
        for (std::size_t o = 0; o < outcomes; ++o) {
            const std::size_t low = o & ((std::size_t{1} << shift) - 1);
            const std::size_t high = o >> (shift + pair_bits);
            m[(high << shift) | low] += law[o];
        }
        return m;
    };
    const auto mr = drop_pair(real);
    const auto mh = drop_pair(hybrid);
    for (std::size_t o = 0; o < rest; ++o) rep.complement_distance += std::abs(mr[o] - mh[o]);

    std::vector<std::vector<double>> marg(pairs.size(), std::vector<double>(pair_count, 0.0));
    for (std::size_t o = 0; o < outcomes; ++o)
        for (std::size_t k = 0; k < pairs.size(); ++k) marg[k][pair_value(o, k)] += real[o];
    for (std::size_t o = 0; o < outcomes; ++o) {
        double prod = 1.0;
        for (std::size_t k = 0; k < pairs.size(); ++k) prod *= marg[k][pair_value(o, k)];
        rep.independence_distance += std::abs(real[o] - prod);
    }
    for (std::size_t v = 0; v < pair_count; ++v) rep.replaced_distance += std::abs(marg[replaced][v] - uniform);
    rep.pass = rep.complement_distance <= 1e-12 && rep.independence_distance <= 1e-12;
    return rep;
}

}  // namespace qnm
