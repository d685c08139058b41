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

#include "qnm/extractors.hpp"

#include <cmath>
#include <limits>

#include "qnm/errors.hpp"

namespace qnm {

namespace {

std::uint64_t mask_bits(unsigned bits) { return bits >= 64 ? ~0ULL : ((1ULL << bits) - 1); }

void check_vector(const FieldVector& v) {
    const GF2k& f = gf2k_field(v.k);
    for (auto e : v.elements)
        if (e >= f.size()) throw InvalidParams("field vector element out of range");
}

FieldVector uniform_vector(unsigned k, std::size_t n, Rng& rng) {
    FieldVector v{k, std::vector<GF2k::Elem>(n)};
    for (auto& e : v.elements) e = static_cast<GF2k::Elem>(rng.bits(k));
    return v;
}

FieldVector uniform_nonzero_vector(unsigned k, std::size_t n, Rng& rng) {
    for (;;) {
        FieldVector v = uniform_vector(k, n, rng);
        if (!v.is_zero()) return v;
    }
}

double l1_to_uniform(const std::vector<double>& counts, double total, double uniform_mass) {
    double acc = 0.0;
    for (double c : counts) acc += std::abs(c / total - uniform_mass);
    return acc;
}

}  // namespace

bool FieldVector::is_zero() const {
    for (auto e : elements)
        if (e != 0) return false;
    return true;
}

std::uint64_t FieldVector::to_bits() const {
    if (k * elements.size() > 64) throw SizeLimitExceeded("field vector does not fit in 64 bits");
    std::uint64_t out = 0;
    for (std::size_t i = 0; i < elements.size(); ++i) out |= static_cast<std::uint64_t>(elements[i]) << (i * k);
    return out;
}

FieldVector FieldVector::from_bits(std::uint64_t bits, unsigned k, std::size_t n) {
    (void)gf2k_field(k);
    if (k * n > 64) throw SizeLimitExceeded("field vector does not fit in 64 bits");
    FieldVector v{k, std::vector<GF2k::Elem>(n)};
    for (std::size_t i = 0; i < n; ++i) v.elements[i] = static_cast<GF2k::Elem>((bits >> (i * k)) & mask_bits(k));
    return v;
}

GF2k::Elem ip_extract(const FieldVector& x, const FieldVector& y) {
    if (x.k != y.k || x.size() != y.size()) throw DimensionMismatch("inner product of mismatched vectors");
    check_vector(x);
    check_vector(y);
    return gf2k_field(x.k).dot(x.elements, y.elements);
}

long double ip_preimage_size(GF2k::Elem s, unsigned k, std::size_t n) {
    const long double q = std::ldexp(1.0L, static_cast<int>(k));
    const long double qn = std::pow(q, static_cast<long double>(n));
    const long double qn1 = qn / q;
    // Nonzero x: q^{n-1} solutions each. Zero x: only s = 0, with q^n solutions.
    return (qn - 1) * qn1 + (s == 0 ? qn : 0.0L);
}

std::pair<FieldVector, FieldVector> ip_preimage_sample(GF2k::Elem s, unsigned k, std::size_t n, Rng& rng) {
    const GF2k& f = gf2k_field(k);
    if (n == 0) throw InvalidParams("vector length must be positive");
    if (s >= f.size()) throw InvalidParams("secret out of range");
    FieldVector x{k, std::vector<GF2k::Elem>(n, 0)};
    bool zero_x = false;
    if (s == 0) {
        const unsigned total_bits = k * static_cast<unsigned>(2 * n - 1);
        if (total_bits < 63) {
            const std::uint64_t qn = 1ULL << (k * n);
            const std::uint64_t total = (1ULL << total_bits) + qn - (qn >> k);
            zero_x = rng.below(total) < qn;
        } else {
            const long double w = std::ldexp(1.0L, static_cast<int>(k * n)) / ip_preimage_size(0, k, n);
            zero_x = static_cast<long double>(rng.uniform01()) < w;
        }
    }
    if (!zero_x) x = uniform_nonzero_vector(k, n, rng);
    FieldVector y = uniform_vector(k, n, rng);
    if (!zero_x) {
        std::size_t pivot = 0;
        while (x.elements[pivot] == 0) ++pivot;
        GF2k::Elem rest = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != pivot) rest ^= f.mul(x.elements[j], y.elements[j]);
        y.elements[pivot] = f.div(s ^ rest, x.elements[pivot]);
    }
    return {x, y};
}

// ------------------------------------------------------------ descriptors

NmExtDescriptor NmExtDescriptor::inner_product(unsigned k, unsigned vector_length) {
    NmExtDescriptor d;
    d.kind = NmExtKind::InnerProduct;
    d.field_k = k;
    d.n = d.m = k * vector_length;
    d.r = k;
    d.name = "ip";
    d.validate();
    return d;
}

NmExtDescriptor NmExtDescriptor::poly_hash(unsigned n, unsigned m, unsigned r, unsigned offset_u, unsigned offset_v) {
    NmExtDescriptor d;
    d.kind = NmExtKind::PolyHash;
    d.n = n;
    d.m = m;
    d.r = r;
    d.field_k = r;
    d.offset_u = offset_u;
    d.offset_v = offset_v;
    d.name = "poly_hash";
    d.validate();
    return d;
}

NmExtDescriptor NmExtDescriptor::from_table(unsigned n, unsigned m, unsigned r, std::vector<std::uint32_t> table) {
    NmExtDescriptor d;
    d.kind = NmExtKind::Table;
    d.n = n;
    d.m = m;
    d.r = r;
    d.table = std::move(table);
    d.name = "table";
    d.validate();
    return d;
}

void NmExtDescriptor::validate() const {
    if (n == 0 || m == 0 || r == 0) throw InvalidParams("extractor lengths must be positive");
    if (n > 64 || m > 64 || r > 32) throw SizeLimitExceeded("extractor lengths too large");
    switch (kind) {
        case NmExtKind::InnerProduct:
            if (field_k == 0 || n != m || r != field_k || n % field_k != 0)
                throw InvalidParams("inner-product extractor needs n = m = N k and r = k");
            (void)gf2k_field(field_k);
            break;
        case NmExtKind::PolyHash:
            if (field_k != r) throw InvalidParams("poly-hash extractor works over GF(2^r)");
            (void)gf2k_field(field_k);
            break;
        case NmExtKind::Table: {
            if (n + m > 24) throw SizeLimitExceeded("table extractors are limited to n + m <= 24");
            if (table.size() != (std::size_t{1} << (n + m))) throw InvalidParams("table size must be 2^(n+m)");
            for (auto v : table)
                if (v >> r) throw InvalidParams("table entry exceeds r bits");
            break;
        }
    }
}

std::uint32_t nmext_eval(const NmExtDescriptor& d, std::uint64_t x, std::uint64_t y) {
    if ((x & ~mask_bits(d.n)) || (y & ~mask_bits(d.m))) throw DimensionMismatch("extractor input length mismatch");
    switch (d.kind) {
        case NmExtKind::Table:
            return d.table[(x << d.m) | y];
        case NmExtKind::InnerProduct: {
            const std::size_t len = d.n / d.field_k;
            return ip_extract(FieldVector::from_bits(x, d.field_k, len), FieldVector::from_bits(y, d.field_k, len));
        }
        case NmExtKind::PolyHash: {
            const GF2k& f = gf2k_field(d.field_k);
            const unsigned blocks = (d.n + d.r - 1) / d.r;
            const long long ey = static_cast<long long>(y % (f.size() - 1)) + 1 + d.offset_v;
            std::uint32_t acc = 0;
            for (unsigned i = 0; i < blocks; ++i) {
                const auto xi = static_cast<std::uint32_t>((x >> (i * d.r)) & mask_bits(d.r));
                if (xi) acc ^= f.mul(xi, f.alpha_pow(static_cast<long long>(i + 1 + d.offset_u) * ey));
            }
            return acc;
        }
    }
    throw InvalidParams("unknown extractor kind");
}

NmExtDescriptor NmExtDescriptor::tabulated() const {
    if (n + m > 20) throw SizeLimitExceeded("tabulation is limited to n + m <= 20");
    std::vector<std::uint32_t> t(std::size_t{1} << (n + m));
    for (std::uint64_t x = 0; x < (1ULL << n); ++x)
        for (std::uint64_t y = 0; y < (1ULL << m); ++y) t[(x << m) | y] = nmext_eval(*this, x, y);
    NmExtDescriptor d = from_table(n, m, r, std::move(t));
    d.certified_epsilon = certified_epsilon;
    d.certification_family = certification_family;
    d.name = name;
    return d;
}

// ----------------------------------------------------------- certification

std::string to_string(TamperFamily family) {
    switch (family) {
        case TamperFamily::IdentityConstantXor:
            return "deterministic split-state: identity, constants, xor-shifts; W trivial";
    }
    return "unknown";
}

std::vector<TamperTable> tamper_family(unsigned bits, TamperFamily family) {
    if (bits > 16) throw SizeLimitExceeded("tampering tables are limited to 16 bits");
    const std::uint64_t size = 1ULL << bits;
    std::vector<TamperTable> out;
    switch (family) {
        case TamperFamily::IdentityConstantXor: {
            TamperTable id(size);
            for (std::uint64_t v = 0; v < size; ++v) id[v] = v;
            out.push_back(id);
            for (std::uint64_t c = 0; c < size; ++c) out.emplace_back(size, c);
            for (std::uint64_t a = 1; a < size; ++a) {
                TamperTable t(size);
                for (std::uint64_t v = 0; v < size; ++v) t[v] = v ^ a;
                out.push_back(std::move(t));
            }
            break;
        }
    }
    return out;
}

Item2Value nmext_item2(const NmExtDescriptor& d, const TamperTable& f, const TamperTable& g) {
    if (f.size() != (std::size_t{1} << d.n) || g.size() != (std::size_t{1} << d.m))
        throw DimensionMismatch("tampering table sizes do not match the extractor");
    const std::size_t outs = std::size_t{1} << d.r;
    std::vector<double> same(outs, 0.0), tamp(outs * outs, 0.0);
    double n_same = 0.0, n_tamp = 0.0;
    for (std::uint64_t x = 0; x < f.size(); ++x) {
        for (std::uint64_t y = 0; y < g.size(); ++y) {
            const std::uint32_t r = nmext_eval(d, x, y);
            if (f[x] == x && g[y] == y) {
                same[r] += 1.0;
                n_same += 1.0;
            } else {
                tamp[r * outs + nmext_eval(d, f[x], g[y])] += 1.0;
                n_tamp += 1.0;
            }
        }
    }
    Item2Value v;
    const double total = n_same + n_tamp;
    v.p_same = n_same / total;
    const double u = 1.0 / static_cast<double>(outs);
    if (n_same > 0) v.same_distance = l1_to_uniform(same, n_same, u);
    if (n_tamp > 0) {
        std::vector<double> rprime(outs, 0.0);
        for (std::size_t a = 0; a < outs; ++a)
            for (std::size_t b = 0; b < outs; ++b) rprime[b] += tamp[a * outs + b] / n_tamp;
        double acc = 0.0;
        for (std::size_t a = 0; a < outs; ++a)
            for (std::size_t b = 0; b < outs; ++b) acc += std::abs(tamp[a * outs + b] / n_tamp - u * rprime[b]);
        v.tamp_distance = acc;
    }
    v.value = v.p_same * v.same_distance + (1.0 - v.p_same) * v.tamp_distance;
    return v;
}

CertificationReport nmext_certify_classical(const NmExtDescriptor& d, double tolerance, TamperFamily family) {
    d.validate();
    if (d.n + d.m > 16) throw SizeLimitExceeded("exhaustive certification is limited to n + m <= 16");
    const NmExtDescriptor t = d.kind == NmExtKind::Table ? d : d.tabulated();
    const std::uint64_t nx = 1ULL << d.n, ny = 1ULL << d.m;
    const std::size_t outs = std::size_t{1} << d.r;
    const double total = static_cast<double>(nx * ny);

    CertificationReport rep;
    rep.family = to_string(family);
    rep.tolerance = tolerance;
    {
        std::vector<double> rx(outs * nx, 0.0), ry(outs * ny, 0.0);
        for (std::uint64_t x = 0; x < nx; ++x)
            for (std::uint64_t y = 0; y < ny; ++y) {
                const auto r = nmext_eval(t, x, y);
                rx[r * nx + x] += 1.0;
                ry[r * ny + y] += 1.0;
            }
        rep.strong_x = l1_to_uniform(rx, total, 1.0 / static_cast<double>(outs * nx));
        rep.strong_y = l1_to_uniform(ry, total, 1.0 / static_cast<double>(outs * ny));
    }
    const auto fs = tamper_family(d.n, family);
    const auto gs = tamper_family(d.m, family);
    const long double work = static_cast<long double>(fs.size()) * gs.size() * total;
    if (work > std::ldexp(1.0L, 32)) throw SizeLimitExceeded("certification sweep too large");
    for (std::size_t i = 0; i < fs.size(); ++i)
        for (std::size_t j = 0; j < gs.size(); ++j) {
            const double v = nmext_item2(t, fs[i], gs[j]).value;
            ++rep.pairs_tested;
            if (v > rep.worst_item2) {
                rep.worst_item2 = v;
                rep.worst_f = i;
                rep.worst_g = j;
            }
        }
    rep.certified_epsilon = std::max({rep.strong_x, rep.strong_y, rep.worst_item2});
    rep.within_tolerance = rep.certified_epsilon <= tolerance;
    return rep;
}

NmExtDescriptor with_certification(const NmExtDescriptor& d, const CertificationReport& report) {
    NmExtDescriptor out = d;
    out.certified_epsilon = report.certified_epsilon;
    out.certification_family = report.family;
    return out;
}

NmExtDescriptor search_toy_descriptor(unsigned n, unsigned m, unsigned r, TamperFamily family) {
    if (n + m > 10) throw SizeLimitExceeded("toy search is limited to n + m <= 10");
    NmExtDescriptor best;
    double best_eps = std::numeric_limits<double>::infinity();
    for (unsigned u = 0; u < 4; ++u)
        for (unsigned v = 0; v < 4; ++v) {
            const NmExtDescriptor cand = NmExtDescriptor::poly_hash(n, m, r, u, v).tabulated();
            const auto rep = nmext_certify_classical(cand, 2.0, family);
            if (rep.certified_epsilon < best_eps) {
                best_eps = rep.certified_epsilon;
                best = with_certification(cand, rep);
                best.name = "toy(u=" + std::to_string(u) + ",v=" + std::to_string(v) + ")";
            }
        }
    return best;
}

// --------------------------------------------------------------- qpa check

QpaResult qpa_check(const DensityOperator& state, const QpaLabels& labels, double k1, double k2) {
    auto keep = [](std::initializer_list<const std::string*> names) {
        std::vector<std::string> out;
        for (const auto* s : names)
            if (!s->empty()) out.push_back(*s);
        return out;
    };
    QpaResult res;
    res.h1 = hmin(marginal(state, keep({&labels.x, &labels.w2, &labels.y, &labels.y_hat})), labels.x);
    res.h2 = hmin(marginal(state, keep({&labels.y, &labels.w1, &labels.x, &labels.x_hat})), labels.y);
    res.margin1 = res.h1.lower - k1;
    res.margin2 = res.h2.lower - k2;
    res.pass = res.margin1 >= -1e-9 && res.margin2 >= -1e-9;
    return res;
}

double ip_leakage_distance(unsigned k, std::size_t n, const std::function<std::size_t(const FieldVector&)>& leak,
                           std::size_t leak_dim) {
    const GF2k& f = gf2k_field(k);
    if (k * n > 16) throw SizeLimitExceeded("exhaustive leakage computation limited to 16 bits per source");
    const std::uint64_t count = 1ULL << (k * n);
    const std::size_t q = f.size();
    // joint[z][x][w] as counts
    std::vector<double> joint(q * count * leak_dim, 0.0);
    std::vector<double> xw(count * leak_dim, 0.0);
    std::vector<std::size_t> leak_of(count);
    for (std::uint64_t yb = 0; yb < count; ++yb) {
        leak_of[yb] = leak(FieldVector::from_bits(yb, k, n));
        if (leak_of[yb] >= leak_dim) throw InvalidParams("leakage value out of range");
    }
    for (std::uint64_t xb = 0; xb < count; ++xb) {
        const FieldVector x = FieldVector::from_bits(xb, k, n);
        for (std::uint64_t yb = 0; yb < count; ++yb) {
            const auto z = ip_extract(x, FieldVector::from_bits(yb, k, n));
            joint[(z * count + xb) * leak_dim + leak_of[yb]] += 1.0;
            xw[xb * leak_dim + leak_of[yb]] += 1.0;
        }
    }
    const double total = static_cast<double>(count * count);
    double acc = 0.0;
    for (std::size_t z = 0; z < q; ++z)
        for (std::size_t i = 0; i < count * leak_dim; ++i)
            acc += std::abs(joint[z * count * leak_dim + i] / total - xw[i] / total / static_cast<double>(q));
    return acc;
}

}  // namespace qnm
