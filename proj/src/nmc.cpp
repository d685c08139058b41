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

#include "qnm/nmc.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "qnm/errors.hpp"

namespace qnm {

namespace {

constexpr unsigned kMaxCodeQubits = 3;
constexpr std::size_t kMaxExactDim = 2048;

struct KeyCache {
    std::vector<CliffordOp> ops;
    std::vector<Matrix> unitaries;
};

const KeyCache& key_cache(unsigned b, CliffordSampling sampling) {
    static std::mutex mu;
    static std::map<std::pair<unsigned, int>, std::unique_ptr<KeyCache>> caches;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = caches[{b, static_cast<int>(sampling)}];
    if (!slot) {
        auto cache = std::make_unique<KeyCache>();
        const std::uint64_t count =
            sampling == CliffordSampling::Samp ? (std::uint64_t{1} << (5 * b)) : sc_size(b);
        cache->ops.reserve(count);
        cache->unitaries.reserve(count);
        for (std::uint64_t k = 0; k < count; ++k) {
            cache->ops.push_back(sampling == CliffordSampling::Samp ? sc_samp(SubCliffordKey(b, k))
                                                                    : sc_element(b, k));
            cache->unitaries.push_back(cache->ops.back().dense());
        }
        slot = std::move(cache);
    }
    return *slot;
}

Operator masked(const Operator& sigma, const std::string& label, const Matrix& u) {
    Operator out = conjugate_local(sigma, {label}, u);
    out.layout = out.layout.renamed(label, kCodewordZ);
    return out;
}

Operator unmasked(const Operator& z, const std::string& label, const Matrix& u) {
    Operator out = conjugate_local(z, {kCodewordZ}, u.adjoint());
    out.layout = out.layout.renamed(kCodewordZ, label);
    return out;
}

void check_message(const DensityOperator& sigma, const std::string& label, const CodeParams& p) {
    if (!sigma.layout().contains(label)) throw LayoutError("message register '" + label + "' not found");
    if (sigma.layout().dim_of(label) != p.message_dim())
        throw DimensionMismatch("message register must have dimension 2^b");
    if (label != kCodewordZ && sigma.layout().contains(kCodewordZ))
        throw LayoutError("external register may not be called Z");
}

}  // namespace

std::string to_string(CodeMode mode) {
    switch (mode) {
        case CodeMode::Real:
            return "real";
        case CodeMode::IdealKey:
            return "ideal-key";
        case CodeMode::ExactUniformClifford:
            return "exact-uniform-clifford";
    }
    return "?";
}

CodeMode parse_code_mode(const std::string& text) {
    if (text == "real") return CodeMode::Real;
    if (text == "ideal-key") return CodeMode::IdealKey;
    if (text == "exact-uniform-clifford") return CodeMode::ExactUniformClifford;
    throw ConfigError("unknown mode '" + text + "'");
}

CodeParams CodeParams::make(unsigned b, unsigned ell, unsigned delta_num, unsigned delta_den, CodeMode mode) {
    CodeParams p;
    p.b = b;
    p.ell = ell;
    p.delta_num = delta_num;
    p.delta_den = delta_den;
    switch (mode) {
        case CodeMode::Real:
            p.key_source = KeySource::Extractor;
            p.sampling = CliffordSampling::Samp;
            break;
        case CodeMode::IdealKey:
            p.key_source = KeySource::Ideal;
            p.sampling = CliffordSampling::Samp;
            break;
        case CodeMode::ExactUniformClifford:
            p.key_source = KeySource::Ideal;
            p.sampling = CliffordSampling::ExactUniform;
            break;
    }
    p.validate();
    return p;
}

CodeParams CodeParams::desk(CodeMode mode) { return make(1, 14, 1, 7, mode); }

CodeMode CodeParams::mode() const {
    if (key_source == KeySource::Extractor) return CodeMode::Real;
    return sampling == CliffordSampling::Samp ? CodeMode::IdealKey : CodeMode::ExactUniformClifford;
}

unsigned CodeParams::y_bits() const {
    if (delta_den == 0) return 0;
    return static_cast<unsigned>((static_cast<std::uint64_t>(delta_num) * ell) / delta_den);
}

unsigned CodeParams::r() const {
    if (delta_den == 0 || 2ULL * delta_num >= delta_den) return 0;
    const std::uint64_t num = static_cast<std::uint64_t>(delta_den - 2 * delta_num) * ell;
    return static_cast<unsigned>(num / (2ULL * delta_den));
}

NmExtDescriptor CodeParams::extractor() const {
    if (nmext) return *nmext;
    return NmExtDescriptor::poly_hash(ell, y_bits(), r());
}

void CodeParams::validate() const {
    if (b == 0 || b > kMaxCodeQubits) throw InvalidParams("message length b must be between 1 and 3 qubits");
    if (ell == 0) throw InvalidParams("ell must be positive");
    if (delta_den == 0 || delta_num == 0 || 2ULL * delta_num >= delta_den)
        throw InvalidParams("delta must lie strictly between 0 and 1/2");
    if (ell + y_bits() > 60) throw SizeLimitExceeded("ell + delta ell must not exceed 60 bits");
    if (key_source == KeySource::Extractor) {
        if (sampling != CliffordSampling::Samp)
            throw InvalidParams("exact-uniform sampling needs the ideal key source");
        if (y_bits() == 0) throw InvalidParams("delta ell must be at least one bit");
        if (r() < 5 * b)
            throw InvalidParams("key length r = " + std::to_string(r()) + " is below 5b = " +
                                std::to_string(5 * b));
        const NmExtDescriptor d = extractor();
        if (d.n != ell || d.m != y_bits() || d.r != r())
            throw InvalidParams("extractor dimensions must be (ell, delta ell, r)");
        if (ell + y_bits() > 24) throw SizeLimitExceeded("extractor keys are enumerated; ell + delta ell <= 24");
    }
}

std::uint64_t num_keys(const CodeParams& p) {
    return p.sampling == CliffordSampling::Samp ? (std::uint64_t{1} << (5 * p.b)) : sc_size(p.b);
}

const CliffordOp& key_clifford(const CodeParams& p, std::uint64_t key) {
    const KeyCache& c = key_cache(p.b, p.sampling);
    if (key >= c.ops.size()) throw InvalidParams("key out of range");
    return c.ops[key];
}

const Matrix& key_unitary(const CodeParams& p, std::uint64_t key) {
    const KeyCache& c = key_cache(p.b, p.sampling);
    if (key >= c.unitaries.size()) throw InvalidParams("key out of range");
    return c.unitaries[key];
}

std::uint64_t extractor_key(const CodeParams& p, std::uint64_t x, std::uint64_t y) {
    const std::uint64_t mask = (std::uint64_t{1} << (5 * p.b)) - 1;
    return nmext_eval(p.extractor(), x, y) & mask;
}

std::vector<std::uint32_t> extractor_key_table(const CodeParams& p) {
    p.validate();
    if (p.key_source != KeySource::Extractor) throw InvalidParams("ideal keys have no extractor table");
    const NmExtDescriptor d = p.extractor().tabulated();
    const std::uint32_t mask = (std::uint32_t{1} << (5 * p.b)) - 1;
    std::vector<std::uint32_t> out(d.table.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = d.table[i] & mask;
    return out;
}

std::vector<double> key_distribution(const CodeParams& p) {
    const std::uint64_t count = num_keys(p);
    if (p.key_source == KeySource::Ideal) return std::vector<double>(count, 1.0 / static_cast<double>(count));
    std::vector<double> dist(count, 0.0);
    const auto table = extractor_key_table(p);
    const double w = 1.0 / static_cast<double>(table.size());
    for (auto k : table) dist[k] += w;
    return dist;
}

SplitStateCodeword enc(const DensityOperator& sigma, const std::string& label, const CodeParams& p, Rng& rng) {
    p.validate();
    check_message(sigma, label, p);
    SplitStateCodeword c;
    c.x = rng.bits(p.ell);
    c.y = rng.bits(p.y_bits());
    c.message_label = label;
    std::uint64_t key = 0;
    if (p.key_source == KeySource::Ideal) {
        key = p.sampling == CliffordSampling::Samp ? rng.bits(5 * p.b) : rng.below(sc_size(p.b));
        c.tag = IdealTag{c.x, c.y, key};
    } else {
        key = extractor_key(p, c.x, c.y);
    }
    c.z = masked(sigma.op(), label, key_unitary(p, key));
    return c;
}

Operator dec(const SplitStateCodeword& c, const CodeParams& p) {
    p.validate();
    if (!c.z.layout.contains(kCodewordZ) || c.z.layout.dim_of(kCodewordZ) != p.message_dim())
        throw DimensionMismatch("codeword quantum part does not match b");
    if (p.key_source == KeySource::Extractor) return unmasked(c.z, c.message_label, key_unitary(p, extractor_key(p, c.x, c.y)));
    if (c.tag && c.tag->x == c.x && c.tag->y == c.y) return unmasked(c.z, c.message_label, key_unitary(p, c.tag->key));
    const std::uint64_t count = num_keys(p);
    Operator acc = unmasked(c.z, c.message_label, key_unitary(p, 0));
    for (std::uint64_t k = 1; k < count; ++k) acc.matrix += unmasked(c.z, c.message_label, key_unitary(p, k)).matrix;
    acc.matrix /= static_cast<double>(count);
    return acc;
}

Operator enc_exact(const DensityOperator& sigma, const std::string& label, const CodeParams& p) {
    p.validate();
    check_message(sigma, label, p);
    const bool ideal = p.key_source == KeySource::Ideal;
    const std::size_t nx = std::size_t{1} << p.ell;
    const std::size_t ny = std::size_t{1} << p.y_bits();
    const std::size_t nk = ideal ? num_keys(p) : 1;
    const std::size_t d = sigma.dim();
    if (p.ell + p.y_bits() > 8 || nx * ny * nk * d > kMaxExactDim)
        throw SizeLimitExceeded("exact encoding is limited to tiny parameters");

    std::vector<Register> regs{{"X", nx}, {"Y", ny}};
    if (ideal) regs.push_back({"K", nk});
    std::vector<Operator> per_key;
    for (std::uint64_t k = 0; k < num_keys(p); ++k) per_key.push_back(masked(sigma.op(), label, key_unitary(p, k)));
    for (const auto& r : per_key.front().layout.registers()) regs.push_back(r);

    const std::size_t blocks = nx * ny * nk;
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(blocks * d), static_cast<Eigen::Index>(blocks * d));
    const double w = 1.0 / static_cast<double>(blocks);
    for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t k = 0; k < nk; ++k) {
                const std::uint64_t key = ideal ? k : extractor_key(p, x, y);
                const auto off = static_cast<Eigen::Index>(((x * ny + y) * nk + k) * d);
                const auto dd = static_cast<Eigen::Index>(d);
                m.block(off, off, dd, dd) = w * per_key[key].matrix;
            }
    return Operator(std::move(m), RegisterLayout(std::move(regs)));
}

Operator dec_exact(const Operator& codeword, const std::string& label, const CodeParams& p) {
    p.validate();
    const bool ideal = p.key_source == KeySource::Ideal;
    const auto& regs = codeword.layout.registers();
    const std::size_t lead = ideal ? 3 : 2;
    if (regs.size() <= lead || regs[0].label != "X" || regs[1].label != "Y" || (ideal && regs[2].label != "K") ||
        regs[lead].label != kCodewordZ)
        throw LayoutError("expected registers X, Y" + std::string(ideal ? ", K" : "") + ", Z, ...");
    const std::size_t ny = regs[1].dim;
    const std::size_t nk = ideal ? regs[2].dim : 1;
    const std::vector<Register> rest(regs.begin() + static_cast<std::ptrdiff_t>(lead), regs.end());
    const RegisterLayout rest_layout(rest);
    const std::size_t d = rest_layout.total_dim();
    const std::size_t blocks = codeword.layout.total_dim() / d;

    Operator acc(Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)),
                 rest_layout.renamed(kCodewordZ, label));
    for (std::size_t blk = 0; blk < blocks; ++blk) {
        const std::size_t k = blk % nk;
        const std::size_t y = (blk / nk) % ny;
        const std::size_t x = blk / (nk * ny);
        const std::uint64_t key = ideal ? k : extractor_key(p, x, y);
        const auto off = static_cast<Eigen::Index>(blk * d);
        const auto dd = static_cast<Eigen::Index>(d);
        Operator z(codeword.matrix.block(off, off, dd, dd), rest_layout);
        acc.matrix += unmasked(z, label, key_unitary(p, key)).matrix;
    }
    return acc;
}

Operator enc_average(const DensityOperator& sigma, const std::string& label, const CodeParams& p) {
    p.validate();
    check_message(sigma, label, p);
    const auto dist = key_distribution(p);
    Operator acc;
    for (std::uint64_t k = 0; k < dist.size(); ++k) {
        if (dist[k] == 0.0) continue;
        Operator term = masked(sigma.op(), label, key_unitary(p, k));
        if (acc.matrix.size() == 0) {
            acc = Operator(dist[k] * term.matrix, term.layout);
        } else {
            acc.matrix += dist[k] * term.matrix;
        }
    }
    return acc;
}

double part_privacy_distance(const DensityOperator& sigma, const std::string& label, const CodeParams& p,
                             CodewordPart part) {
    p.validate();
    check_message(sigma, label, p);
    const std::uint64_t count = num_keys(p);

    // Key distribution conditioned on each value of the part's classical
    // register, with the marginal weight of that value. Ideal keys do not
    // depend on (X, Y), so a single block suffices.
    std::vector<std::pair<double, std::vector<double>>> blocks;
    if (p.key_source == KeySource::Ideal) {
        blocks.emplace_back(1.0, std::vector<double>(count, 1.0 / static_cast<double>(count)));
    } else {
        const auto table = extractor_key_table(p);
        const std::size_t ny = std::size_t{1} << p.y_bits();
        const std::size_t nx = std::size_t{1} << p.ell;
        const std::size_t nv = part == CodewordPart::X ? nx : ny;
        const std::size_t per = part == CodewordPart::X ? ny : nx;
        std::vector<std::vector<double>> counts(nv, std::vector<double>(count, 0.0));
        for (std::size_t x = 0; x < nx; ++x)
            for (std::size_t y = 0; y < ny; ++y)
                counts[part == CodewordPart::X ? x : y][table[x * ny + y]] += 1.0 / static_cast<double>(per);
        for (auto& c : counts) blocks.emplace_back(1.0 / static_cast<double>(nv), std::move(c));
    }

    std::vector<Operator> rho_k, zeta_k;
    const DensityOperator mixed = DensityOperator::maximally_mixed(RegisterLayout{{label, p.message_dim()}});
    for (std::uint64_t k = 0; k < count; ++k) {
        rho_k.push_back(masked(sigma.op(), label, key_unitary(p, k)));
        zeta_k.push_back(masked(mixed.op(), label, key_unitary(p, k)));
    }

    std::vector<std::string> ext = sigma.layout().without({label}).labels();
    const bool has_ext = !ext.empty();
    const Operator sigma_ext = has_ext ? marginal(sigma.op(), ext) : Operator();

    double total = 0.0;
    for (const auto& [weight, dist] : blocks) {
        Operator rho(Matrix::Zero(rho_k[0].matrix.rows(), rho_k[0].matrix.cols()), rho_k[0].layout);
        Operator zeta(Matrix::Zero(zeta_k[0].matrix.rows(), zeta_k[0].matrix.cols()), zeta_k[0].layout);
        for (std::uint64_t k = 0; k < count; ++k) {
            if (dist[k] == 0.0) continue;
            rho.matrix += dist[k] * rho_k[k].matrix;
            zeta.matrix += dist[k] * zeta_k[k].matrix;
        }
        Operator lhs, rhs;
        if (part == CodewordPart::X) {
            if (!has_ext) continue;  // nothing but a scalar remains
            lhs = partial_trace(rho, {kCodewordZ});
            rhs = Operator(sigma_ext.matrix * zeta.matrix.trace(), sigma_ext.layout);
        } else if (has_ext) {
            lhs = rho;
            rhs = reorder(tensor(zeta, sigma_ext), rho.layout.labels());
        } else {
            lhs = rho;
            rhs = zeta;
        }
        total += weight * trace_norm(lhs.matrix - rhs.matrix);
    }
    return total;
}

RateRow rate_row(double delta) {
    if (!(delta > 0.0 && delta < 0.5)) throw InvalidParams("delta must lie strictly between 0 and 1/2");
    RateRow row;
    row.delta = delta;
    row.n_over_ell = 1.0 + delta + 0.1 + delta / 5.0;
    row.b_max_over_ell = (0.5 - delta) / 5.0;
    row.rate = row.b_max_over_ell / row.n_over_ell;
    return row;
}

std::vector<RateRow> rate_table(const std::vector<double>& deltas) {
    std::vector<RateRow> out;
    out.reserve(deltas.size());
    for (double d : deltas) out.push_back(rate_row(d));
    return out;
}

}  // namespace qnm
