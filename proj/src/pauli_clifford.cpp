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

#include "qnm/pauli_clifford.hpp"

#include <array>
#include <bit>
#include <mutex>

#include "qnm/errors.hpp"
#include "qnm/gf2k.hpp"

namespace qnm {

namespace {

unsigned popcount(std::uint64_t v) { return static_cast<unsigned>(std::popcount(v)); }

std::uint64_t low_mask(unsigned n) { return n >= 64 ? ~0ULL : ((1ULL << n) - 1); }

void check_symbolic(unsigned n) {
    if (n == 0) throw InvalidParams("Pauli operators need at least one qubit");
    if (n > kMaxSymbolicQubits) throw SizeLimitExceeded("at most 32 qubits are supported");
}

void check_dense(unsigned n) {
    if (n > kMaxDenseQubits) throw SizeLimitExceeded("dense matrices are limited to 12 qubits");
}

void check_same_n(const PauliOp& a, const PauliOp& b) {
    if (a.n != b.n) throw DimensionMismatch("Pauli operators act on different qubit counts");
}

const std::array<cplx, 4> kIPow = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};

unsigned qubit_bit(unsigned n, unsigned qubit) {
    if (qubit >= n) throw InvalidParams("qubit index out of range");
    return n - 1 - qubit;
}

// Inverse of a square bit matrix given by rows (bit j of rows[r] is entry
// (r, j)). Throws if singular.
std::vector<std::uint64_t> gf2_inverse(std::vector<std::uint64_t> rows) {
    const std::size_t m = rows.size();
    std::vector<std::uint64_t> inv(m);
    for (std::size_t r = 0; r < m; ++r) inv[r] = 1ULL << r;
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t pivot = col;
        while (pivot < m && !((rows[pivot] >> col) & 1ULL)) ++pivot;
        if (pivot == m) throw InvalidParams("singular bit matrix");
        std::swap(rows[pivot], rows[col]);
        std::swap(inv[pivot], inv[col]);
        for (std::size_t r = 0; r < m; ++r) {
            if (r != col && ((rows[r] >> col) & 1ULL)) {
                rows[r] ^= rows[col];
                inv[r] ^= inv[col];
            }
        }
    }
    return inv;
}

std::uint64_t gf2_apply(const std::vector<std::uint64_t>& rows, std::uint64_t v) {
    std::uint64_t out = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) out |= static_cast<std::uint64_t>(popcount(rows[r] & v) & 1U) << r;
    return out;
}

}  // namespace

// ---------------------------------------------------------------- PauliOp

PauliOp PauliOp::identity(unsigned n) {
    check_symbolic(n);
    return PauliOp{n, 0, 0, 0};
}

PauliOp PauliOp::hermitian(unsigned n, std::uint64_t x, std::uint64_t z) {
    check_symbolic(n);
    if ((x | z) & ~low_mask(n)) throw InvalidParams("Pauli mask exceeds qubit count");
    return PauliOp{n, x, z, popcount(x & z) % 4};
}

PauliOp PauliOp::from_index(unsigned n, std::uint64_t index) {
    check_symbolic(n);
    if (2 * n < 64 && index >= (1ULL << (2 * n))) throw InvalidParams("Pauli index out of range");
    return hermitian(n, index & low_mask(n), index >> n);
}

PauliOp PauliOp::parse(const std::string& text) {
    std::size_t pos = 0;
    unsigned sign = 0;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
        if (text[pos] == '-') sign = 2;
        ++pos;
    }
    if (pos < text.size() && text[pos] == 'i') {
        sign = (sign + 1) % 4;
        ++pos;
    }
    const std::string body = text.substr(pos);
    check_symbolic(static_cast<unsigned>(body.size()));
    const unsigned n = static_cast<unsigned>(body.size());
    std::uint64_t x = 0, z = 0;
    for (unsigned q = 0; q < n; ++q) {
        const std::uint64_t bit = 1ULL << (n - 1 - q);
        switch (body[q]) {
            case 'I': break;
            case 'X': x |= bit; break;
            case 'Z': z |= bit; break;
            case 'Y': x |= bit; z |= bit; break;
            default: throw InvalidParams("invalid Pauli character in '" + text + "'");
        }
    }
    PauliOp p = hermitian(n, x, z);
    p.phase = (p.phase + sign) % 4;
    return p;
}

std::string PauliOp::to_string() const {
    const unsigned display = (phase + 4 - popcount(x & z) % 4) % 4;
    static const std::array<const char*, 4> prefix = {"", "i", "-", "-i"};
    std::string s = prefix[display];
    for (unsigned q = 0; q < n; ++q) {
        const unsigned b = n - 1 - q;
        const bool xb = (x >> b) & 1ULL, zb = (z >> b) & 1ULL;
        s += xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
    }
    return s;
}

bool PauliOp::commutes_with(const PauliOp& o) const {
    check_same_n(*this, o);
    return ((popcount(x & o.z) + popcount(z & o.x)) & 1U) == 0;
}

bool PauliOp::is_hermitian() const { return (phase % 2) == (popcount(x & z) % 2); }

PauliOp PauliOp::adjoint() const { return PauliOp{n, x, z, (4 - phase % 4 + 2 * popcount(x & z)) % 4}; }

PauliOp PauliOp::times_phase(unsigned k) const { return PauliOp{n, x, z, (phase + k) % 4}; }

PauliOp operator*(const PauliOp& a, const PauliOp& b) {
    check_same_n(a, b);
    return PauliOp{a.n, a.x ^ b.x, a.z ^ b.z, (a.phase + b.phase + 2 * popcount(a.z & b.x)) % 4};
}

std::vector<PauliOp> all_paulis(unsigned n) {
    check_symbolic(n);
    if (n > kMaxDenseQubits) throw SizeLimitExceeded("too many Paulis to list");
    std::vector<PauliOp> out;
    out.reserve(std::size_t{1} << (2 * n));
    for (std::uint64_t i = 0; i < (1ULL << (2 * n)); ++i) out.push_back(PauliOp::from_index(n, i));
    return out;
}

Vector pauli_apply(const PauliOp& p, const Vector& v) {
    check_dense(p.n);
    const std::uint64_t dim = 1ULL << p.n;
    if (static_cast<std::uint64_t>(v.size()) != dim) throw DimensionMismatch("vector size does not match Pauli");
    Vector out(v.size());
    const cplx ph = kIPow[p.phase % 4];
    for (std::uint64_t u = 0; u < dim; ++u) {
        const double s = (popcount(p.z & u) & 1U) ? -1.0 : 1.0;
        out(static_cast<Eigen::Index>(u ^ p.x)) = ph * s * v(static_cast<Eigen::Index>(u));
    }
    return out;
}

Matrix pauli_dense(const PauliOp& p) {
    check_dense(p.n);
    const std::uint64_t dim = 1ULL << p.n;
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    const cplx ph = kIPow[p.phase % 4];
    for (std::uint64_t u = 0; u < dim; ++u) {
        const double s = (popcount(p.z & u) & 1U) ? -1.0 : 1.0;
        m(static_cast<Eigen::Index>(u ^ p.x), static_cast<Eigen::Index>(u)) = ph * s;
    }
    return m;
}

std::vector<PauliTerm> pauli_decompose(const Matrix& m, double drop_below) {
    if (m.rows() != m.cols()) throw DimensionMismatch("Pauli decomposition needs a square matrix");
    const auto dim = static_cast<std::uint64_t>(m.rows());
    if (dim < 2 || (dim & (dim - 1)) != 0) throw DimensionMismatch("dimension is not a power of two");
    const unsigned n = static_cast<unsigned>(std::countr_zero(dim));
    check_dense(n);
    std::vector<PauliTerm> out;
    for (std::uint64_t idx = 0; idx < dim * dim; ++idx) {
        const PauliOp p = PauliOp::from_index(n, idx);
        cplx acc = 0;
        for (std::uint64_t u = 0; u < dim; ++u) {
            const double s = (popcount(p.z & u) & 1U) ? -1.0 : 1.0;
            acc += s * m(static_cast<Eigen::Index>(u ^ p.x), static_cast<Eigen::Index>(u));
        }
        acc *= std::conj(kIPow[p.phase % 4]) / static_cast<double>(dim);
        if (std::abs(acc) > drop_below) out.push_back({p, acc});
    }
    return out;
}

Matrix pauli_recompose(const std::vector<PauliTerm>& terms, unsigned n) {
    check_dense(n);
    const auto dim = static_cast<Eigen::Index>(1ULL << n);
    Matrix m = Matrix::Zero(dim, dim);
    for (const auto& t : terms) {
        if (t.pauli.n != n) throw DimensionMismatch("term acts on a different qubit count");
        m += t.coefficient * pauli_dense(t.pauli);
    }
    return m;
}

// ------------------------------------------------------------- CliffordOp

struct CliffordOp::DenseCache {
    std::once_flag once;
    Matrix matrix;
};

CliffordOp::CliffordOp(unsigned n, std::vector<PauliOp> x_images, std::vector<PauliOp> z_images)
    : n_(n), x_img_(std::move(x_images)), z_img_(std::move(z_images)), cache_(std::make_shared<DenseCache>()) {
    check_symbolic(n);
    if (x_img_.size() != n || z_img_.size() != n) throw DimensionMismatch("need one image per generator");
    for (unsigned i = 0; i < n; ++i) {
        for (const PauliOp* p : {&x_img_[i], &z_img_[i]}) {
            if (p->n != n) throw DimensionMismatch("generator image acts on wrong qubit count");
            if (!p->is_hermitian() || p->is_identity_up_to_phase())
                throw InvalidParams("generator images must be Hermitian non-identity Paulis");
        }
    }
    for (unsigned i = 0; i < n; ++i) {
        for (unsigned j = 0; j < n; ++j) {
            const bool ok = x_img_[i].commutes_with(x_img_[j]) && z_img_[i].commutes_with(z_img_[j]) &&
                            (x_img_[i].commutes_with(z_img_[j]) == (i != j));
            if (!ok) throw InvalidParams("generator images violate the symplectic relations");
        }
    }
}

CliffordOp CliffordOp::identity(unsigned n) {
    check_symbolic(n);
    std::vector<PauliOp> xs, zs;
    for (unsigned i = 0; i < n; ++i) {
        xs.push_back(PauliOp{n, 1ULL << i, 0, 0});
        zs.push_back(PauliOp{n, 0, 1ULL << i, 0});
    }
    return CliffordOp(n, std::move(xs), std::move(zs));
}

CliffordOp CliffordOp::from_pauli(const PauliOp& p) {
    CliffordOp id = identity(p.n);
    std::vector<PauliOp> xs = id.x_img_, zs = id.z_img_;
    for (auto* v : {&xs, &zs})
        for (auto& g : *v)
            if (!g.commutes_with(p)) g = g.times_phase(2);
    return CliffordOp(p.n, std::move(xs), std::move(zs));
}

CliffordOp CliffordOp::hadamard(unsigned n, unsigned qubit) {
    CliffordOp id = identity(n);
    const unsigned b = qubit_bit(n, qubit);
    std::vector<PauliOp> xs = id.x_img_, zs = id.z_img_;
    std::swap(xs[b], zs[b]);
    return CliffordOp(n, std::move(xs), std::move(zs));
}

CliffordOp CliffordOp::phase_s(unsigned n, unsigned qubit) {
    CliffordOp id = identity(n);
    const unsigned b = qubit_bit(n, qubit);
    std::vector<PauliOp> xs = id.x_img_, zs = id.z_img_;
    xs[b] = PauliOp::hermitian(n, 1ULL << b, 1ULL << b);
    return CliffordOp(n, std::move(xs), std::move(zs));
}

CliffordOp CliffordOp::cnot(unsigned n, unsigned control, unsigned target) {
    if (control == target) throw InvalidParams("CNOT control and target coincide");
    CliffordOp id = identity(n);
    const unsigned c = qubit_bit(n, control), t = qubit_bit(n, target);
    std::vector<PauliOp> xs = id.x_img_, zs = id.z_img_;
    xs[c] = PauliOp{n, (1ULL << c) | (1ULL << t), 0, 0};
    zs[t] = PauliOp{n, 0, (1ULL << c) | (1ULL << t), 0};
    return CliffordOp(n, std::move(xs), std::move(zs));
}

CliffordOp CliffordOp::random(unsigned n, unsigned depth, Rng& rng) {
    CliffordOp c = from_pauli(PauliOp::from_index(n, rng.below(1ULL << (2 * n))));
    for (unsigned k = 0; k < depth; ++k) {
        const auto kind = rng.below(n > 1 ? 3 : 2);
        const auto q = static_cast<unsigned>(rng.below(n));
        if (kind == 0) {
            c = hadamard(n, q) * c;
        } else if (kind == 1) {
            c = phase_s(n, q) * c;
        } else {
            auto t = static_cast<unsigned>(rng.below(n - 1));
            if (t >= q) ++t;
            c = cnot(n, q, t) * c;
        }
    }
    return c;
}

std::vector<std::vector<std::uint8_t>> CliffordOp::symplectic() const {
    std::vector<std::vector<std::uint8_t>> s(2 * n_, std::vector<std::uint8_t>(2 * n_, 0));
    for (unsigned j = 0; j < 2 * n_; ++j) {
        const PauliOp& g = j < n_ ? x_img_[j] : z_img_[j - n_];
        for (unsigned r = 0; r < n_; ++r) {
            s[r][j] = static_cast<std::uint8_t>((g.x >> r) & 1ULL);
            s[r + n_][j] = static_cast<std::uint8_t>((g.z >> r) & 1ULL);
        }
    }
    return s;
}

std::vector<unsigned> CliffordOp::phase_vector() const {
    std::vector<unsigned> out;
    for (const auto& g : x_img_) out.push_back(g.phase % 4);
    for (const auto& g : z_img_) out.push_back(g.phase % 4);
    return out;
}

PauliOp CliffordOp::conjugate(const PauliOp& p) const {
    if (p.n != n_) throw DimensionMismatch("Pauli and Clifford act on different qubit counts");
    PauliOp out{n_, 0, 0, p.phase % 4};
    for (unsigned i = 0; i < n_; ++i)
        if ((p.x >> i) & 1ULL) out = out * x_img_[i];
    for (unsigned i = 0; i < n_; ++i)
        if ((p.z >> i) & 1ULL) out = out * z_img_[i];
    return out;
}

CliffordOp CliffordOp::inverse() const {
    // Row r of the map (x | z << n) -> image bits.
    std::vector<std::uint64_t> rows(2 * n_, 0);
    for (unsigned j = 0; j < 2 * n_; ++j) {
        const PauliOp& g = j < n_ ? x_img_[j] : z_img_[j - n_];
        const std::uint64_t col = g.index();
        for (unsigned r = 0; r < 2 * n_; ++r)
            if ((col >> r) & 1ULL) rows[r] |= 1ULL << j;
    }
    const auto inv = gf2_inverse(rows);
    const std::uint64_t mask = low_mask(n_);
    auto preimage = [&](const PauliOp& g) {
        const std::uint64_t u = gf2_apply(inv, g.index());
        const PauliOp p0{n_, u & mask, u >> n_, 0};
        const PauliOp img = conjugate(p0);
        return p0.times_phase((g.phase + 4 - img.phase) % 4);
    };
    CliffordOp id = identity(n_);
    std::vector<PauliOp> xs, zs;
    for (unsigned i = 0; i < n_; ++i) {
        xs.push_back(preimage(id.x_img_[i]));
        zs.push_back(preimage(id.z_img_[i]));
    }
    return CliffordOp(n_, std::move(xs), std::move(zs));
}

PauliOp CliffordOp::conjugate_inverse(const PauliOp& p) const { return inverse().conjugate(p); }

const Matrix& CliffordOp::dense() const {
    check_dense(n_);
    std::call_once(cache_->once, [this] {
        const std::uint64_t dim = 1ULL << n_;
        const auto d = static_cast<Eigen::Index>(dim);
        Vector phi0;
        for (std::uint64_t k = 0; k < dim; ++k) {
            Vector v = Vector::Zero(d);
            v(static_cast<Eigen::Index>(k)) = 1.0;
            for (const auto& g : z_img_) v = 0.5 * (v + pauli_apply(g, v));
            if (v.norm() > 1e-6) {
                phi0 = v / v.norm();
                break;
            }
        }
        Matrix u(d, d);
        for (std::uint64_t col = 0; col < dim; ++col)
            u.col(static_cast<Eigen::Index>(col)) = pauli_apply(conjugate(PauliOp{n_, col, 0, 0}), phi0);
        cache_->matrix = std::move(u);
    });
    return cache_->matrix;
}

std::vector<std::uint64_t> CliffordOp::signature() const {
    std::vector<std::uint64_t> sig;
    sig.push_back(n_);
    for (const auto* v : {&x_img_, &z_img_})
        for (const auto& g : *v) {
            sig.push_back(g.x);
            sig.push_back(g.z);
            sig.push_back(g.phase % 4);
        }
    return sig;
}

CliffordOp operator*(const CliffordOp& a, const CliffordOp& b) {
    if (a.num_qubits() != b.num_qubits()) throw DimensionMismatch("Clifford qubit counts differ");
    std::vector<PauliOp> xs, zs;
    for (const auto& g : b.x_images()) xs.push_back(a.conjugate(g));
    for (const auto& g : b.z_images()) zs.push_back(a.conjugate(g));
    return CliffordOp(a.num_qubits(), std::move(xs), std::move(zs));
}

Matrix clifford_dense(const CliffordOp& c) { return c.dense(); }

// ------------------------------------------------------- special subgroup

namespace {

constexpr unsigned kMaxScQubits = 12;

struct ScTables {
    std::unique_ptr<GF2k> field;
    std::vector<std::uint64_t> trace_form;      // B, as rows
    std::vector<std::uint64_t> trace_form_inv;  // B^{-1}, as rows
};

const ScTables& sc_tables(unsigned b) {
    static std::array<std::once_flag, kMaxScQubits + 1> flags;
    static std::array<ScTables, kMaxScQubits + 1> tables;
    std::call_once(flags[b], [b] {
        ScTables& t = tables[b];
        t.field = std::make_unique<GF2k>(b);
        t.trace_form.assign(b, 0);
        for (unsigned i = 0; i < b; ++i)
            for (unsigned j = 0; j < b; ++j)
                if (t.field->trace(t.field->alpha_pow(i + j))) t.trace_form[i] |= 1ULL << j;
        t.trace_form_inv = gf2_inverse(t.trace_form);
    });
    return tables[b];
}

void check_sc_qubits(unsigned b) {
    if (b == 0) throw InvalidParams("the subgroup needs at least one qubit");
    if (b > kMaxScQubits) throw SizeLimitExceeded("the subgroup sampler supports at most 12 qubits");
}

// Clifford whose linear part is S = [[a, beta], [c, d]] acting on pairs of
// field elements, transported to Pauli bit vectors by (x, z) <-> (x, B^{-1} z).
CliffordOp sl2_clifford(unsigned b, std::uint32_t a, std::uint32_t beta, std::uint32_t c, std::uint32_t d) {
    const ScTables& t = sc_tables(b);
    const GF2k& f = *t.field;
    auto map = [&](std::uint64_t x, std::uint64_t z) {
        const auto fa = static_cast<std::uint32_t>(x);
        const auto fc = static_cast<std::uint32_t>(gf2_apply(t.trace_form_inv, z));
        const std::uint32_t na = f.mul(a, fa) ^ f.mul(beta, fc);
        const std::uint32_t nc = f.mul(c, fa) ^ f.mul(d, fc);
        return PauliOp::hermitian(b, na, gf2_apply(t.trace_form, nc));
    };
    std::vector<PauliOp> xs, zs;
    for (unsigned i = 0; i < b; ++i) {
        xs.push_back(map(1ULL << i, 0));
        zs.push_back(map(0, 1ULL << i));
    }
    return CliffordOp(b, std::move(xs), std::move(zs));
}

CliffordOp sc_from_parts(unsigned b, std::uint64_t pauli_index, std::uint32_t a, std::uint32_t c, std::uint32_t t) {
    const GF2k& f = *sc_tables(b).field;
    std::uint32_t beta0, d0;
    if (a != 0) {
        beta0 = 0;
        d0 = f.inv(a);
    } else {
        beta0 = f.inv(c);
        d0 = 0;
    }
    const std::uint32_t beta = beta0 ^ f.mul(t, a);
    const std::uint32_t d = d0 ^ f.mul(t, c);
    return CliffordOp::from_pauli(PauliOp::from_index(b, pauli_index)) * sl2_clifford(b, a, beta, c, d);
}

}  // namespace

SubCliffordKey::SubCliffordKey(unsigned b_, std::uint64_t bits_) : b(b_), bits(bits_) {
    check_sc_qubits(b);
    if (bits >> (5 * b)) throw InvalidParams("key has more than 5b bits");
}

std::uint64_t sc_size(unsigned b) {
    check_sc_qubits(b);
    return (1ULL << (5 * b)) - (1ULL << (3 * b));
}

CliffordOp sc_samp(const SubCliffordKey& key) {
    const unsigned b = key.b;
    const std::uint64_t m = low_mask(b);
    const std::uint64_t pauli = key.bits & low_mask(2 * b);
    auto a = static_cast<std::uint32_t>((key.bits >> (2 * b)) & m);
    const auto c = static_cast<std::uint32_t>((key.bits >> (3 * b)) & m);
    const auto t = static_cast<std::uint32_t>((key.bits >> (4 * b)) & m);
    if (a == 0 && c == 0) a = 1;
    return sc_from_parts(b, pauli, a, c, t);
}

CliffordOp sc_element(unsigned b, std::uint64_t i) {
    if (i >= sc_size(b)) throw InvalidParams("subgroup element index out of range");
    const std::uint64_t paulis = 1ULL << (2 * b);
    const std::uint64_t columns = paulis - 1;
    const std::uint64_t pauli = i % paulis;
    const std::uint64_t rest = i / paulis;
    const std::uint64_t col = rest % columns + 1;
    const auto t = static_cast<std::uint32_t>(rest / columns);
    return sc_from_parts(b, pauli, static_cast<std::uint32_t>(col & low_mask(b)),
                         static_cast<std::uint32_t>(col >> b), t);
}

std::vector<CliffordOp> sc_enumerate(unsigned b) {
    check_sc_qubits(b);
    if (b > 2) throw SizeLimitExceeded("enumeration of the subgroup is limited to b <= 2");
    std::vector<CliffordOp> out;
    const std::uint64_t size = sc_size(b);
    out.reserve(size);
    for (std::uint64_t i = 0; i < size; ++i) out.push_back(sc_element(b, i));
    return out;
}

std::vector<CliffordOp> pauli_group(unsigned n) {
    std::vector<CliffordOp> out;
    for (const auto& p : all_paulis(n)) out.push_back(CliffordOp::from_pauli(p));
    return out;
}

std::vector<Matrix> dense_group(const std::vector<CliffordOp>& group) {
    std::vector<Matrix> out;
    out.reserve(group.size());
    for (const auto& c : group) out.push_back(c.dense());
    return out;
}

// ----------------------------------------------------------------- twirls

Operator group_twirl(const Operator& m, const std::vector<std::string>& targets, const std::vector<Matrix>& group) {
    if (group.empty()) throw InvalidParams("cannot twirl over an empty group");
    Matrix acc = Matrix::Zero(m.matrix.rows(), m.matrix.cols());
    for (const auto& g : group) acc += conjugate_local(m, targets, g).matrix;
    return Operator(acc / static_cast<double>(group.size()), m.layout);
}

Matrix twirl_cross_term(const PauliOp& p, const PauliOp& q, const Matrix& rho, const std::vector<CliffordOp>& group) {
    check_same_n(p, q);
    Matrix acc = Matrix::Zero(rho.rows(), rho.cols());
    const PauliOp qd = q.adjoint();
    for (const auto& c : group) {
        const CliffordOp ci = c.inverse();
        acc += pauli_dense(ci.conjugate(p)) * rho * pauli_dense(ci.conjugate(qd));
    }
    return acc;
}

Operator modified_twirl_cross_term(const PauliOp& p, const PauliOp& q, const Operator& rho,
                                   const std::vector<std::string>& targets, const std::vector<CliffordOp>& group) {
    check_same_n(p, q);
    Matrix acc = Matrix::Zero(rho.matrix.rows(), rho.matrix.cols());
    for (const auto& c : group) {
        const CliffordOp ci = c.inverse();
        const Matrix left = pauli_dense(ci.conjugate(p));
        const Matrix right = pauli_dense(ci.conjugate(q));
        acc += sandwich_local(rho, targets, left, right.adjoint()).matrix;
    }
    return Operator(acc, rho.layout);
}

Matrix uniform_conjugation(const PauliOp& p, const std::vector<CliffordOp>& group) {
    if (group.empty()) throw InvalidParams("cannot average over an empty group");
    const auto dim = static_cast<Eigen::Index>(1ULL << p.n);
    Matrix acc = Matrix::Zero(dim, dim);
    for (const auto& c : group) acc += pauli_dense(c.conjugate(p));
    return acc / static_cast<double>(group.size());
}

EprTwirl epr_twirl_decomposition(const DensityOperator& rho, const std::string& hat, const std::string& a) {
    const std::size_t d = rho.layout().dim_of(a);
    if (d < 2 || (d & (d - 1)) != 0) throw DimensionMismatch("register dimension is not a power of two");
    return epr_twirl_decomposition(rho, hat, a, sc_enumerate(static_cast<unsigned>(std::countr_zero(d))));
}

EprTwirl epr_twirl_decomposition(const DensityOperator& rho, const std::string& hat, const std::string& a,
                                 const std::vector<CliffordOp>& group) {
    if (group.empty()) throw InvalidParams("cannot twirl over an empty group");
    const RegisterLayout& l = rho.layout();
    if (l.size() != 2 || !l.contains(hat) || !l.contains(a))
        throw LayoutError("state must live on exactly the two named registers");
    const std::size_t d = l.dim_of(a);
    if (l.dim_of(hat) != d || d != (std::size_t{1} << group.front().num_qubits()))
        throw DimensionMismatch("registers must both have dimension 2^b");
    const Matrix m = reorder(rho.op(), {hat, a}).matrix;
    const auto dd = static_cast<Eigen::Index>(d * d);

    EprTwirl out;
    out.twirled = Matrix::Zero(dd, dd);
    for (const auto& c : group) {
        const Matrix& u = c.dense();
        const Matrix t = kron(Matrix(u.transpose()), Matrix(u.adjoint()));
        out.twirled += t * m * t.adjoint();
    }
    out.twirled /= static_cast<double>(group.size());

    const Vector psi = max_entangled(d);
    const Matrix proj = psi * psi.adjoint();
    out.p_epr = std::real(psi.dot(m * psi));
    const Matrix id = Matrix::Identity(dd, dd);
    out.closed_form = out.p_epr * proj + (1.0 - out.p_epr) * (id - proj) / static_cast<double>(d * d - 1);
    out.closed_form_residual = (out.twirled - out.closed_form).norm();
    const Matrix mixture = out.p_epr * proj + (1.0 - out.p_epr) * id / static_cast<double>(d * d);
    out.mixture_distance = trace_norm(out.twirled - mixture);
    return out;
}

}  // namespace qnm
