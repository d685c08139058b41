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

#include "qnm/gf2k.hpp"

#include <array>
#include <memory>
#include <mutex>
#include <string>

#include "qnm/errors.hpp"

namespace qnm {

namespace {

// Primitive polynomials, one per degree; index k-1.
constexpr std::array<std::uint32_t, 16> kPrimitive = {
    0x3,   0x7,   0xB,    0x13,   0x25,   0x43,   0x89,   0x11D,
    0x211, 0x409, 0x805,  0x1053, 0x201B, 0x4443, 0x8003, 0x1100B,
};

}  // namespace

std::uint32_t GF2k::default_modulus(unsigned k) {
    if (k < 1 || k > 16) throw InvalidParams("GF(2^k) supports 1 <= k <= 16, got k=" + std::to_string(k));
    return kPrimitive[k - 1];
}

GF2k::GF2k(unsigned k) : k_(k), poly_(default_modulus(k)) {
    const std::uint32_t order = size() - 1;
    exp_.assign(2 * static_cast<std::size_t>(order), 0);
    log_.assign(size(), 0);
    std::uint32_t v = 1;
    for (std::uint32_t i = 0; i < order; ++i) {
        exp_[i] = v;
        log_[v] = i;
        v <<= 1;
        if (v & size()) v ^= poly_;
    }
    if (v != 1) throw InvalidParams("modulus is not primitive");
    for (std::uint32_t i = order; i < exp_.size(); ++i) exp_[i] = exp_[i - order];
}

void GF2k::check(Elem a) const {
    if (a >= size()) throw InvalidParams("element out of range for GF(2^" + std::to_string(k_) + ")");
}

GF2k::Elem GF2k::mul(Elem a, Elem b) const {
    check(a);
    check(b);
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
}

GF2k::Elem GF2k::inv(Elem a) const {
    check(a);
    if (a == 0) throw InvalidParams("zero has no inverse");
    const std::uint32_t order = size() - 1;
    return exp_[(order - log_[a]) % order];
}

GF2k::Elem GF2k::pow(Elem a, std::uint64_t e) const {
    check(a);
    if (e == 0) return 1;
    if (a == 0) return 0;
    const std::uint64_t order = size() - 1;
    return exp_[static_cast<std::size_t>((log_[a] * (e % order)) % order)];
}

GF2k::Elem GF2k::alpha_pow(long long e) const {
    const long long order = static_cast<long long>(size()) - 1;
    long long r = e % order;
    if (r < 0) r += order;
    return exp_[static_cast<std::size_t>(r)];
}

GF2k::Elem GF2k::trace(Elem a) const {
    check(a);
    Elem t = 0, p = a;
    for (unsigned i = 0; i < k_; ++i) {
        t ^= p;
        p = mul(p, p);
    }
    return t;
}

GF2k::Elem GF2k::dot(const std::vector<Elem>& a, const std::vector<Elem>& b) const {
    if (a.size() != b.size()) throw DimensionMismatch("inner product of vectors with different lengths");
    Elem s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s ^= mul(a[i], b[i]);
    return s;
}

const GF2k& gf2k_field(unsigned k) {
    static std::array<std::once_flag, 17> flags;
    static std::array<std::unique_ptr<GF2k>, 17> fields;
    (void)GF2k::default_modulus(k);
    std::call_once(flags[k], [k] { fields[k] = std::make_unique<GF2k>(k); });
    return *fields[k];
}

}  // namespace qnm
