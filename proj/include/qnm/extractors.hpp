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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qnm/gf2k.hpp"
#include "qnm/qmatrix.hpp"
#include "qnm/rng.hpp"

namespace qnm {

/// Vector over GF(2^k).
struct FieldVector {
    unsigned k = 1;
    std::vector<GF2k::Elem> elements;

    std::size_t size() const { return elements.size(); }
    bool is_zero() const;
    /// Packs element i into bits [i k, (i + 1) k).
    std::uint64_t to_bits() const;
    static FieldVector from_bits(std::uint64_t bits, unsigned k, std::size_t n);
    bool operator==(const FieldVector&) const = default;
};

/// Inner product sum_i x_i y_i over GF(2^k).
GF2k::Elem ip_extract(const FieldVector& x, const FieldVector& y);

/// |IP^{-1}(s)| for vectors of length n over GF(2^k), as a long double.
long double ip_preimage_size(GF2k::Elem s, unsigned k, std::size_t n);

/// Uniform sample from IP^{-1}(s). For s != 0, x is uniform over nonzero
/// vectors (rejection); for s = 0, x = 0 is chosen with its preimage weight
/// q^n / |IP^{-1}(0)|, otherwise x is uniform nonzero. y is uniform on the
/// affine hyperplane <x, y> = s, solved at the first nonzero coordinate of x.
std::pair<FieldVector, FieldVector> ip_preimage_sample(GF2k::Elem s, unsigned k, std::size_t n, Rng& rng);

enum class NmExtKind { Table, InnerProduct, PolyHash };

/// A function {0,1}^n x {0,1}^m -> {0,1}^r with optional certification data.
///
/// InnerProduct: n = m = N k and r = k; inputs are read as FieldVectors.
/// PolyHash: x is cut into r-bit blocks x_i and the output is
///   sum_i x_i * alpha^{(i + 1 + u)(y + 1 + v)} in GF(2^r), (u, v) = offsets.
/// Table: explicit outputs indexed by (x << m) | y.
struct NmExtDescriptor {
    NmExtKind kind = NmExtKind::Table;
    unsigned n = 0, m = 0, r = 0;
    unsigned field_k = 0;
    unsigned offset_u = 0, offset_v = 0;
    std::vector<std::uint32_t> table;
    std::optional<double> certified_epsilon;
    std::string certification_family;
    std::string name;

    static NmExtDescriptor inner_product(unsigned k, unsigned vector_length);
    static NmExtDescriptor poly_hash(unsigned n, unsigned m, unsigned r, unsigned offset_u = 0, unsigned offset_v = 0);
    static NmExtDescriptor from_table(unsigned n, unsigned m, unsigned r, std::vector<std::uint32_t> table);
    /// Tabulates any descriptor (n + m <= 20).
    NmExtDescriptor tabulated() const;
    void validate() const;
};

std::uint32_t nmext_eval(const NmExtDescriptor& d, std::uint64_t x, std::uint64_t y);

/// Deterministic tampering function on b-bit strings, as a full table.
using TamperTable = std::vector<std::uint64_t>;

enum class TamperFamily {
    IdentityConstantXor,  // identity, all constants, all xor-shifts x ^ a
};
std::string to_string(TamperFamily family);
std::vector<TamperTable> tamper_family(unsigned bits, TamperFamily family);

struct Item2Value {
    double p_same = 0.0;
    double same_distance = 0.0;  // ||R | same - U_r||_1
    double tamp_distance = 0.0;  // ||R R' | tamp - U_r (x) R' | tamp||_1
    double value = 0.0;          // p_same same_distance + (1 - p_same) tamp_distance
};

/// Exact value of the non-malleability expression for uniform independent
/// X, Y, deterministic tampering X' = f(X), Y' = g(Y) and trivial W.
Item2Value nmext_item2(const NmExtDescriptor& d, const TamperTable& f, const TamperTable& g);

struct CertificationReport {
    double strong_x = 0.0;  // ||nmExt(X,Y) X - U_r (x) U_n||_1
    double strong_y = 0.0;  // ||nmExt(X,Y) Y - U_r (x) U_m||_1
    double worst_item2 = 0.0;
    std::size_t worst_f = 0, worst_g = 0;
    std::size_t pairs_tested = 0;
    std::string family;
    double certified_epsilon = 0.0;
    double tolerance = 0.0;
    bool within_tolerance = false;
};

/// Exhaustive certification against classical deterministic tampering from
/// the given family. Throws SizeLimitExceeded when n + m > 16 or the sweep
/// would exceed about 2^32 evaluations.
CertificationReport nmext_certify_classical(const NmExtDescriptor& d, double tolerance,
                                            TamperFamily family = TamperFamily::IdentityConstantXor);
/// Stamps the certification result into a copy of the descriptor.
NmExtDescriptor with_certification(const NmExtDescriptor& d, const CertificationReport& report);

/// Exhaustive search over PolyHash offsets (u, v) in [0, 4)^2 for n + m <= 10;
/// returns the certified tabulated descriptor with the smallest epsilon.
NmExtDescriptor search_toy_descriptor(unsigned n, unsigned m, unsigned r,
                                      TamperFamily family = TamperFamily::IdentityConstantXor);

struct QpaLabels {
    std::string x, x_hat, y, y_hat;
    std::string w1, w2;  // empty when absent
};

struct QpaResult {
    bool pass = false;
    HminBracket h1;  // H_min(X | W2 Y Yhat)
    HminBracket h2;  // H_min(Y | W1 X Xhat)
    double margin1 = 0.0, margin2 = 0.0;  // lower bracket minus threshold
};

QpaResult qpa_check(const DensityOperator& state, const QpaLabels& labels, double k1, double k2);

/// Exact ||rho_{Z X W} - U_Z (x) rho_{X W}||_1 with X, Y uniform in
/// GF(2^k)^n, Z = IP(X, Y) and classical leakage W = leak(Y) in [0, leak_dim).
double ip_leakage_distance(unsigned k, std::size_t n, const std::function<std::size_t(const FieldVector&)>& leak,
                           std::size_t leak_dim);

}  // namespace qnm
