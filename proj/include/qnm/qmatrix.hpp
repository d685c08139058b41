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

#ifndef QNM_QMATRIX_HPP
#define QNM_QMATRIX_HPP

#include <complex>
#include <cstddef>
#include <limits>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qnm/errors.hpp"
#include "qnm/rng.hpp"

namespace qnm {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Default numerical tolerance for Hermiticity, trace and positivity checks.
inline constexpr double kStateTolerance = 1e-10;

struct Register {
    std::string label;
    std::size_t dim = 1;
    bool operator==(const Register&) const = default;
};

/// Ordered list of labelled tensor factors.
///
/// The first register is the most significant factor of the Kronecker
/// product, so basis index i decomposes in mixed radix with the last register
/// varying fastest.
class RegisterLayout {
  public:
    RegisterLayout() = default;
    explicit RegisterLayout(std::vector<Register> registers);
    RegisterLayout(std::initializer_list<Register> registers)
        : RegisterLayout(std::vector<Register>(registers)) {}

    const std::vector<Register>& registers() const { return registers_; }
    std::size_t size() const { return registers_.size(); }
    std::size_t total_dim() const;
    std::vector<std::size_t> dims() const;
    std::vector<std::string> labels() const;

    bool contains(std::string_view label) const;
    std::size_t index_of(std::string_view label) const;
    std::size_t dim_of(std::string_view label) const;
    std::size_t dim_of(const std::vector<std::string>& labels) const;

    /// Concatenation; throws LayoutError on a label collision.
    RegisterLayout concat(const RegisterLayout& other) const;
    /// Layout restricted to the registers not named in labels (order kept).
    RegisterLayout without(const std::vector<std::string>& labels) const;
    /// Layout restricted to labels, in the order given.
    RegisterLayout subset(const std::vector<std::string>& labels) const;
    /// Same layout with one register relabelled.
    RegisterLayout renamed(const std::string& from, const std::string& to) const;

    bool operator==(const RegisterLayout&) const = default;

  private:
    std::vector<Register> registers_;
};

/// A square operator tagged with a layout but without state invariants.
/// Used for sub-normalized branches, differences and other intermediates.
struct Operator {
    Matrix matrix;
    RegisterLayout layout;

    Operator() = default;
    Operator(Matrix m, RegisterLayout l);
};

class DensityOperator {
  public:
    /// Validates Hermiticity, unit trace and positivity (tolerance 1e-10).
    DensityOperator(Matrix matrix, RegisterLayout layout);
    explicit DensityOperator(const Operator& op) : DensityOperator(op.matrix, op.layout) {}

    static DensityOperator maximally_mixed(const RegisterLayout& layout);
    static DensityOperator basis_state(const RegisterLayout& layout, std::size_t index);

    const Matrix& matrix() const { return op_.matrix; }
    const RegisterLayout& layout() const { return op_.layout; }
    const Operator& op() const { return op_; }
    std::size_t dim() const { return static_cast<std::size_t>(op_.matrix.rows()); }

  private:
    Operator op_;
};

class PureState {
  public:
    /// Validates squared norm 1 within 1e-12.
    PureState(Vector vector, RegisterLayout layout);

    const Vector& vector() const { return vector_; }
    const RegisterLayout& layout() const { return layout_; }
    DensityOperator density() const;

  private:
    Vector vector_;
    RegisterLayout layout_;
};

/// Kraus representation of a CPTP map between two layouts.
class Channel {
  public:
    /// Validates shapes and sum K^dagger K = I within 1e-10.
    Channel(RegisterLayout input, RegisterLayout output, std::vector<Matrix> kraus);

    static Channel identity(const RegisterLayout& layout);
    static Channel unitary(const RegisterLayout& layout, const Matrix& u);

    const RegisterLayout& input() const { return input_; }
    const RegisterLayout& output() const { return output_; }
    const std::vector<Matrix>& kraus() const { return kraus_; }

  private:
    RegisterLayout input_;
    RegisterLayout output_;
    std::vector<Matrix> kraus_;
};

// ---------------------------------------------------------------------------
// Structural operations.

Operator tensor(const Operator& a, const Operator& b);
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);

Operator partial_trace(const Operator& rho, const std::vector<std::string>& traced);
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& traced);
/// Keeps only the named registers (in layout order).
Operator marginal(const Operator& rho, const std::vector<std::string>& kept);
DensityOperator marginal(const DensityOperator& rho, const std::vector<std::string>& kept);

/// Reorders the registers to the given label order (a permutation).
Operator reorder(const Operator& rho, const std::vector<std::string>& order);
Vector reorder(const Vector& psi, const RegisterLayout& layout, const std::vector<std::string>& order);

/// Computes (A (x) I) rho (A (x) I)^dagger where A acts on the named
/// registers (in the given order) and has the same dimension on both sides.
Operator conjugate_local(const Operator& rho, const std::vector<std::string>& targets, const Matrix& a);
/// Computes (A (x) I) rho (B (x) I)^dagger for square A, B on the targets.
Operator sandwich_local(const Operator& rho, const std::vector<std::string>& targets, const Matrix& a,
                        const Matrix& b);
/// Left multiplication (A (x) I) M for square A on the targets.
Matrix left_multiply_local(const Matrix& m, const RegisterLayout& layout,
                           const std::vector<std::string>& targets, const Matrix& a);
/// Applies the map rho -> sum_k K_k rho K_k^dagger where each K_k maps the
/// target registers onto the registers of out. The output registers take the
/// place of the first target register; the remaining order is unchanged.
Operator apply_kraus_local(const Operator& rho, const std::vector<std::string>& targets,
                           const std::vector<Matrix>& kraus, const RegisterLayout& out);
/// Vector version of a local (possibly non-square) linear map.
Vector apply_local(const Vector& psi, const RegisterLayout& layout, const std::vector<std::string>& targets,
                   const Matrix& a, const RegisterLayout& out, RegisterLayout* result_layout);

/// Applies the channel to the registers of rho named by its input layout.
DensityOperator apply_channel(const Channel& channel, const DensityOperator& rho);
Operator apply_channel(const Channel& channel, const Operator& rho);

/// Stinespring isometry V with Tr_env(V rho V^dagger) = channel(rho). The
/// environment (dimension = number of Kraus operators) is the least
/// significant factor of the output.
Matrix stinespring(const Channel& channel);

// ---------------------------------------------------------------------------
// Matrix functions and functionals.

Matrix hermitian_part(const Matrix& m);
/// f applied to the eigenvalues of the Hermitian part of m, with negative
/// eigenvalues clamped to 0 before applying f.
Matrix psd_sqrt(const Matrix& m);
/// Moore-Penrose inverse of the square root restricted to the support.
Matrix psd_inverse_sqrt(const Matrix& m, double cutoff = 1e-13);
double lambda_max(const Matrix& hermitian);

/// Sum of singular values.
double trace_norm(const Matrix& m);
/// Un-halved trace distance ||rho - sigma||_1.
double trace_distance(const DensityOperator& rho, const DensityOperator& sigma);
double trace_distance(const Operator& rho, const Operator& sigma);
/// ||sqrt(rho) sqrt(sigma)||_1.
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);
double bures_distance(const DensityOperator& rho, const DensityOperator& sigma);

PureState canonical_purification(const DensityOperator& rho, const std::string& new_label);

/// Max-divergence log2 min{2^l : rho <= 2^l sigma}; +infinity when the
/// support of rho is not contained in that of sigma.
double dmax(const Matrix& rho, const Matrix& sigma);
double dmax(const DensityOperator& rho, const DensityOperator& sigma);

struct HminBracket {
    double lower = 0.0;  ///< guaranteed lower bound on H_min(X|E)
    double upper = 0.0;  ///< guaranteed upper bound on H_min(X|E)
    bool exact = false;  ///< closed form used (E classical)
    int iterations = 0;
    double value() const { return 0.5 * (lower + upper); }
};

/// Conditional min-entropy H_min(X|E) of a state classical on x_label, with
/// E the remaining registers.
///
/// When every conditional block is diagonal the closed form
/// -log2 sum_e max_x p(x,e) is used. Otherwise the guessing probability is
/// bracketed: any measurement gives a lower bound, any operator Y with
/// Y >= rho_x for all x gives the upper bound Tr Y. The measurement is
/// improved by the fixed-point iteration E_x <- G^{-1/2} rho_x E_x rho_x G^{-1/2}
/// with G = sum_x rho_x E_x rho_x until the bracket is narrower than tol
/// (in bits) or max_iterations is reached.
HminBracket hmin(const DensityOperator& rho, const std::string& x_label, double tol = 1e-6,
                 int max_iterations = 20000);

/// Upper bound on I_max(A:B) = min_sigma D_max(rho_AB || rho_A (x) sigma_B).
///
/// Trial set for sigma_B, in order: rho_B; U_B; for every register k of B the
/// product rho_{B without k} (x) U_k; the product of single-register
/// marginals of B; and the mixtures (1-w) rho_B + w U_B for
/// w = j/(trial_count+1), j = 1..trial_count.
double imax_upper(const DensityOperator& rho, const std::vector<std::string>& a_labels, int trial_count);

/// Partial isometry V : C -> B built from the polar decomposition of the
/// cross overlap; (I_A (x) V)|ac> is the purification of rho_A(ac) closest
/// to |ab> in fidelity. The A registers (a_labels) must lead both layouts in
/// the same order; B and C are the remaining registers. Throws LayoutError
/// if B is too small to hold the Schmidt rank of |ac>.
Matrix uhlmann_isometry(const PureState& ab, const PureState& ac, const std::vector<std::string>& a_labels);

struct Conditioned {
    double probability = 0.0;
    DensityOperator state;
};
/// Pr[X in event] and the state conditioned on it, with X measured in the
/// computational basis. Throws NotClassical / ZeroProbability.
Conditioned condition_on(const DensityOperator& rho, const std::string& label,
                         const std::set<std::size_t>& event);

/// Max absolute entry of the block coherences between distinct values of
/// the named register; zero for a classical register.
double classical_violation(const Matrix& rho, const RegisterLayout& layout, const std::string& label);

/// Dephases a register in the computational basis.
Operator dephase(const Operator& rho, const std::string& label);

// ---------------------------------------------------------------------------
// Random objects for tests and adversaries.

Matrix haar_unitary(std::size_t dim, Rng& rng);
Vector haar_state(std::size_t dim, Rng& rng);
/// Random density matrix of the given rank (Ginibre construction).
Matrix random_density(std::size_t dim, std::size_t rank, Rng& rng);

/// Maximally entangled vector (1/sqrt d) sum_i |i>|i> on d x d.
Vector max_entangled(std::size_t d);
/// Kronecker product helper.
Matrix kron(const Matrix& a, const Matrix& b);
Vector kron(const Vector& a, const Vector& b);

}  // namespace qnm

#endif  // QNM_QMATRIX_HPP
