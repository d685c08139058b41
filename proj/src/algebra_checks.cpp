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

#include "qnm/algebra_checks.hpp"

#include <algorithm>

#include "qnm/errors.hpp"
#include "qnm/pauli_clifford.hpp"
#include "qnm/qmatrix.hpp"

namespace qnm {

namespace {

double fro(const Matrix& m) { return m.norm(); }

AlgebraCheck zero_check(std::string name, double residual, double tol) {
    return {std::move(name), residual, tol, residual <= tol};
}

Matrix transposed_twirl(const Matrix& rho, const std::vector<Matrix>& group) {
    Matrix acc = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto& c : group) {
        const Matrix a = kron(Matrix(c.transpose()), Matrix(c.adjoint()));
        acc += a * rho * a.adjoint();
    }
    return acc / static_cast<double>(group.size());
}

}  // namespace

std::vector<AlgebraCheck> verify_algebra(unsigned qubits, std::uint64_t seed, double tol) {
    if (qubits == 0 || qubits > 2) throw InvalidParams("verify_algebra supports 1 or 2 qubits");
    Rng rng(seed);
    const std::size_t d = std::size_t{1} << qubits;
    const auto di = static_cast<Eigen::Index>(d);
    const auto paulis = all_paulis(qubits);
    const auto pgroup = pauli_group(qubits);
    const auto sc = sc_enumerate(qubits);
    const auto pdense = dense_group(pgroup);
    const auto scdense = dense_group(sc);
    const Matrix id = Matrix::Identity(di, di);
    const Matrix uu = Matrix::Identity(di * di, di * di) / static_cast<double>(d * d);
    const Vector phi = max_entangled(d);
    const Matrix epr = phi * phi.adjoint();
    const double nP = static_cast<double>(d * d);

    const Matrix rho = random_density(d, d, rng);
    const Matrix normal = haar_unitary(d, rng);  // unitaries are normal
    const DensityOperator rho_a(rho, RegisterLayout{{"A", d}});
    const Operator purified = canonical_purification(rho_a, "Ah").density().op();

    double pauli_twirl = 0.0, sc_twirl = 0.0, sc_twirl_normal = 0.0, modified = 0.0;
    double equal_zero = 0.0, equal_id = 0.0, equal_closed = 0.0, equal_bound = 0.0;
    for (const auto& p : paulis)
        for (const auto& q : paulis) {
            if (p == q) continue;
            pauli_twirl = std::max(pauli_twirl, fro(twirl_cross_term(p, q, rho, pgroup)));
            sc_twirl = std::max(sc_twirl, fro(twirl_cross_term(p, q, rho, sc)));
            sc_twirl_normal = std::max(sc_twirl_normal, fro(twirl_cross_term(p, q, normal, sc)));
            modified = std::max(modified, fro(modified_twirl_cross_term(p, q, purified, {"A"}, sc).matrix));
            const Matrix pp = kron(id, pauli_dense(p)), qq = kron(id, pauli_dense(q));
            equal_zero = std::max(equal_zero, fro(transposed_twirl(pp * epr * qq.adjoint(), scdense)));
        }
    for (const auto& p : paulis) {
        const Matrix pp = kron(id, pauli_dense(p));
        const Matrix t = transposed_twirl(pp * epr * pp.adjoint(), scdense);
        if (p.is_identity_up_to_phase()) {
            equal_id = fro(t - epr);
        } else {
            equal_closed = std::max(equal_closed, fro(t - (nP * uu - epr) / (nP - 1.0)));
            equal_bound = std::max(equal_bound, trace_norm(t - uu));
        }
    }

    double pauli_conj = 0.0, sc_conj = 0.0;
    for (const auto& p : paulis) {
        const Matrix target = p.is_identity_up_to_phase() ? id : Matrix::Zero(di, di);
        pauli_conj = std::max(pauli_conj, fro(uniform_conjugation(p, pgroup) - target));
        sc_conj = std::max(sc_conj, fro(uniform_conjugation(p, sc) - target));
    }

    const DensityOperator rho_ab(random_density(d * 2, d * 2, rng), RegisterLayout{{"A", d}, {"B", 2}});
    const Matrix one_design = kron(Matrix(id / static_cast<double>(d)), marginal(rho_ab.op(), {"B"}).matrix);
    const double bell = fro(group_twirl(rho_ab.op(), {"A"}, pdense).matrix - one_design);
    const double notequal = fro(group_twirl(rho_ab.op(), {"A"}, scdense).matrix - one_design);

    double closed = 0.0, approx = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
        const DensityOperator st(random_density(d * d, 1 + static_cast<std::size_t>(trial), rng),
                                 RegisterLayout{{"Ah", d}, {"A", d}});
        const EprTwirl tw = epr_twirl_decomposition(st, "Ah", "A", sc);
        closed = std::max(closed, tw.closed_form_residual);
        approx = std::max(approx, tw.mixture_distance);
    }
    const double bound = 2.0 / nP;

    return {
        zero_check("pauli_twirl_cross_terms", pauli_twirl, tol),
        zero_check("subgroup_twirl_cross_terms", sc_twirl, tol),
        zero_check("subgroup_twirl_normal_operator", sc_twirl_normal, tol),
        zero_check("modified_twirl_purification", modified, tol),
        zero_check("uniform_pauli_conjugation", pauli_conj, tol),
        zero_check("uniform_subgroup_conjugation", sc_conj, tol),
        zero_check("pauli_one_design", bell, tol),
        zero_check("subgroup_one_design", notequal, tol),
        zero_check("transposed_twirl_distinct_paulis", equal_zero, tol),
        zero_check("transposed_twirl_identity", equal_id, tol),
        zero_check("transposed_twirl_equal_paulis_closed_form", equal_closed, tol),
        {"transposed_twirl_equal_paulis_bound", equal_bound, bound, equal_bound <= bound + tol},
        zero_check("epr_twirl_closed_form", closed, tol),
        {"epr_twirl_mixture_bound", approx, bound, approx <= bound + tol},
    };
}

}  // namespace qnm
