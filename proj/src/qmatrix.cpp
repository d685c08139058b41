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

#include "qnm/qmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qnm {
namespace {

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& dims) {
    std::vector<std::size_t> s(dims.size(), 1);
    for (std::size_t k = dims.size(); k-- > 1;) {
        s[k - 1] = s[k] * dims[k];
    }
    return s;
}

// For every full basis index, the mixed-radix index of the target registers
// (in the order given) and of the remaining registers (in layout order).
struct IndexSplit {
    std::vector<std::size_t> target;
    std::vector<std::size_t> rest;
    std::size_t d_target = 1;
    std::size_t d_rest = 1;
    std::vector<std::size_t> rest_positions;
};

IndexSplit split_indices(const RegisterLayout& layout, const std::vector<std::size_t>& target_pos) {
    const auto dims = layout.dims();
    const auto strides = strides_of(dims);
    const std::size_t total = layout.total_dim();
    IndexSplit out;
    std::vector<bool> is_target(dims.size(), false);
    for (auto p : target_pos) {
        if (is_target[p]) {
            throw LayoutError("register listed twice among targets");
        }
        is_target[p] = true;
        out.d_target *= dims[p];
    }
    for (std::size_t k = 0; k < dims.size(); ++k) {
        if (!is_target[k]) {
            out.rest_positions.push_back(k);
            out.d_rest *= dims[k];
        }
    }
    out.target.resize(total);
    out.rest.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t t = 0;
        for (auto p : target_pos) {
            t = t * dims[p] + (i / strides[p]) % dims[p];
        }
        std::size_t r = 0;
        for (auto p : out.rest_positions) {
            r = r * dims[p] + (i / strides[p]) % dims[p];
        }
        out.target[i] = t;
        out.rest[i] = r;
    }
    return out;
}

std::vector<std::size_t> positions_of(const RegisterLayout& layout, const std::vector<std::string>& labels) {
    std::vector<std::size_t> pos;
    pos.reserve(labels.size());
    for (const auto& l : labels) {
        pos.push_back(layout.index_of(l));
    }
    return pos;
}

// Rows of m re-indexed as rest * d_t + target, then multiplied by a on the
// target factor. Returned rows are indexed rest * a.rows() + target_out.
Matrix left_apply_raw(const Matrix& m, const IndexSplit& split, const Matrix& a) {
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();
    const auto dt = static_cast<Eigen::Index>(split.d_target);
    const auto dr = static_cast<Eigen::Index>(split.d_rest);
    if (a.cols() != dt) {
        throw DimensionMismatch("local operator does not match target dimension");
    }
    Matrix permuted(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            const auto dst = static_cast<Eigen::Index>(split.rest[static_cast<std::size_t>(i)]) * dt +
                             static_cast<Eigen::Index>(split.target[static_cast<std::size_t>(i)]);
            permuted(dst, c) = m(i, c);
        }
    }
    Matrix out(a.rows() * dr, cols);
    Eigen::Map<const Matrix> in_view(permuted.data(), dt, dr * cols);
    Eigen::Map<Matrix> out_view(out.data(), a.rows(), dr * cols);
    out_view.noalias() = a * in_view;
    return out;
}

// Layout of the rows produced by left_apply_raw.
RegisterLayout intermediate_layout(const RegisterLayout& layout, const IndexSplit& split,
                                   const RegisterLayout& out) {
    std::vector<Register> regs;
    for (auto p : split.rest_positions) {
        regs.push_back(layout.registers()[p]);
    }
    for (const auto& r : out.registers()) {
        regs.push_back(r);
    }
    return RegisterLayout(std::move(regs));
}

// Final order: the layout with the output registers placed where the first
// target register used to be.
std::vector<std::string> final_order(const RegisterLayout& layout, const std::vector<std::size_t>& target_pos,
                                     const RegisterLayout& out) {
    const std::size_t first = *std::min_element(target_pos.begin(), target_pos.end());
    std::vector<std::string> order;
    for (std::size_t k = 0; k < layout.size(); ++k) {
        if (k == first) {
            for (const auto& r : out.registers()) {
                order.push_back(r.label);
            }
        }
        if (std::find(target_pos.begin(), target_pos.end(), k) == target_pos.end()) {
            order.push_back(layout.registers()[k].label);
        }
    }
    return order;
}

std::vector<std::size_t> reorder_map(const RegisterLayout& layout, const std::vector<std::string>& order,
                                     RegisterLayout* new_layout) {
    if (order.size() != layout.size()) {
        throw LayoutError("reorder: order must name every register exactly once");
    }
    const auto pos = positions_of(layout, order);
    std::vector<bool> seen(layout.size(), false);
    std::vector<Register> regs;
    for (auto p : pos) {
        if (seen[p]) {
            throw LayoutError("reorder: duplicated label");
        }
        seen[p] = true;
        regs.push_back(layout.registers()[p]);
    }
    *new_layout = RegisterLayout(regs);
    IndexSplit split = split_indices(layout, pos);
    return split.target;
}

void check_square(const Matrix& m, std::size_t dim, const char* what) {
    if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != dim) {
        throw DimensionMismatch(std::string(what) + ": matrix shape does not match layout dimension");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// RegisterLayout

RegisterLayout::RegisterLayout(std::vector<Register> registers) : registers_(std::move(registers)) {
    std::unordered_set<std::string> seen;
    for (const auto& r : registers_) {
        if (r.dim == 0) {
            throw LayoutError("register '" + r.label + "' has dimension 0");
        }
        if (!seen.insert(r.label).second) {
            throw LayoutError("duplicate register label '" + r.label + "'");
        }
    }
}

std::size_t RegisterLayout::total_dim() const {
    std::size_t d = 1;
    for (const auto& r : registers_) {
        d *= r.dim;
    }
    return d;
}

std::vector<std::size_t> RegisterLayout::dims() const {
    std::vector<std::size_t> d;
    d.reserve(registers_.size());
    for (const auto& r : registers_) {
        d.push_back(r.dim);
    }
    return d;
}

std::vector<std::string> RegisterLayout::labels() const {
    std::vector<std::string> l;
    l.reserve(registers_.size());
    for (const auto& r : registers_) {
        l.push_back(r.label);
    }
    return l;
}

bool RegisterLayout::contains(std::string_view label) const {
    return std::any_of(registers_.begin(), registers_.end(), [&](const Register& r) { return r.label == label; });
}

std::size_t RegisterLayout::index_of(std::string_view label) const {
    for (std::size_t k = 0; k < registers_.size(); ++k) {
        if (registers_[k].label == label) {
            return k;
        }
    }
    throw LayoutError("unknown register label '" + std::string(label) + "'");
}

std::size_t RegisterLayout::dim_of(std::string_view label) const { return registers_[index_of(label)].dim; }

std::size_t RegisterLayout::dim_of(const std::vector<std::string>& labels) const {
    std::size_t d = 1;
    for (const auto& l : labels) {
        d *= dim_of(l);
    }
    return d;
}

RegisterLayout RegisterLayout::concat(const RegisterLayout& other) const {
    std::vector<Register> regs = registers_;
    regs.insert(regs.end(), other.registers_.begin(), other.registers_.end());
    return RegisterLayout(std::move(regs));
}

RegisterLayout RegisterLayout::without(const std::vector<std::string>& labels) const {
    for (const auto& l : labels) {
        (void)index_of(l);
    }
    std::vector<Register> regs;
    for (const auto& r : registers_) {
        if (std::find(labels.begin(), labels.end(), r.label) == labels.end()) {
            regs.push_back(r);
        }
    }
    return RegisterLayout(std::move(regs));
}

RegisterLayout RegisterLayout::subset(const std::vector<std::string>& labels) const {
    std::vector<Register> regs;
    for (const auto& l : labels) {
        regs.push_back(registers_[index_of(l)]);
    }
    return RegisterLayout(std::move(regs));
}

RegisterLayout RegisterLayout::renamed(const std::string& from, const std::string& to) const {
    std::vector<Register> regs = registers_;
    regs[index_of(from)].label = to;
    return RegisterLayout(std::move(regs));
}

// ---------------------------------------------------------------------------
// Value types

Operator::Operator(Matrix m, RegisterLayout l) : matrix(std::move(m)), layout(std::move(l)) {
    check_square(matrix, layout.total_dim(), "Operator");
}

DensityOperator::DensityOperator(Matrix matrix, RegisterLayout layout) : op_(std::move(matrix), std::move(layout)) {
    const Matrix& m = op_.matrix;
    const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm > kStateTolerance) {
        throw InvalidState("density operator is not Hermitian (deviation " + std::to_string(herm) + ")");
    }
    const double tr = m.trace().real();
    if (std::abs(tr - 1.0) > kStateTolerance) {
        throw InvalidState("density operator trace " + std::to_string(tr) + " differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kStateTolerance) {
        throw InvalidState("density operator has a negative eigenvalue");
    }
}

DensityOperator DensityOperator::maximally_mixed(const RegisterLayout& layout) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    return DensityOperator(Matrix::Identity(d, d) / static_cast<double>(d), layout);
}

DensityOperator DensityOperator::basis_state(const RegisterLayout& layout, std::size_t index) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    if (index >= layout.total_dim()) {
        throw DimensionMismatch("basis index out of range");
    }
    Matrix m = Matrix::Zero(d, d);
    m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return DensityOperator(std::move(m), layout);
}

PureState::PureState(Vector vector, RegisterLayout layout) : vector_(std::move(vector)), layout_(std::move(layout)) {
    if (static_cast<std::size_t>(vector_.size()) != layout_.total_dim()) {
        throw DimensionMismatch("pure state vector length does not match layout");
    }
    if (std::abs(vector_.squaredNorm() - 1.0) > 1e-12) {
        throw InvalidState("pure state is not normalized");
    }
}

DensityOperator PureState::density() const {
    Matrix m = vector_ * vector_.adjoint();
    return DensityOperator(std::move(m), layout_);
}

Channel::Channel(RegisterLayout input, RegisterLayout output, std::vector<Matrix> kraus)
    : input_(std::move(input)), output_(std::move(output)), kraus_(std::move(kraus)) {
    if (kraus_.empty()) {
        throw InvalidState("channel needs at least one Kraus operator");
    }
    const auto din = static_cast<Eigen::Index>(input_.total_dim());
    const auto dout = static_cast<Eigen::Index>(output_.total_dim());
    Matrix sum = Matrix::Zero(din, din);
    for (const auto& k : kraus_) {
        if (k.rows() != dout || k.cols() != din) {
            throw DimensionMismatch("Kraus operator shape does not match channel layouts");
        }
        sum.noalias() += k.adjoint() * k;
    }
    const double dev = (sum - Matrix::Identity(din, din)).cwiseAbs().maxCoeff();
    if (dev > kStateTolerance) {
        throw InvalidState("Kraus operators are not trace preserving (deviation " + std::to_string(dev) + ")");
    }
}

Channel Channel::identity(const RegisterLayout& layout) {
    const auto d = static_cast<Eigen::Index>(layout.total_dim());
    return Channel(layout, layout, {Matrix::Identity(d, d)});
}

Channel Channel::unitary(const RegisterLayout& layout, const Matrix& u) { return Channel(layout, layout, {u}); }

// ---------------------------------------------------------------------------
// Structural operations

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

Operator tensor(const Operator& a, const Operator& b) {
    return Operator(kron(a.matrix, b.matrix), a.layout.concat(b.layout));
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
    return DensityOperator(tensor(a.op(), b.op()));
}

Operator partial_trace(const Operator& rho, const std::vector<std::string>& traced) {
    const auto pos = positions_of(rho.layout, traced);
    RegisterLayout kept = rho.layout.without(traced);
    const IndexSplit split = split_indices(rho.layout, pos);
    const auto dk = static_cast<Eigen::Index>(split.d_rest);
    std::vector<std::vector<Eigen::Index>> groups(split.d_target, std::vector<Eigen::Index>(split.d_rest));
    for (std::size_t i = 0; i < split.target.size(); ++i) {
        groups[split.target[i]][split.rest[i]] = static_cast<Eigen::Index>(i);
    }
    Matrix out = Matrix::Zero(dk, dk);
    for (const auto& g : groups) {
        for (Eigen::Index c = 0; c < dk; ++c) {
            const Eigen::Index gc = g[static_cast<std::size_t>(c)];
            for (Eigen::Index r = 0; r < dk; ++r) {
                out(r, c) += rho.matrix(g[static_cast<std::size_t>(r)], gc);
            }
        }
    }
    return Operator(std::move(out), std::move(kept));
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& traced) {
    Operator out = partial_trace(rho.op(), traced);
    out.matrix = hermitian_part(out.matrix);
    return DensityOperator(out);
}

Operator marginal(const Operator& rho, const std::vector<std::string>& kept) {
    for (const auto& k : kept) {
        (void)rho.layout.index_of(k);
    }
    std::vector<std::string> traced;
    for (const auto& r : rho.layout.registers()) {
        if (std::find(kept.begin(), kept.end(), r.label) == kept.end()) {
            traced.push_back(r.label);
        }
    }
    return partial_trace(rho, traced);
}

DensityOperator marginal(const DensityOperator& rho, const std::vector<std::string>& kept) {
    Operator out = marginal(rho.op(), kept);
    out.matrix = hermitian_part(out.matrix);
    return DensityOperator(out);
}

Operator reorder(const Operator& rho, const std::vector<std::string>& order) {
    RegisterLayout nl;
    const auto map = reorder_map(rho.layout, order, &nl);
    if (nl == rho.layout) {
        return rho;
    }
    const auto d = rho.matrix.rows();
    Matrix out(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto nj = static_cast<Eigen::Index>(map[static_cast<std::size_t>(j)]);
        for (Eigen::Index i = 0; i < d; ++i) {
            out(static_cast<Eigen::Index>(map[static_cast<std::size_t>(i)]), nj) = rho.matrix(i, j);
        }
    }
    return Operator(std::move(out), std::move(nl));
}

Vector reorder(const Vector& psi, const RegisterLayout& layout, const std::vector<std::string>& order) {
    RegisterLayout nl;
    const auto map = reorder_map(layout, order, &nl);
    Vector out(psi.size());
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        out(static_cast<Eigen::Index>(map[static_cast<std::size_t>(i)])) = psi(i);
    }
    return out;
}

Matrix left_multiply_local(const Matrix& m, const RegisterLayout& layout, const std::vector<std::string>& targets,
                           const Matrix& a) {
    const auto pos = positions_of(layout, targets);
    const IndexSplit split = split_indices(layout, pos);
    if (a.rows() != a.cols()) {
        throw DimensionMismatch("left_multiply_local expects a square operator");
    }
    Matrix raw = left_apply_raw(m, split, a);
    // Undo the row permutation (same dimensions on both sides).
    Matrix out(m.rows(), m.cols());
    const auto dt = static_cast<Eigen::Index>(split.d_target);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            out(i, c) = raw(static_cast<Eigen::Index>(split.rest[static_cast<std::size_t>(i)]) * dt +
                                static_cast<Eigen::Index>(split.target[static_cast<std::size_t>(i)]),
                            c);
        }
    }
    return out;
}

Operator sandwich_local(const Operator& rho, const std::vector<std::string>& targets, const Matrix& a,
                        const Matrix& b) {
    Matrix left = left_multiply_local(rho.matrix, rho.layout, targets, a);
    Matrix both = left_multiply_local(left.adjoint(), rho.layout, targets, b).adjoint();
    return Operator(std::move(both), rho.layout);
}

Operator conjugate_local(const Operator& rho, const std::vector<std::string>& targets, const Matrix& a) {
    return sandwich_local(rho, targets, a, a);
}

Operator apply_kraus_local(const Operator& rho, const std::vector<std::string>& targets,
                           const std::vector<Matrix>& kraus, const RegisterLayout& out) {
    const auto pos = positions_of(rho.layout, targets);
    const IndexSplit split = split_indices(rho.layout, pos);
    const RegisterLayout mid = intermediate_layout(rho.layout, split, out);
    const auto dmid = static_cast<Eigen::Index>(mid.total_dim());
    Matrix acc = Matrix::Zero(dmid, dmid);
    for (const auto& k : kraus) {
        if (k.rows() != static_cast<Eigen::Index>(out.total_dim())) {
            throw DimensionMismatch("Kraus operator rows do not match output layout");
        }
        Matrix left = left_apply_raw(rho.matrix, split, k);       // rows: mid, cols: original
        Matrix both = left_apply_raw(left.adjoint(), split, k);  // rows: mid, cols: mid
        acc.noalias() += both.adjoint();
    }
    Operator result(std::move(acc), mid);
    return reorder(result, final_order(rho.layout, pos, out));
}

Vector apply_local(const Vector& psi, const RegisterLayout& layout, const std::vector<std::string>& targets,
                   const Matrix& a, const RegisterLayout& out, RegisterLayout* result_layout) {
    const auto pos = positions_of(layout, targets);
    const IndexSplit split = split_indices(layout, pos);
    if (a.rows() != static_cast<Eigen::Index>(out.total_dim())) {
        throw DimensionMismatch("local map rows do not match output layout");
    }
    Matrix col = psi;
    Matrix raw = left_apply_raw(col, split, a);
    const RegisterLayout mid = intermediate_layout(layout, split, out);
    const auto order = final_order(layout, pos, out);
    Vector v = raw.col(0);
    Vector res = reorder(v, mid, order);
    if (result_layout != nullptr) {
        *result_layout = mid.subset(order);
    }
    return res;
}

Operator apply_channel(const Channel& channel, const Operator& rho) {
    const auto labels = channel.input().labels();
    for (const auto& r : channel.input().registers()) {
        if (rho.layout.dim_of(r.label) != r.dim) {
            throw DimensionMismatch("channel input register '" + r.label + "' has the wrong dimension");
        }
    }
    return apply_kraus_local(rho, labels, channel.kraus(), channel.output());
}

DensityOperator apply_channel(const Channel& channel, const DensityOperator& rho) {
    Operator out = apply_channel(channel, rho.op());
    out.matrix = hermitian_part(out.matrix);
    return DensityOperator(out);
}

Matrix stinespring(const Channel& channel) {
    const auto k = static_cast<Eigen::Index>(channel.kraus().size());
    const auto din = static_cast<Eigen::Index>(channel.input().total_dim());
    const auto dout = static_cast<Eigen::Index>(channel.output().total_dim());
    Matrix v = Matrix::Zero(dout * k, din);
    for (Eigen::Index j = 0; j < k; ++j) {
        const Matrix& kj = channel.kraus()[static_cast<std::size_t>(j)];
        for (Eigen::Index o = 0; o < dout; ++o) {
            v.row(o * k + j) = kj.row(o);
        }
    }
    return v;
}

// ---------------------------------------------------------------------------
// Matrix functions

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

Matrix psd_sqrt(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix psd_inverse_sqrt(const Matrix& m, double cutoff) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m));
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        ev(i) = ev(i) > cutoff * scale ? 1.0 / std::sqrt(ev(i)) : 0.0;
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double lambda_max(const Matrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(hermitian), Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double trace_norm(const Matrix& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (m.rows() == m.cols() && (m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * scale) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().sum();
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().sum();
}

double trace_distance(const Operator& rho, const Operator& sigma) {
    if (!(rho.layout == sigma.layout)) {
        throw LayoutError("trace_distance: layouts differ");
    }
    return trace_norm(rho.matrix - sigma.matrix);
}

double trace_distance(const DensityOperator& rho, const DensityOperator& sigma) {
    return trace_distance(rho.op(), sigma.op());
}

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
    if (!(rho.layout() == sigma.layout())) {
        throw LayoutError("fidelity: layouts differ");
    }
    Eigen::JacobiSVD<Matrix> svd(psd_sqrt(rho.matrix()) * psd_sqrt(sigma.matrix()));
    return std::clamp(svd.singularValues().sum(), 0.0, 1.0);
}

double bures_distance(const DensityOperator& rho, const DensityOperator& sigma) {
    return std::sqrt(std::max(0.0, 1.0 - fidelity(rho, sigma)));
}

PureState canonical_purification(const DensityOperator& rho, const std::string& new_label) {
    const Matrix s = psd_sqrt(rho.matrix());
    const auto d = s.rows();
    Vector v(d * d);
    for (Eigen::Index a = 0; a < d; ++a) {
        for (Eigen::Index i = 0; i < d; ++i) {
            v(a * d + i) = s(a, i);
        }
    }
    v /= v.norm();
    return PureState(std::move(v), rho.layout().concat(RegisterLayout({{new_label, static_cast<std::size_t>(d)}})));
}

double dmax(const Matrix& rho, const Matrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
        throw DimensionMismatch("dmax: shapes differ");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(sigma));
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double cutoff = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> support;
    std::vector<Eigen::Index> kernel;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        (ev(i) > cutoff ? support : kernel).push_back(i);
    }
    const Matrix r = hermitian_part(rho);
    if (!kernel.empty()) {
        Matrix k(r.rows(), static_cast<Eigen::Index>(kernel.size()));
        for (std::size_t j = 0; j < kernel.size(); ++j) {
            k.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(kernel[j]);
        }
        const Matrix leak = k.adjoint() * r * k;
        if (lambda_max(leak) > kStateTolerance) {
            return std::numeric_limits<double>::infinity();
        }
    }
    if (support.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    Matrix w(r.rows(), static_cast<Eigen::Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j) {
        const Eigen::Index c = support[j];
        w.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(c) / std::sqrt(ev(c));
    }
    const double top = lambda_max(w.adjoint() * r * w);
    if (top <= 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return std::log2(top);
}

double dmax(const DensityOperator& rho, const DensityOperator& sigma) {
    if (!(rho.layout() == sigma.layout())) {
        throw LayoutError("dmax: layouts differ");
    }
    return dmax(rho.matrix(), sigma.matrix());
}

double classical_violation(const Matrix& rho, const RegisterLayout& layout, const std::string& label) {
    const IndexSplit split = split_indices(layout, {layout.index_of(label)});
    double worst = 0.0;
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
        for (Eigen::Index i = 0; i < rho.rows(); ++i) {
            if (split.target[static_cast<std::size_t>(i)] != split.target[static_cast<std::size_t>(j)]) {
                worst = std::max(worst, std::abs(rho(i, j)));
            }
        }
    }
    return worst;
}

Operator dephase(const Operator& rho, const std::string& label) {
    const IndexSplit split = split_indices(rho.layout, {rho.layout.index_of(label)});
    Matrix m = rho.matrix;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (split.target[static_cast<std::size_t>(i)] != split.target[static_cast<std::size_t>(j)]) {
                m(i, j) = 0.0;
            }
        }
    }
    return Operator(std::move(m), rho.layout);
}

namespace {

// Conditional blocks rho_x (unnormalized) of a state classical on label.
std::vector<Matrix> classical_blocks(const Operator& rho, const std::string& label) {
    if (classical_violation(rho.matrix, rho.layout, label) > kStateTolerance) {
        throw NotClassical("register '" + label + "' is not classical");
    }
    const std::size_t xpos = rho.layout.index_of(label);
    const IndexSplit split = split_indices(rho.layout, {xpos});
    const auto de = static_cast<Eigen::Index>(split.d_rest);
    std::vector<Matrix> blocks(split.d_target, Matrix::Zero(de, de));
    std::vector<std::vector<Eigen::Index>> idx(split.d_target, std::vector<Eigen::Index>(split.d_rest));
    for (std::size_t i = 0; i < split.target.size(); ++i) {
        idx[split.target[i]][split.rest[i]] = static_cast<Eigen::Index>(i);
    }
    for (std::size_t x = 0; x < blocks.size(); ++x) {
        for (Eigen::Index c = 0; c < de; ++c) {
            for (Eigen::Index r = 0; r < de; ++r) {
                blocks[x](r, c) = rho.matrix(idx[x][static_cast<std::size_t>(r)], idx[x][static_cast<std::size_t>(c)]);
            }
        }
    }
    return blocks;
}

}  // namespace

HminBracket hmin(const DensityOperator& rho, const std::string& x_label, double tol, int max_iterations) {
    const std::vector<Matrix> blocks = classical_blocks(rho.op(), x_label);
    const auto de = blocks.empty() ? 0 : blocks.front().rows();
    bool all_diagonal = true;
    for (const auto& b : blocks) {
        Matrix off = b;
        off.diagonal().setZero();
        if (off.size() > 0 && off.cwiseAbs().maxCoeff() > kStateTolerance) {
            all_diagonal = false;
            break;
        }
    }
    HminBracket out;
    if (all_diagonal) {
        double pg = 0.0;
        for (Eigen::Index e = 0; e < de; ++e) {
            double best = 0.0;
            for (const auto& b : blocks) {
                best = std::max(best, b(e, e).real());
            }
            pg += best;
        }
        out.lower = out.upper = -std::log2(pg);
        out.exact = true;
        return out;
    }

    // Guessing-probability bracket: lower from a POVM, upper from a feasible Y.
    const std::size_t nx = blocks.size();
    std::vector<Matrix> povm(nx, Matrix::Identity(de, de) / static_cast<double>(nx));
    double best_lower = 0.0;
    double best_upper = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < max_iterations; ++it) {
        double pg = 0.0;
        Matrix y = Matrix::Zero(de, de);
        for (std::size_t x = 0; x < nx; ++x) {
            pg += (povm[x] * blocks[x]).trace().real();
            y.noalias() += blocks[x] * povm[x];
        }
        const Matrix yh = hermitian_part(y);
        double shift = 0.0;
        for (const auto& b : blocks) {
            shift = std::max(shift, lambda_max(b - yh));
        }
        const double feasible = yh.trace().real() + shift * static_cast<double>(de);
        best_lower = std::max(best_lower, pg);
        best_upper = std::min(best_upper, feasible);
        if (best_lower > 0.0 && std::log2(best_upper / best_lower) < tol) {
            break;
        }
        Matrix g = Matrix::Zero(de, de);
        for (std::size_t x = 0; x < nx; ++x) {
            g.noalias() += blocks[x] * povm[x] * blocks[x];
        }
        const Matrix ginv = psd_inverse_sqrt(g);
        const Matrix kernel = Matrix::Identity(de, de) - ginv * psd_sqrt(g);
        for (std::size_t x = 0; x < nx; ++x) {
            povm[x] = hermitian_part(ginv * blocks[x] * povm[x] * blocks[x] * ginv);
        }
        // Directions outside the support of g carry no weight; keep the POVM complete.
        povm[0] += hermitian_part(kernel);
    }
    out.iterations = it;
    out.lower = -std::log2(best_upper);
    out.upper = -std::log2(best_lower);
    return out;
}

double imax_upper(const DensityOperator& rho, const std::vector<std::string>& a_labels, int trial_count) {
    std::vector<std::string> b_labels;
    for (const auto& r : rho.layout().registers()) {
        if (std::find(a_labels.begin(), a_labels.end(), r.label) == a_labels.end()) {
            b_labels.push_back(r.label);
        }
    }
    const DensityOperator rho_a = marginal(rho, a_labels);
    const DensityOperator rho_b = marginal(rho, b_labels);
    const Operator ordered = reorder(rho.op(), [&] {
        std::vector<std::string> o = a_labels;
        o.insert(o.end(), b_labels.begin(), b_labels.end());
        return o;
    }());
    const RegisterLayout bl = rho.layout().subset(b_labels);
    const auto db = static_cast<Eigen::Index>(bl.total_dim());
    const Matrix ub = Matrix::Identity(db, db) / static_cast<double>(db);

    std::vector<Matrix> trials;
    trials.push_back(rho_b.matrix());
    trials.push_back(ub);
    for (std::size_t k = 0; k < b_labels.size() && b_labels.size() > 1; ++k) {
        std::vector<std::string> others;
        for (std::size_t j = 0; j < b_labels.size(); ++j) {
            if (j != k) {
                others.push_back(b_labels[j]);
            }
        }
        const auto dk = static_cast<Eigen::Index>(bl.dim_of(b_labels[k]));
        Operator prod = tensor(marginal(rho_b.op(), others),
                               Operator(Matrix::Identity(dk, dk) / static_cast<double>(dk),
                                        RegisterLayout({{b_labels[k], static_cast<std::size_t>(dk)}})));
        trials.push_back(reorder(prod, b_labels).matrix);
    }
    if (b_labels.size() > 1) {
        Operator prod = marginal(rho_b.op(), {b_labels[0]});
        for (std::size_t k = 1; k < b_labels.size(); ++k) {
            prod = tensor(prod, marginal(rho_b.op(), {b_labels[k]}));
        }
        trials.push_back(prod.matrix);
    }
    for (int j = 1; j <= trial_count; ++j) {
        const double w = static_cast<double>(j) / static_cast<double>(trial_count + 1);
        trials.push_back((1.0 - w) * rho_b.matrix() + w * ub);
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : trials) {
        best = std::min(best, dmax(ordered.matrix, kron(rho_a.matrix(), s)));
    }
    return best;
}

Matrix uhlmann_isometry(const PureState& ab, const PureState& ac, const std::vector<std::string>& a_labels) {
    const auto& la = ab.layout().registers();
    const auto& lc = ac.layout().registers();
    const std::size_t na = a_labels.size();
    if (na > la.size() || na > lc.size()) {
        throw LayoutError("uhlmann_isometry: too many shared registers");
    }
    for (std::size_t k = 0; k < na; ++k) {
        if (la[k].label != a_labels[k] || !(la[k] == lc[k])) {
            throw LayoutError("uhlmann_isometry: shared registers must lead both layouts in the same order");
        }
    }
    std::size_t da = 1;
    for (std::size_t k = 0; k < na; ++k) {
        da *= la[k].dim;
    }
    const auto dA = static_cast<Eigen::Index>(da);
    const auto dB = static_cast<Eigen::Index>(ab.layout().total_dim() / da);
    const auto dC = static_cast<Eigen::Index>(ac.layout().total_dim() / da);
    Matrix r(dA, dB);
    Matrix s(dA, dC);
    for (Eigen::Index a = 0; a < dA; ++a) {
        for (Eigen::Index b = 0; b < dB; ++b) {
            r(a, b) = ab.vector()(a * dB + b);
        }
        for (Eigen::Index c = 0; c < dC; ++c) {
            s(a, c) = ac.vector()(a * dC + c);
        }
    }
    Eigen::JacobiSVD<Matrix> svd_s(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd_s.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-12) {
        ++rank;
    }
    if (rank > dB) {
        throw LayoutError("uhlmann_isometry: target register is smaller than the Schmidt rank of the source");
    }
    const Matrix us = svd_s.matrixU().leftCols(rank);
    const Matrix ws = svd_s.matrixV().leftCols(rank);
    const Matrix n = r.adjoint() * us * sv.head(rank).asDiagonal();  // dB x rank
    Eigen::JacobiSVD<Matrix> svd_n(n, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Matrix p = svd_n.matrixU();
    if (p.cols() < rank) {
        throw LayoutError("uhlmann_isometry: degenerate polar decomposition");
    }
    const Matrix g = svd_n.matrixV() * p.adjoint();  // rank x dB
    const Matrix vt = ws * g;  // dC x dB
    return vt.transpose();
}

Conditioned condition_on(const DensityOperator& rho, const std::string& label, const std::set<std::size_t>& event) {
    if (classical_violation(rho.matrix(), rho.layout(), label) > kStateTolerance) {
        throw NotClassical("register '" + label + "' is not classical");
    }
    const IndexSplit split = split_indices(rho.layout(), {rho.layout().index_of(label)});
    Matrix m = Matrix::Zero(rho.matrix().rows(), rho.matrix().cols());
    double p = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const auto xj = split.target[static_cast<std::size_t>(j)];
        if (!event.contains(xj)) {
            continue;
        }
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (split.target[static_cast<std::size_t>(i)] == xj) {
                m(i, j) = rho.matrix()(i, j);
            }
        }
        p += rho.matrix()(j, j).real();
    }
    if (p <= 1e-14) {
        throw ZeroProbability("conditioning event has probability zero");
    }
    return Conditioned{p, DensityOperator(hermitian_part(m) / p, rho.layout())};
}

// ---------------------------------------------------------------------------
// Random objects

Matrix haar_unitary(std::size_t dim, Rng& rng) {
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix z(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            z(i, j) = rng.complex_normal();
        }
    }
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    const Matrix rr = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < d; ++j) {
        const cplx diag = rr(j, j);
        const double mag = std::abs(diag);
        if (mag > 0.0) {
            q.col(j) *= diag / mag;
        }
    }
    return q;
}

Vector haar_state(std::size_t dim, Rng& rng) {
    Vector v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = rng.complex_normal();
    }
    return v / v.norm();
}

Matrix random_density(std::size_t dim, std::size_t rank, Rng& rng) {
    const auto d = static_cast<Eigen::Index>(dim);
    const auto k = static_cast<Eigen::Index>(rank);
    Matrix g(d, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            g(i, j) = rng.complex_normal();
        }
    }
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return hermitian_part(rho);
}

Vector max_entangled(std::size_t d) {
    const auto dd = static_cast<Eigen::Index>(d);
    Vector v = Vector::Zero(dd * dd);
    for (Eigen::Index i = 0; i < dd; ++i) {
        v(i * dd + i) = 1.0;
    }
    return v / std::sqrt(static_cast<double>(d));
}

}  // namespace qnm
