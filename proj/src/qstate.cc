// Copyright 2026 The wdistill Authors
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

#include "wdistill/qstate.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "wdistill/errors.h"
#include "wdistill/tolerances.h"

namespace wdistill {

namespace {

size_t qubits_for_dim(size_t dim) {
    if (dim == 0 || !std::has_single_bit(dim)) {
        throw InvalidArgument("dimension " + std::to_string(dim) + " is not a power of two");
    }
    return static_cast<size_t>(std::countr_zero(dim));
}

void check_keep(const std::vector<size_t> &keep, size_t n_qubits) {
    if (keep.empty()) {
        throw InvalidArgument("partial_trace: keep set is empty");
    }
    uint64_t seen = 0;
    for (size_t q : keep) {
        if (q >= n_qubits) {
            throw InvalidArgument("partial_trace: qubit " + std::to_string(q) + " out of range");
        }
        if (seen & (uint64_t{1} << q)) {
            throw InvalidArgument("partial_trace: qubit " + std::to_string(q) + " listed twice");
        }
        seen |= uint64_t{1} << q;
    }
}

// Splits every full index into (kept index, traced index) following the keep order.
struct IndexSplit {
    std::vector<size_t> kept;
    std::vector<size_t> traced;
    size_t n_traced;
};

IndexSplit split_indices(size_t n_qubits, const std::vector<size_t> &keep) {
    std::vector<size_t> traced_qubits;
    for (size_t q = 0; q < n_qubits; q++) {
        if (std::find(keep.begin(), keep.end(), q) == keep.end()) {
            traced_qubits.push_back(q);
        }
    }
    size_t dim = size_t{1} << n_qubits;
    IndexSplit s{std::vector<size_t>(dim), std::vector<size_t>(dim), traced_qubits.size()};
    for (size_t x = 0; x < dim; x++) {
        size_t k = 0;
        for (size_t j = 0; j < keep.size(); j++) {
            k |= ((x >> keep[j]) & 1) << j;
        }
        size_t t = 0;
        for (size_t j = 0; j < traced_qubits.size(); j++) {
            t |= ((x >> traced_qubits[j]) & 1) << j;
        }
        s.kept[x] = k;
        s.traced[x] = t;
    }
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {
}

Matrix Matrix::identity(size_t n) {
    Matrix m(n, n);
    for (size_t i = 0; i < n; i++) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
    Matrix m(values.size(), values.size());
    for (size_t i = 0; i < values.size(); i++) {
        m(i, i) = values[i];
    }
    return m;
}

Matrix Matrix::outer(std::span<const Complex> a, std::span<const Complex> b) {
    Matrix m(a.size(), b.size());
    for (size_t r = 0; r < a.size(); r++) {
        for (size_t c = 0; c < b.size(); c++) {
            m(r, c) = a[r] * std::conj(b[c]);
        }
    }
    return m;
}

Matrix Matrix::adjoint() const {
    Matrix m(cols_, rows_);
    for (size_t r = 0; r < rows_; r++) {
        for (size_t c = 0; c < cols_; c++) {
            m(c, r) = std::conj((*this)(r, c));
        }
    }
    return m;
}

Matrix Matrix::conjugate() const {
    Matrix m = *this;
    for (auto &z : m.data_) {
        z = std::conj(z);
    }
    return m;
}

Complex Matrix::trace() const {
    Complex t = 0;
    for (size_t i = 0; i < std::min(rows_, cols_); i++) {
        t += (*this)(i, i);
    }
    return t;
}

double Matrix::frobenius_norm() const {
    double s = 0;
    for (const auto &z : data_) {
        s += std::norm(z);
    }
    return std::sqrt(s);
}

double Matrix::hermitian_deviation() const {
    if (!is_square()) {
        throw InvalidArgument("hermitian_deviation: matrix is not square");
    }
    double worst = 0;
    for (size_t r = 0; r < rows_; r++) {
        for (size_t c = r; c < cols_; c++) {
            worst = std::max(worst, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
        }
    }
    return worst;
}

Matrix &Matrix::operator+=(const Matrix &other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw InvalidArgument("matrix addition: shape mismatch");
    }
    for (size_t i = 0; i < data_.size(); i++) {
        data_[i] += other.data_[i];
    }
    return *this;
}

Matrix &Matrix::operator-=(const Matrix &other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
        throw InvalidArgument("matrix subtraction: shape mismatch");
    }
    for (size_t i = 0; i < data_.size(); i++) {
        data_[i] -= other.data_[i];
    }
    return *this;
}

Matrix &Matrix::operator*=(Complex scale) {
    for (auto &z : data_) {
        z *= scale;
    }
    return *this;
}

Matrix operator+(Matrix a, const Matrix &b) {
    a += b;
    return a;
}

Matrix operator-(Matrix a, const Matrix &b) {
    a -= b;
    return a;
}

Matrix operator*(const Matrix &a, const Matrix &b) {
    if (a.cols() != b.rows()) {
        throw InvalidArgument("matrix product: inner dimensions differ");
    }
    Matrix m(a.rows(), b.cols());
    for (size_t r = 0; r < a.rows(); r++) {
        for (size_t k = 0; k < a.cols(); k++) {
            Complex f = a(r, k);
            if (f == Complex{0}) {
                continue;
            }
            for (size_t c = 0; c < b.cols(); c++) {
                m(r, c) += f * b(k, c);
            }
        }
    }
    return m;
}

Matrix operator*(Complex s, Matrix m) {
    m *= s;
    return m;
}

Matrix kron_low_high(const Matrix &low, const Matrix &high) {
    Matrix m(low.rows() * high.rows(), low.cols() * high.cols());
    for (size_t hr = 0; hr < high.rows(); hr++) {
        for (size_t hc = 0; hc < high.cols(); hc++) {
            Complex h = high(hr, hc);
            if (h == Complex{0}) {
                continue;
            }
            for (size_t lr = 0; lr < low.rows(); lr++) {
                for (size_t lc = 0; lc < low.cols(); lc++) {
                    m(hr * low.rows() + lr, hc * low.cols() + lc) = h * low(lr, lc);
                }
            }
        }
    }
    return m;
}

size_t basis_index(std::string_view label) {
    if (label.size() > 63) {
        throw InvalidArgument("basis label too long");
    }
    size_t index = 0;
    for (size_t k = 0; k < label.size(); k++) {
        if (label[k] == '1') {
            index |= size_t{1} << k;
        } else if (label[k] != '0') {
            throw InvalidArgument("basis label must contain only 0 and 1: " + std::string(label));
        }
    }
    return index;
}

std::string basis_label(size_t index, size_t n_qubits) {
    std::string s(n_qubits, '0');
    for (size_t k = 0; k < n_qubits; k++) {
        if ((index >> k) & 1) {
            s[k] = '1';
        }
    }
    return s;
}

// ---------------------------------------------------------------------------
// Statevector

Statevector::Statevector(size_t n_qubits) : n_qubits_(n_qubits), amplitudes_(size_t{1} << n_qubits) {
    amplitudes_[0] = 1.0;
}

Statevector Statevector::basis(size_t n_qubits, size_t index) {
    Statevector s(n_qubits);
    if (index >= s.dim()) {
        throw InvalidArgument("basis index out of range");
    }
    s.amplitudes_[0] = 0.0;
    s.amplitudes_[index] = 1.0;
    return s;
}

Statevector Statevector::from_label(std::string_view label) {
    return basis(label.size(), basis_index(label));
}

Statevector Statevector::from_amplitudes(std::vector<Complex> amplitudes) {
    size_t n = qubits_for_dim(amplitudes.size());
    Statevector s(n);
    s.amplitudes_ = std::move(amplitudes);
    return s;
}

double Statevector::norm_squared() const {
    double s = 0;
    for (const auto &a : amplitudes_) {
        s += std::norm(a);
    }
    return s;
}

Statevector Statevector::normalized() const {
    double n2 = norm_squared();
    if (!(n2 > tol::kPruneProbability)) {
        throw InvalidState("cannot normalize a zero statevector");
    }
    Statevector s = *this;
    double scale = 1.0 / std::sqrt(n2);
    for (auto &a : s.amplitudes_) {
        a *= scale;
    }
    return s;
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix::DensityMatrix(Matrix elements) : n_qubits_(0), elements_(std::move(elements)) {
    if (!elements_.is_square()) {
        throw InvalidArgument("density matrix must be square");
    }
    n_qubits_ = qubits_for_dim(elements_.rows());
}

DensityMatrix DensityMatrix::from_pure(const Statevector &psi) {
    return DensityMatrix(Matrix::outer(psi.amplitudes(), psi.amplitudes()));
}

DensityMatrix DensityMatrix::maximally_mixed(size_t n_qubits) {
    size_t dim = size_t{1} << n_qubits;
    Matrix m = Matrix::identity(dim);
    m *= 1.0 / static_cast<double>(dim);
    return DensityMatrix(std::move(m));
}

double DensityMatrix::trace() const {
    return elements_.trace().real();
}

DensityMatrix DensityMatrix::normalized() const {
    double t = trace();
    if (!(t > tol::kPruneProbability)) {
        throw InvalidState("cannot normalize a density matrix with zero trace");
    }
    Matrix m = elements_;
    m *= 1.0 / t;
    return DensityMatrix(std::move(m));
}

bool DensityMatrix::is_valid(double tolerance) const {
    if (elements_.hermitian_deviation() > tolerance) {
        return false;
    }
    if (std::abs(trace() - 1.0) > tolerance) {
        return false;
    }
    auto values = hermitian_eigenvalues(elements_);
    return values.back() >= -tolerance;
}

// ---------------------------------------------------------------------------
// Composition and reduction

Statevector tensor(const Statevector &a, const Statevector &b) {
    std::vector<Complex> out(a.dim() * b.dim());
    for (size_t hb = 0; hb < b.dim(); hb++) {
        for (size_t la = 0; la < a.dim(); la++) {
            out[hb * a.dim() + la] = a[la] * b[hb];
        }
    }
    return Statevector::from_amplitudes(std::move(out));
}

DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b) {
    return DensityMatrix(kron_low_high(a.matrix(), b.matrix()));
}

DensityMatrix partial_trace(const DensityMatrix &rho, const std::vector<size_t> &keep) {
    check_keep(keep, rho.n_qubits());
    auto split = split_indices(rho.n_qubits(), keep);
    size_t kdim = size_t{1} << keep.size();
    size_t tdim = size_t{1} << split.n_traced;
    // full[t][k] = full index with kept part k and traced part t.
    std::vector<size_t> full(kdim * tdim);
    for (size_t x = 0; x < rho.dim(); x++) {
        full[split.traced[x] * kdim + split.kept[x]] = x;
    }
    Matrix out(kdim, kdim);
    for (size_t t = 0; t < tdim; t++) {
        const size_t *row = &full[t * kdim];
        for (size_t i = 0; i < kdim; i++) {
            for (size_t j = 0; j < kdim; j++) {
                out(i, j) += rho(row[i], row[j]);
            }
        }
    }
    return DensityMatrix(std::move(out));
}

DensityMatrix partial_trace(const Statevector &psi, const std::vector<size_t> &keep) {
    check_keep(keep, psi.n_qubits());
    auto split = split_indices(psi.n_qubits(), keep);
    size_t kdim = size_t{1} << keep.size();
    size_t tdim = size_t{1} << split.n_traced;
    // Reshape into a kdim x tdim matrix M so the reduced state is M M^dagger.
    std::vector<Complex> m(kdim * tdim);
    for (size_t x = 0; x < psi.dim(); x++) {
        m[split.kept[x] * tdim + split.traced[x]] = psi[x];
    }
    Matrix out(kdim, kdim);
    for (size_t i = 0; i < kdim; i++) {
        for (size_t j = i; j < kdim; j++) {
            Complex s = 0;
            for (size_t t = 0; t < tdim; t++) {
                s += m[i * tdim + t] * std::conj(m[j * tdim + t]);
            }
            out(i, j) = s;
            out(j, i) = std::conj(s);
        }
    }
    return DensityMatrix(std::move(out));
}

Complex inner(const Statevector &a, const Statevector &b) {
    if (a.dim() != b.dim()) {
        throw InvalidArgument("inner: dimension mismatch");
    }
    Complex s = 0;
    for (size_t i = 0; i < a.dim(); i++) {
        s += std::conj(a[i]) * b[i];
    }
    return s;
}

namespace {

double clamp_unit(double v) {
    if (v < 0 && v > -tol::kClamp) {
        return 0;
    }
    if (v > 1 && v < 1 + tol::kClamp) {
        return 1;
    }
    return v;
}

}  // namespace

double fidelity(const DensityMatrix &rho, const Statevector &psi) {
    if (rho.dim() != psi.dim()) {
        throw InvalidArgument("fidelity: dimension mismatch");
    }
    Complex s = 0;
    for (size_t r = 0; r < rho.dim(); r++) {
        Complex row = 0;
        for (size_t c = 0; c < rho.dim(); c++) {
            row += rho(r, c) * psi[c];
        }
        s += std::conj(psi[r]) * row;
    }
    return clamp_unit(s.real());
}

double fidelity(const Statevector &a, const Statevector &b) {
    return clamp_unit(std::norm(inner(a, b)));
}

// ---------------------------------------------------------------------------
// Spectral routines

EigenDecomposition hermitian_eigen(const Matrix &m) {
    if (!m.is_square()) {
        throw InvalidArgument("hermitian_eigen: matrix is not square");
    }
    double scale = std::max(1.0, m.frobenius_norm());
    if (m.hermitian_deviation() > tol::kHermitian * scale) {
        throw InvalidArgument("hermitian_eigen: matrix is not Hermitian");
    }
    const size_t n = m.rows();
    // Work on the exactly Hermitian part.
    Matrix a(n, n);
    for (size_t r = 0; r < n; r++) {
        a(r, r) = m(r, r).real();
        for (size_t c = r + 1; c < n; c++) {
            Complex v = 0.5 * (m(r, c) + std::conj(m(c, r)));
            a(r, c) = v;
            a(c, r) = std::conj(v);
        }
    }
    Matrix v = Matrix::identity(n);

    auto off_norm = [&]() {
        double s = 0;
        for (size_t r = 0; r < n; r++) {
            for (size_t c = r + 1; c < n; c++) {
                s += std::norm(a(r, c));
            }
        }
        return std::sqrt(2 * s);
    };

    const double stop = tol::kJacobiRelative * std::max(a.frobenius_norm(), 1e-300);
    for (int sweep = 0; sweep < tol::kJacobiMaxSweeps && off_norm() > stop; sweep++) {
        for (size_t p = 0; p + 1 < n; p++) {
            for (size_t q = p + 1; q < n; q++) {
                double g = std::abs(a(p, q));
                if (g < 1e-300) {
                    continue;
                }
                Complex phase = a(p, q) / g;
                double app = a(p, p).real();
                double aqq = a(q, q).real();
                // Real rotation annihilating the phase-corrected element.
                double theta = (aqq - app) / (2 * g);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                double c = 1 / std::sqrt(t * t + 1);
                double s = t * c;
                // Block of U on (p, q): [[c, s], [-s e^{-i phi}, c e^{-i phi}]].
                Complex upp = c;
                Complex upq = s;
                Complex uqp = -s * std::conj(phase);
                Complex uqq = c * std::conj(phase);
                for (size_t k = 0; k < n; k++) {
                    Complex akp = a(k, p);
                    Complex akq = a(k, q);
                    a(k, p) = akp * upp + akq * uqp;
                    a(k, q) = akp * upq + akq * uqq;
                }
                for (size_t k = 0; k < n; k++) {
                    Complex apk = a(p, k);
                    Complex aqk = a(q, k);
                    a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
                    a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
                }
                for (size_t k = 0; k < n; k++) {
                    Complex vkp = v(k, p);
                    Complex vkq = v(k, q);
                    v(k, p) = vkp * upp + vkq * uqp;
                    v(k, q) = vkp * upq + vkq * uqq;
                }
                a(p, q) = 0;
                a(q, p) = 0;
                a(p, p) = a(p, p).real();
                a(q, q) = a(q, q).real();
            }
        }
    }

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](size_t i, size_t j) {
        return a(i, i).real() > a(j, j).real();
    });
    EigenDecomposition out{std::vector<double>(n), Matrix(n, n)};
    for (size_t j = 0; j < n; j++) {
        out.values[j] = a(order[j], order[j]).real();
        for (size_t r = 0; r < n; r++) {
            out.vectors(r, j) = v(r, order[j]);
        }
    }
    return out;
}

std::vector<double> hermitian_eigenvalues(const Matrix &m) {
    return hermitian_eigen(m).values;
}

Matrix matrix_sqrt_psd(const Matrix &m) {
    auto eig = hermitian_eigen(m);
    const size_t n = m.rows();
    std::vector<double> roots(n);
    for (size_t j = 0; j < n; j++) {
        double lambda = eig.values[j];
        if (lambda < -tol::kNegativeEigen) {
            throw NumericalDomainError("matrix_sqrt_psd: eigenvalue " + std::to_string(lambda) +
                                       " is negative beyond tolerance");
        }
        roots[j] = std::sqrt(std::max(lambda, 0.0));
    }
    Matrix out(n, n);
    for (size_t r = 0; r < n; r++) {
        for (size_t c = r; c < n; c++) {
            Complex s = 0;
            for (size_t j = 0; j < n; j++) {
                s += eig.vectors(r, j) * roots[j] * std::conj(eig.vectors(c, j));
            }
            out(r, c) = s;
            out(c, r) = std::conj(s);
        }
    }
    return out;
}

}  // namespace wdistill
