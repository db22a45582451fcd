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

#ifndef WDISTILL_QSTATE_H
#define WDISTILL_QSTATE_H

// Dense complex linear algebra for small registers.
//
// Qubit ordering is little-endian throughout the library: qubit k is bit k of
// a basis-state index. A ket label such as "011" lists qubits in increasing
// order, so character k of the label is the value of qubit k. For the three
// parties a, b, c the label |abc> therefore maps a -> qubit 0, b -> qubit 1,
// c -> qubit 2, and |011> is basis index 6.

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wdistill {

using Complex = std::complex<double>;

class Matrix {
   public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols);

    static Matrix identity(size_t n);
    static Matrix diagonal(std::span<const double> values);
    /// |a><b|
    static Matrix outer(std::span<const Complex> a, std::span<const Complex> b);

    size_t rows() const {
        return rows_;
    }
    size_t cols() const {
        return cols_;
    }
    bool is_square() const {
        return rows_ == cols_;
    }

    Complex &operator()(size_t r, size_t c) {
        return data_[r * cols_ + c];
    }
    const Complex &operator()(size_t r, size_t c) const {
        return data_[r * cols_ + c];
    }
    std::span<Complex> data() {
        return data_;
    }
    std::span<const Complex> data() const {
        return data_;
    }

    Matrix adjoint() const;
    Matrix conjugate() const;
    Complex trace() const;
    double frobenius_norm() const;
    /// max_ij |m_ij - conj(m_ji)|
    double hermitian_deviation() const;

    Matrix &operator+=(const Matrix &other);
    Matrix &operator-=(const Matrix &other);
    Matrix &operator*=(Complex scale);

   private:
    size_t rows_ = 0;
    size_t cols_ = 0;
    std::vector<Complex> data_;
};

Matrix operator+(Matrix a, const Matrix &b);
Matrix operator-(Matrix a, const Matrix &b);
Matrix operator*(const Matrix &a, const Matrix &b);
Matrix operator*(Complex s, Matrix m);

/// Kronecker product where `low` occupies the low-order index bits.
Matrix kron_low_high(const Matrix &low, const Matrix &high);

/// Basis index of a ket label; character k is qubit k.
size_t basis_index(std::string_view label);
std::string basis_label(size_t index, size_t n_qubits);

class Statevector {
   public:
    /// |0...0> on n qubits.
    explicit Statevector(size_t n_qubits);

    static Statevector basis(size_t n_qubits, size_t index);
    static Statevector from_label(std::string_view label);
    /// Length must be a power of two. The amplitudes are taken as given.
    static Statevector from_amplitudes(std::vector<Complex> amplitudes);

    size_t n_qubits() const {
        return n_qubits_;
    }
    size_t dim() const {
        return amplitudes_.size();
    }
    std::span<const Complex> amplitudes() const {
        return amplitudes_;
    }
    std::span<Complex> amplitudes() {
        return amplitudes_;
    }
    Complex operator[](size_t i) const {
        return amplitudes_[i];
    }
    Complex &operator[](size_t i) {
        return amplitudes_[i];
    }

    double norm_squared() const;
    /// Throws InvalidState for a (numerically) zero vector.
    Statevector normalized() const;

   private:
    size_t n_qubits_;
    std::vector<Complex> amplitudes_;
};

class DensityMatrix {
   public:
    /// Takes a 2^n x 2^n matrix; contents are not validated (see is_valid).
    explicit DensityMatrix(Matrix elements);

    static DensityMatrix from_pure(const Statevector &psi);
    static DensityMatrix maximally_mixed(size_t n_qubits);

    size_t n_qubits() const {
        return n_qubits_;
    }
    size_t dim() const {
        return elements_.rows();
    }
    const Matrix &matrix() const {
        return elements_;
    }
    const Complex &operator()(size_t r, size_t c) const {
        return elements_(r, c);
    }

    double trace() const;
    /// Throws InvalidState for a (numerically) zero trace.
    DensityMatrix normalized() const;
    /// Hermitian, unit trace and positive semidefinite within `tolerance`.
    bool is_valid(double tolerance = 1e-10) const;

   private:
    size_t n_qubits_;
    Matrix elements_;
};

/// Result has a's qubits first (low bits) followed by b's.
Statevector tensor(const Statevector &a, const Statevector &b);
DensityMatrix tensor(const DensityMatrix &a, const DensityMatrix &b);

/// Reduced state on `keep`. Kept qubit keep[j] becomes qubit j of the result.
DensityMatrix partial_trace(const DensityMatrix &rho, const std::vector<size_t> &keep);
DensityMatrix partial_trace(const Statevector &psi, const std::vector<size_t> &keep);

Complex inner(const Statevector &a, const Statevector &b);
/// <psi|rho|psi>, clamped into [0, 1] when within tolerance of the boundary.
double fidelity(const DensityMatrix &rho, const Statevector &psi);
double fidelity(const Statevector &a, const Statevector &b);

struct EigenDecomposition {
    /// Descending.
    std::vector<double> values;
    /// Column j is the eigenvector of values[j].
    Matrix vectors;
};

/// Cyclic complex Jacobi. Throws InvalidArgument if m is not Hermitian within tol::kHermitian.
EigenDecomposition hermitian_eigen(const Matrix &m);
std::vector<double> hermitian_eigenvalues(const Matrix &m);

/// Principal square root of a PSD matrix. Eigenvalues in [-tol::kNegativeEigen, 0) are
/// clamped to zero; anything more negative raises NumericalDomainError.
Matrix matrix_sqrt_psd(const Matrix &m);

}  // namespace wdistill

#endif
