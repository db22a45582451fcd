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

#include "wdistill/measures.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "wdistill/circuit.h"
#include "wdistill/errors.h"
#include "wdistill/rng.h"
#include "wdistill/tolerances.h"

namespace wdistill {

namespace {

void check_two_qubit(size_t n_qubits, const char *what) {
    if (n_qubits != 2) {
        throw InvalidArgument(std::string(what) + ": expected a 2-qubit state");
    }
}

void check_unit_interval(double x, const char *what) {
    if (!(x >= -tol::kClamp && x <= 1 + tol::kClamp)) {
        throw InvalidArgument(std::string(what) + ": argument must lie in [0, 1]");
    }
}

Matrix spin_flip() {
    Matrix y(2, 2);
    y(0, 1) = Complex(0, -1);
    y(1, 0) = Complex(0, 1);
    return kron_low_high(y, y);
}

// One-sided (Hestenes) Jacobi: orthogonalize the columns with plane rotations;
// the column norms are then the singular values, accurate to rounding in absolute terms.
std::vector<double> singular_values(Matrix a) {
    const size_t m = a.rows(), n = a.cols();
    for (int sweep = 0; sweep < tol::kJacobiMaxSweeps; sweep++) {
        bool rotated = false;
        for (size_t p = 0; p + 1 < n; p++) {
            for (size_t q = p + 1; q < n; q++) {
                double alpha = 0, beta = 0;
                Complex gamma = 0;
                for (size_t i = 0; i < m; i++) {
                    alpha += std::norm(a(i, p));
                    beta += std::norm(a(i, q));
                    gamma += std::conj(a(i, p)) * a(i, q);
                }
                double g = std::abs(gamma);
                if (g <= 1e-17 * std::sqrt(alpha * beta) || g == 0) {
                    continue;
                }
                rotated = true;
                Complex phase = std::conj(gamma) / g;
                double zeta = (beta - alpha) / (2 * g);
                double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1 + zeta * zeta));
                double c = 1 / std::sqrt(1 + t * t), s = c * t;
                for (size_t i = 0; i < m; i++) {
                    Complex ap = a(i, p), aq = a(i, q) * phase;
                    a(i, p) = c * ap - s * aq;
                    a(i, q) = s * ap + c * aq;
                }
            }
        }
        if (!rotated) {
            break;
        }
    }
    std::vector<double> sv(n);
    for (size_t j = 0; j < n; j++) {
        double norm = 0;
        for (size_t i = 0; i < m; i++) {
            norm += std::norm(a(i, j));
        }
        sv[j] = std::sqrt(norm);
    }
    std::sort(sv.rbegin(), sv.rend());
    return sv;
}

double clamp01(double x) {
    return std::clamp(x, 0.0, 1.0);
}

void check_record(const RoundRecord &r) {
    double sum = r.p_w + r.p_epr_total() + r.p_fail;
    bool in_range = r.p_w >= -tol::kProbabilitySum && r.p_fail >= -tol::kProbabilitySum;
    for (double p : r.p_epr_by_party) {
        in_range = in_range && p >= -tol::kProbabilitySum;
    }
    if (!in_range || !(std::abs(sum - 1) <= tol::kProbabilitySum)) {
        throw DataError("round " + std::to_string(r.round_index) + " probabilities do not sum to one");
    }
}

void check_eof_value(double e) {
    if (!(e >= -tol::kClamp && e <= 1 + tol::kClamp)) {
        throw DataError("entanglement value outside [0, 1]");
    }
}

}  // namespace

double binary_entropy(double x) {
    check_unit_interval(x, "binary_entropy");
    x = clamp01(x);
    if (x == 0 || x == 1) {
        return 0;
    }
    return -x * std::log2(x) - (1 - x) * std::log2(1 - x);
}

double pure_eof(const Statevector &psi) {
    check_two_qubit(psi.n_qubits(), "pure_eof");
    if (std::abs(psi.norm_squared() - 1) > tol::kHermitian) {
        throw InvalidArgument("pure_eof: state is not normalized");
    }
    auto lambda = hermitian_eigenvalues(partial_trace(psi, {0}).matrix());
    double s = 0;
    for (double l : lambda) {
        if (l > 0) {
            s -= l * std::log2(l);
        }
    }
    return clamp01(s);
}

double concurrence_r_matrix(const DensityMatrix &rho) {
    check_two_qubit(rho.n_qubits(), "concurrence_r_matrix");
    Matrix s = matrix_sqrt_psd(rho.matrix());
    Matrix yy = spin_flip();
    Matrix tilde = yy * rho.matrix().conjugate() * yy;
    Matrix m = s * tilde * s;
    // Hermitian up to rounding; symmetrize before the eigensolver.
    Matrix h = m + m.adjoint();
    h *= 0.5;
    auto ev = hermitian_eigenvalues(h);
    std::array<double, 4> l{};
    for (size_t i = 0; i < 4; i++) {
        if (ev[i] < -tol::kNegativeEigen) {
            throw NumericalDomainError("concurrence: negative eigenvalue in the R-matrix chain");
        }
        l[i] = std::sqrt(std::max(ev[i], 0.0));
    }
    return clamp01(std::max(0.0, l[0] - l[1] - l[2] - l[3]));
}

double concurrence(const DensityMatrix &rho) {
    check_two_qubit(rho.n_qubits(), "concurrence");
    // The eigenvalues of R are the singular values of tau_ij = <w_i| YY |w_j*>,
    // w_i = sqrt(p_i) v_i over the eigenvectors of rho.
    auto eig = hermitian_eigen(rho.matrix());
    std::vector<std::array<Complex, 4>> w;
    for (size_t j = 0; j < 4; j++) {
        if (eig.values[j] < -tol::kNegativeEigen) {
            throw NumericalDomainError("concurrence: input is not positive semidefinite");
        }
        if (eig.values[j] <= tol::kRankCut) {
            continue;
        }
        std::array<Complex, 4> col{};
        double scale = std::sqrt(eig.values[j]);
        for (size_t a = 0; a < 4; a++) {
            col[a] = scale * eig.vectors(a, j);
        }
        w.push_back(col);
    }
    const Matrix yy = spin_flip();
    const size_t r = w.size();
    Matrix tau(r, r);
    for (size_t i = 0; i < r; i++) {
        for (size_t j = 0; j < r; j++) {
            Complex acc = 0;
            for (size_t a = 0; a < 4; a++) {
                for (size_t b = 0; b < 4; b++) {
                    acc += std::conj(w[i][a]) * yy(a, b) * std::conj(w[j][b]);
                }
            }
            tau(i, j) = acc;
        }
    }
    std::array<double, 4> l{};
    auto sv = singular_values(tau);
    std::copy(sv.begin(), sv.end(), l.begin());
    return clamp01(std::max(0.0, l[0] - l[1] - l[2] - l[3]));
}

double concurrence_pure(const Statevector &psi) {
    check_two_qubit(psi.n_qubits(), "concurrence_pure");
    return clamp01(2 * std::abs(psi[0] * psi[3] - psi[1] * psi[2]));
}

double eof_from_concurrence(double c) {
    check_unit_interval(c, "eof_from_concurrence");
    c = clamp01(c);
    return binary_entropy((1 + std::sqrt(1 - c * c)) / 2);
}

double bennett_lower_bound(double theta_max) {
    check_unit_interval(theta_max, "bennett_lower_bound");
    theta_max = clamp01(theta_max);
    if (theta_max <= 0.5) {
        return 0;
    }
    return binary_entropy(0.5 - std::sqrt(theta_max * (1 - theta_max)));
}

const std::array<Statevector, 4> &bell_basis() {
    static const std::array<Statevector, 4> basis{phi_plus(), phi_minus(), psi_plus(), psi_minus()};
    return basis;
}

void BellDiagonalWeights::validate() const {
    double sum = 0;
    for (double t : theta) {
        if (!(t >= 0 && t <= 1)) {
            throw InvalidArgument("Bell-diagonal weights must lie in [0, 1]");
        }
        sum += t;
    }
    if (std::abs(sum - 1) > tol::kState) {
        throw InvalidArgument("Bell-diagonal weights must sum to one");
    }
}

double BellDiagonalWeights::theta_max() const {
    return *std::max_element(theta.begin(), theta.end());
}

DensityMatrix bell_diagonal_state(const BellDiagonalWeights &w) {
    w.validate();
    Matrix m(4, 4);
    for (size_t i = 0; i < 4; i++) {
        const auto &b = bell_basis()[i];
        m += w.theta[i] * Matrix::outer(b.amplitudes(), b.amplitudes());
    }
    return DensityMatrix(std::move(m));
}

BellDiagonalWeights bell_weights(const DensityMatrix &rho) {
    check_two_qubit(rho.n_qubits(), "bell_weights");
    BellDiagonalWeights w{};
    for (size_t i = 0; i < 4; i++) {
        w.theta[i] = fidelity(rho, bell_basis()[i]);
    }
    return w;
}

double fully_entangled_fraction(const DensityMatrix &rho) {
    return bell_weights(rho).theta_max();
}

EntanglementReport analyze_pair(const DensityMatrix &rho) {
    check_two_qubit(rho.n_qubits(), "analyze_pair");
    EntanglementReport r{};
    r.pair_fidelity = fidelity(rho, psi_plus());
    r.eof_lower_bound = bennett_lower_bound(fully_entangled_fraction(rho));
    auto eig = hermitian_eigen(rho.matrix());
    if (eig.values[0] > 1 - tol::kState) {
        std::vector<Complex> v(4);
        for (size_t i = 0; i < 4; i++) {
            v[i] = eig.vectors(i, 0);
        }
        Statevector psi = Statevector::from_amplitudes(std::move(v)).normalized();
        r.concurrence = concurrence_pure(psi);
        r.eof = pure_eof(psi);
        r.method = EntanglementMethod::PureStateEntropy;
    } else {
        r.concurrence = concurrence(rho);
        r.eof = eof_from_concurrence(r.concurrence);
        r.method = EntanglementMethod::WoottersExact;
    }
    return r;
}

double entanglement_of(const DensityMatrix &rho, EofMeasure measure) {
    switch (measure) {
        case EofMeasure::Wootters:
            return eof_from_concurrence(concurrence(rho));
        case EofMeasure::BennettBound:
            return bennett_lower_bound(fully_entangled_fraction(rho));
    }
    throw InvalidArgument("unknown entanglement measure");
}

double success_probability(const ProtocolResult &result) {
    double total = 0;
    for (const auto &r : result.rounds) {
        check_record(r);
        total += result.reach_probability(r.round_index) * r.p_epr_total();
    }
    if (result.strong.reached) {
        if (!(result.strong.p_epr >= 0 && result.strong.p_epr <= 1 + tol::kProbabilitySum)) {
            throw DataError("strong-measurement probability outside [0, 1]");
        }
        total += result.reach_probability(result.rounds_requested + 1) * result.strong.p_epr;
    }
    return total;
}

BranchEof branch_eof(const ProtocolResult &result, EofMeasure measure) {
    BranchEof out;
    for (const auto &r : result.rounds) {
        std::array<double, 3> e{};
        for (size_t i = 0; i < 3; i++) {
            if (r.distilled_states[i]) {
                e[i] = entanglement_of(*r.distilled_states[i], measure);
            }
        }
        out.weak.push_back(e);
    }
    if (result.strong.distilled_state) {
        out.strong = entanglement_of(*result.strong.distilled_state, measure);
    }
    return out;
}

double expected_entanglement(const ProtocolResult &result, const BranchEof &eof) {
    if (eof.weak.size() < result.rounds.size()) {
        throw DataError("missing entanglement values for " + std::to_string(result.rounds.size() - eof.weak.size()) +
                        " round(s)");
    }
    double total = 0;
    for (size_t k = 0; k < result.rounds.size(); k++) {
        const auto &r = result.rounds[k];
        check_record(r);
        double reach = result.reach_probability(r.round_index);
        for (size_t i = 0; i < 3; i++) {
            check_eof_value(eof.weak[k][i]);
            total += reach * r.p_epr_by_party[i] * eof.weak[k][i];
        }
    }
    if (result.strong.reached) {
        check_eof_value(eof.strong);
        total += result.reach_probability(result.rounds_requested + 1) * result.strong.p_epr * eof.strong;
    }
    return total;
}

double expected_entanglement(const ProtocolResult &result, EofMeasure measure) {
    return expected_entanglement(result, branch_eof(result, measure));
}

namespace {

// Unconditional probabilities of every weak-round and strong term, in table order.
std::vector<std::pair<double, double>> tabulated_terms(const TabulatedRun &run, ProbabilityConvention convention) {
    const size_t n = run.rounds.size();
    if (run.eof_by_round.size() < n + 1) {
        throw DataError("entanglement table needs one entry per round plus round 0");
    }
    std::vector<std::pair<double, double>> terms;
    double reach = 1;
    for (size_t k = 0; k < n; k++) {
        const auto &r = run.rounds[k];
        double weak = convention == ProbabilityConvention::Joint ? r.p_epr_weak : reach * r.p_epr_weak;
        terms.emplace_back(weak, run.eof_by_round[k + 1]);
        reach *= r.p_w;
    }
    if (n == 0) {
        // No weak rounds: the single strong measurement of round 0.
        return terms;
    }
    double strong = run.rounds.back().p_epr_strong;
    if (convention == ProbabilityConvention::Conditional) {
        strong *= reach;
    }
    terms.emplace_back(strong, run.eof_by_round[n]);
    return terms;
}

}  // namespace

double tabulated_success_probability(const TabulatedRun &run, ProbabilityConvention convention) {
    double total = 0;
    for (const auto &[p, e] : tabulated_terms(run, convention)) {
        total += p;
    }
    return total;
}

double tabulated_expected_entanglement(const TabulatedRun &run, ProbabilityConvention convention) {
    double total = 0;
    for (const auto &[p, e] : tabulated_terms(run, convention)) {
        total += p * e;
    }
    return total;
}

namespace {

using Vec = std::vector<double>;

// Average entanglement of the decomposition psi_k = sum_i U_ki w_i, U the
// Gram-Schmidt orthonormalization of the K x r complex matrix packed in x.
struct DecompositionObjective {
    std::vector<std::array<Complex, 4>> w;  // scaled eigenvectors sqrt(l_i) v_i
    size_t k;

    double operator()(const Vec &x) const {
        const size_t r = w.size();
        std::vector<Complex> u(k * r);
        for (size_t i = 0; i < k * r; i++) {
            u[i] = Complex(x[i], x[k * r + i]);
        }
        // Column j of U is u[row * r + j].
        for (size_t j = 0; j < r; j++) {
            for (size_t i = 0; i < j; i++) {
                Complex dot = 0;
                for (size_t row = 0; row < k; row++) {
                    dot += std::conj(u[row * r + i]) * u[row * r + j];
                }
                for (size_t row = 0; row < k; row++) {
                    u[row * r + j] -= dot * u[row * r + i];
                }
            }
            double norm = 0;
            for (size_t row = 0; row < k; row++) {
                norm += std::norm(u[row * r + j]);
            }
            norm = std::sqrt(norm);
            if (!(norm > 1e-300)) {
                return std::numeric_limits<double>::infinity();
            }
            for (size_t row = 0; row < k; row++) {
                u[row * r + j] /= norm;
            }
        }
        double total = 0;
        for (size_t row = 0; row < k; row++) {
            std::array<Complex, 4> psi{};
            for (size_t i = 0; i < r; i++) {
                for (size_t a = 0; a < 4; a++) {
                    psi[a] += u[row * r + i] * w[i][a];
                }
            }
            // Reduced state of qubit 0 (index bit 0), unnormalized.
            double r00 = std::norm(psi[0]) + std::norm(psi[2]);
            double r11 = std::norm(psi[1]) + std::norm(psi[3]);
            Complex r01 = psi[0] * std::conj(psi[1]) + psi[2] * std::conj(psi[3]);
            double p = r00 + r11;
            if (p <= 1e-300) {
                continue;
            }
            double det = r00 * r11 - std::norm(r01);
            double disc = std::sqrt(std::max(0.0, p * p - 4 * det));
            double l1 = std::clamp((p + disc) / (2 * p), 0.0, 1.0);
            double l2 = 1 - l1;
            double s = 0;
            for (double l : {l1, l2}) {
                if (l > 0) {
                    s -= l * std::log2(l);
                }
            }
            total += p * s;
        }
        return total;
    }
};

Vec gradient(const DecompositionObjective &f, const Vec &x) {
    constexpr double h = 1e-6;
    Vec g(x.size());
    Vec y = x;
    for (size_t i = 0; i < x.size(); i++) {
        y[i] = x[i] + h;
        double fp = f(y);
        y[i] = x[i] - h;
        double fm = f(y);
        y[i] = x[i];
        g[i] = (fp - fm) / (2 * h);
    }
    return g;
}

double dot(const Vec &a, const Vec &b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); i++) {
        s += a[i] * b[i];
    }
    return s;
}

struct Minimum {
    double value;
    bool converged;
};

Minimum bfgs(const DecompositionObjective &f, Vec x) {
    constexpr int kMaxIterations = 2000;
    constexpr double kGradTolerance = 1e-7;
    constexpr double kStallTolerance = 1e-15;
    const size_t n = x.size();
    std::vector<Vec> hinv(n, Vec(n, 0.0));
    for (size_t i = 0; i < n; i++) {
        hinv[i][i] = 1;
    }
    double fx = f(x);
    Vec g = gradient(f, x);
    int stalled = 0;
    for (int it = 0; it < kMaxIterations; it++) {
        double gmax = 0;
        for (double v : g) {
            gmax = std::max(gmax, std::abs(v));
        }
        if (gmax < kGradTolerance) {
            return {fx, true};
        }
        Vec d(n, 0.0);
        for (size_t i = 0; i < n; i++) {
            for (size_t j = 0; j < n; j++) {
                d[i] -= hinv[i][j] * g[j];
            }
        }
        double slope = dot(d, g);
        if (slope >= 0) {
            // Not a descent direction: reset to steepest descent.
            for (size_t i = 0; i < n; i++) {
                std::fill(hinv[i].begin(), hinv[i].end(), 0.0);
                hinv[i][i] = 1;
                d[i] = -g[i];
            }
            slope = -dot(g, g);
        }
        double step = 1;
        Vec xn(n);
        double fn = fx;
        bool accepted = false;
        for (int ls = 0; ls < 60; ls++) {
            for (size_t i = 0; i < n; i++) {
                xn[i] = x[i] + step * d[i];
            }
            fn = f(xn);
            if (fn <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            return {fx, gmax < 1e-5};
        }
        Vec gn = gradient(f, xn);
        Vec s(n), y(n);
        for (size_t i = 0; i < n; i++) {
            s[i] = xn[i] - x[i];
            y[i] = gn[i] - g[i];
        }
        double sy = dot(s, y);
        if (sy > 1e-14) {
            Vec hy(n, 0.0);
            for (size_t i = 0; i < n; i++) {
                for (size_t j = 0; j < n; j++) {
                    hy[i] += hinv[i][j] * y[j];
                }
            }
            double yhy = dot(y, hy);
            for (size_t i = 0; i < n; i++) {
                for (size_t j = 0; j < n; j++) {
                    hinv[i][j] += ((sy + yhy) * s[i] * s[j]) / (sy * sy) - (hy[i] * s[j] + s[i] * hy[j]) / sy;
                }
            }
        }
        stalled = fx - fn < kStallTolerance ? stalled + 1 : 0;
        x = std::move(xn);
        g = std::move(gn);
        fx = fn;
        if (stalled >= 5) {
            return {fx, gmax < 1e-5};
        }
    }
    return {fx, false};
}

}  // namespace

MixedEofEstimate brute_force_mixed_eof(const DensityMatrix &rho, const MixedEofOptions &options) {
    check_two_qubit(rho.n_qubits(), "brute_force_mixed_eof");
    if (options.restarts < 1) {
        throw InvalidArgument("brute_force_mixed_eof: need at least one restart");
    }
    auto eig = hermitian_eigen(rho.matrix());
    DecompositionObjective f;
    for (size_t j = 0; j < 4; j++) {
        if (eig.values[j] < -tol::kNegativeEigen) {
            throw NumericalDomainError("brute_force_mixed_eof: input is not positive semidefinite");
        }
        if (eig.values[j] <= tol::kState) {
            continue;
        }
        std::array<Complex, 4> col{};
        double scale = std::sqrt(eig.values[j]);
        for (size_t a = 0; a < 4; a++) {
            col[a] = scale * eig.vectors(a, j);
        }
        f.w.push_back(col);
    }
    const size_t rank = f.w.size();
    f.k = options.ensemble_size ? options.ensemble_size : std::max<size_t>(rank, 4);
    if (f.k < rank) {
        throw InvalidArgument("brute_force_mixed_eof: ensemble smaller than the rank of the state");
    }
    if (rank == 1) {
        // Unique decomposition.
        Statevector psi = Statevector::from_amplitudes({f.w[0].begin(), f.w[0].end()}).normalized();
        return {pure_eof(psi), true};
    }

    MixedEofEstimate best{std::numeric_limits<double>::infinity(), false};
    std::mt19937_64 gen(mix64(options.seed));
    std::normal_distribution<double> normal;
    for (int t = 0; t < options.restarts; t++) {
        Vec x(2 * f.k * rank);
        for (double &v : x) {
            v = normal(gen);
        }
        Minimum m = bfgs(f, std::move(x));
        if (m.value < best.value) {
            best = {m.value, m.converged};
        }
    }
    best.value = clamp01(best.value);
    return best;
}

}  // namespace wdistill
