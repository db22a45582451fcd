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

#include "wdistill/circuit.h"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "wdistill/errors.h"
#include "wdistill/tolerances.h"

namespace wdistill {

namespace {

constexpr double kInvSqrt2 = 1 / std::numbers::sqrt2;

using Gate2 = std::array<Complex, 4>;  // row-major 2x2

Gate2 local_matrix(const CircuitOp &op) {
    switch (op.kind) {
        case GateKind::RY:
        case GateKind::CRY: {
            double c = std::cos(op.angle / 2);
            double s = std::sin(op.angle / 2);
            return {c, -s, s, c};
        }
        case GateKind::CNOT:
        case GateKind::X:
            return {0, 1, 1, 0};
        case GateKind::ProjectorF:
            return {1, 0, 0, 0};
        case GateKind::ProjectorG:
            return {0, 0, 0, 1};
    }
    throw InvalidArgument("unknown gate kind");
}

struct Masks {
    uint64_t target;
    uint64_t control;
    uint64_t anti;
};

Masks validate(const CircuitOp &op, size_t n_qubits) {
    if (op.targets.size() != 1) {
        throw InvalidArgument("circuit op must have exactly one target");
    }
    Masks m{0, 0, 0};
    auto bit = [&](size_t q) {
        if (q >= n_qubits) {
            throw InvalidArgument("qubit index " + std::to_string(q) + " out of range for " +
                                  std::to_string(n_qubits) + "-qubit register");
        }
        return uint64_t{1} << q;
    };
    m.target = bit(op.targets[0]);
    for (size_t q : op.controls) {
        m.control |= bit(q);
    }
    for (size_t q : op.anti_controls) {
        m.anti |= bit(q);
    }
    if ((m.target & (m.control | m.anti)) || (m.control & m.anti)) {
        throw InvalidArgument("targets and controls must be disjoint");
    }
    if (!std::isfinite(op.angle)) {
        throw InvalidArgument("gate angle must be finite");
    }
    return m;
}

// Applies g to every amplitude pair of `data` (stride `stride` between consecutive
// basis indices) that satisfies the control pattern.
void apply_local(std::span<Complex> data, size_t stride, size_t dim, const Gate2 &g, const Masks &m) {
    for (size_t i0 = 0; i0 < dim; i0++) {
        if ((i0 & m.target) || (i0 & m.control) != m.control || (i0 & m.anti)) {
            continue;
        }
        size_t i1 = i0 | m.target;
        Complex &v0 = data[i0 * stride];
        Complex &v1 = data[i1 * stride];
        Complex n0 = g[0] * v0 + g[1] * v1;
        Complex n1 = g[2] * v0 + g[3] * v1;
        v0 = n0;
        v1 = n1;
    }
}

size_t party_count_check(size_t party) {
    if (party >= kNumParties) {
        throw InvalidArgument("party index must be 0, 1 or 2");
    }
    return party;
}

template <class State>
void check_ground_ancillae(const State &state);

template <>
void check_ground_ancillae(const Statevector &state) {
    double excited = 0;
    for (size_t i = 0; i < state.dim(); i++) {
        if (i >> kAncillaOffset) {
            excited += std::norm(state[i]);
        }
    }
    if (excited > tol::kState) {
        throw PreconditionError("couple_all: ancillae are not in the ground state");
    }
}

template <>
void check_ground_ancillae(const DensityMatrix &state) {
    double excited = 0;
    for (size_t i = 0; i < state.dim(); i++) {
        if (i >> kAncillaOffset) {
            excited += std::abs(state(i, i).real());
        }
    }
    if (excited > tol::kState) {
        throw PreconditionError("couple_all: ancillae are not in the ground state");
    }
}

template <class State>
State couple_all_impl(const State &state, double epsilon) {
    if (state.n_qubits() != 2 * kNumParties) {
        throw InvalidArgument("couple_all: expected a 6-qubit register");
    }
    check_ground_ancillae(state);
    double theta = theta_from_epsilon(epsilon);
    State out = state;
    for (size_t p = 0; p < kNumParties; p++) {
        out = apply(cry(p, kAncillaOffset + p, theta), out);
    }
    return out;
}

std::vector<uint64_t> outcome_of_index(size_t dim, const std::vector<size_t> &qubits, size_t n_qubits) {
    if (qubits.empty()) {
        throw InvalidArgument("measure: no qubits given");
    }
    for (size_t q : qubits) {
        if (q >= n_qubits) {
            throw InvalidArgument("measure: qubit " + std::to_string(q) + " out of range");
        }
    }
    std::vector<uint64_t> out(dim);
    for (size_t i = 0; i < dim; i++) {
        uint64_t o = 0;
        for (size_t j = 0; j < qubits.size(); j++) {
            o |= uint64_t((i >> qubits[j]) & 1) << j;
        }
        out[i] = o;
    }
    return out;
}

}  // namespace

CircuitOp ry(size_t target, double theta) {
    return CircuitOp{GateKind::RY, theta, {target}, {}, {}};
}

CircuitOp cry(size_t control, size_t target, double theta) {
    return CircuitOp{GateKind::CRY, theta, {target}, {control}, {}};
}

CircuitOp cnot(size_t control, size_t target) {
    return CircuitOp{GateKind::CNOT, 0, {target}, {control}, {}};
}

CircuitOp x_gate(size_t target) {
    return CircuitOp{GateKind::X, 0, {target}, {}, {}};
}

CircuitOp projector_f(size_t target) {
    return CircuitOp{GateKind::ProjectorF, 0, {target}, {}, {}};
}

CircuitOp projector_g(size_t target) {
    return CircuitOp{GateKind::ProjectorG, 0, {target}, {}, {}};
}

double theta_from_epsilon(double epsilon) {
    if (!(epsilon >= 0 && epsilon <= 1)) {
        throw InvalidArgument("coupling strength epsilon must lie in [0, 1]");
    }
    return 2 * std::asin(epsilon);
}

double epsilon_from_theta(double theta) {
    return std::sin(theta / 2);
}

Statevector apply(const CircuitOp &op, const Statevector &state) {
    Masks m = validate(op, state.n_qubits());
    Statevector out = state;
    apply_local(out.amplitudes(), 1, out.dim(), local_matrix(op), m);
    return out;
}

DensityMatrix apply(const CircuitOp &op, const DensityMatrix &state) {
    Masks m = validate(op, state.n_qubits());
    Gate2 g = local_matrix(op);
    Gate2 gc{std::conj(g[0]), std::conj(g[1]), std::conj(g[2]), std::conj(g[3])};
    Matrix work = state.matrix();
    const size_t dim = state.dim();
    auto data = work.data();
    // U rho: act on every column. (U rho) U^dagger: act with conj(U) on every row.
    for (size_t c = 0; c < dim; c++) {
        apply_local(data.subspan(c), dim, dim, g, m);
    }
    for (size_t r = 0; r < dim; r++) {
        apply_local(data.subspan(r * dim, dim), 1, dim, gc, m);
    }
    return DensityMatrix(std::move(work));
}

Statevector prepare_w(size_t n_parties) {
    if (n_parties != 3) {
        throw UnsupportedError("prepare_w: only the three-party W state is supported");
    }
    Statevector w(3);
    w[0] = 0;
    double a = 1 / std::sqrt(3.0);
    w[basis_index("011")] = a;
    w[basis_index("101")] = a;
    w[basis_index("110")] = a;
    return w;
}

Statevector psi_plus() {
    Statevector s(2);
    s[0] = 0;
    s[basis_index("01")] = kInvSqrt2;
    s[basis_index("10")] = kInvSqrt2;
    return s;
}

Statevector psi_minus() {
    Statevector s(2);
    s[0] = 0;
    s[basis_index("01")] = kInvSqrt2;
    s[basis_index("10")] = -kInvSqrt2;
    return s;
}

Statevector phi_plus() {
    Statevector s(2);
    s[basis_index("00")] = kInvSqrt2;
    s[basis_index("11")] = kInvSqrt2;
    return s;
}

Statevector phi_minus() {
    Statevector s(2);
    s[basis_index("00")] = kInvSqrt2;
    s[basis_index("11")] = -kInvSqrt2;
    return s;
}

Statevector couple_all(const Statevector &state, double epsilon) {
    return couple_all_impl(state, epsilon);
}

DensityMatrix couple_all(const DensityMatrix &state, double epsilon) {
    return couple_all_impl(state, epsilon);
}

std::vector<MeasurementBranch<Statevector>> measure(const Statevector &state, const std::vector<size_t> &qubits) {
    auto outcome = outcome_of_index(state.dim(), qubits, state.n_qubits());
    const size_t n_outcomes = size_t{1} << qubits.size();
    std::vector<double> weight(n_outcomes);
    for (size_t i = 0; i < state.dim(); i++) {
        weight[outcome[i]] += std::norm(state[i]);
    }
    double total = 0;
    for (double w : weight) {
        total += w;
    }
    if (!(total > tol::kPruneProbability)) {
        throw InvalidState("measure: state has zero norm");
    }
    std::vector<MeasurementBranch<Statevector>> branches;
    for (uint64_t o = 0; o < n_outcomes; o++) {
        double p = weight[o] / total;
        if (p <= tol::kPruneProbability) {
            continue;
        }
        Statevector post = state;
        for (size_t i = 0; i < post.dim(); i++) {
            if (outcome[i] != o) {
                post[i] = 0;
            }
        }
        branches.push_back({o, p, post.normalized()});
    }
    return branches;
}

std::vector<MeasurementBranch<DensityMatrix>> measure(const DensityMatrix &state, const std::vector<size_t> &qubits) {
    auto outcome = outcome_of_index(state.dim(), qubits, state.n_qubits());
    const size_t n_outcomes = size_t{1} << qubits.size();
    std::vector<double> weight(n_outcomes);
    for (size_t i = 0; i < state.dim(); i++) {
        weight[outcome[i]] += state(i, i).real();
    }
    double total = 0;
    for (double w : weight) {
        total += w;
    }
    if (!(total > tol::kPruneProbability)) {
        throw InvalidState("measure: state has zero trace");
    }
    std::vector<MeasurementBranch<DensityMatrix>> branches;
    for (uint64_t o = 0; o < n_outcomes; o++) {
        double p = weight[o] / total;
        if (p <= tol::kPruneProbability) {
            continue;
        }
        Matrix post(state.dim(), state.dim());
        for (size_t r = 0; r < state.dim(); r++) {
            if (outcome[r] != o) {
                continue;
            }
            for (size_t c = 0; c < state.dim(); c++) {
                if (outcome[c] == o) {
                    post(r, c) = state(r, c);
                }
            }
        }
        post *= 1.0 / weight[o];
        branches.push_back({o, p, DensityMatrix(std::move(post))});
    }
    return branches;
}

std::vector<MeasurementBranch<Statevector>> strong_measure_party(const Statevector &state, size_t party) {
    return measure(state, {party_count_check(party)});
}

std::vector<MeasurementBranch<DensityMatrix>> strong_measure_party(const DensityMatrix &state, size_t party) {
    return measure(state, {party_count_check(party)});
}

std::vector<size_t> other_parties(size_t party) {
    party_count_check(party);
    std::vector<size_t> out;
    for (size_t p = 0; p < kNumParties; p++) {
        if (p != party) {
            out.push_back(p);
        }
    }
    return out;
}

}  // namespace wdistill
