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

#ifndef WDISTILL_CIRCUIT_H
#define WDISTILL_CIRCUIT_H

#include <cstdint>
#include <vector>

#include "wdistill/qstate.h"

namespace wdistill {

/// Register layout used by the weak-coupling round: parties a, b, c on qubits 0..2
/// and their ancillae alpha, beta, gamma on qubits 3..5.
constexpr size_t kNumParties = 3;
constexpr size_t kAncillaOffset = 3;

enum class GateKind : uint8_t { RY, CRY, CNOT, X, ProjectorF, ProjectorG };

/// A gate or projector bound to qubit indices. The single-qubit action on the target
/// is applied on the subspace where every control is 1 and every anti-control is 0.
struct CircuitOp {
    GateKind kind;
    double angle = 0;
    std::vector<size_t> targets;
    std::vector<size_t> controls;
    std::vector<size_t> anti_controls;

    bool is_unitary() const {
        return kind != GateKind::ProjectorF && kind != GateKind::ProjectorG;
    }
};

CircuitOp ry(size_t target, double theta);
/// Control on the system qubit, rotation on the ancilla.
CircuitOp cry(size_t control, size_t target, double theta);
CircuitOp cnot(size_t control, size_t target);
CircuitOp x_gate(size_t target);
/// |0><0| on the target.
CircuitOp projector_f(size_t target);
/// |1><1| on the target.
CircuitOp projector_g(size_t target);

/// theta = 2 asin(epsilon); requires 0 <= epsilon <= 1.
double theta_from_epsilon(double epsilon);
double epsilon_from_theta(double theta);

Statevector apply(const CircuitOp &op, const Statevector &state);
/// Unitaries conjugate (U rho U^dagger); projectors give P rho P without renormalizing.
DensityMatrix apply(const CircuitOp &op, const DensityMatrix &state);

/// (|011> + |101> + |110>)/sqrt(3) over (a, b, c). Only three parties are supported.
Statevector prepare_w(size_t n_parties = 3);
/// (|01> + |10>)/sqrt(2)
Statevector psi_plus();
Statevector psi_minus();
Statevector phi_plus();
Statevector phi_minus();

/// Couples each party qubit to its ancilla with CRY(2 asin(epsilon)). Input is a six
/// qubit register with the ancillae in |000>.
Statevector couple_all(const Statevector &state, double epsilon);
DensityMatrix couple_all(const DensityMatrix &state, double epsilon);

template <class State>
struct MeasurementBranch {
    /// Bit j holds the outcome of qubits[j].
    uint64_t outcome;
    double probability;
    /// Full register, renormalized.
    State post_state;
};

/// Computational-basis measurement of `qubits`, one branch per outcome with
/// probability above tol::kPruneProbability.
std::vector<MeasurementBranch<Statevector>> measure(const Statevector &state, const std::vector<size_t> &qubits);
std::vector<MeasurementBranch<DensityMatrix>> measure(const DensityMatrix &state, const std::vector<size_t> &qubits);

std::vector<MeasurementBranch<Statevector>> strong_measure_party(const Statevector &state, size_t party);
std::vector<MeasurementBranch<DensityMatrix>> strong_measure_party(const DensityMatrix &state, size_t party);

/// The two parties other than `party`, ascending.
std::vector<size_t> other_parties(size_t party);

}  // namespace wdistill

#endif
