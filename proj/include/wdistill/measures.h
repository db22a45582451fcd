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

#ifndef WDISTILL_MEASURES_H
#define WDISTILL_MEASURES_H

#include <array>
#include <cstdint>
#include <vector>

#include "wdistill/protocol.h"
#include "wdistill/qstate.h"

namespace wdistill {

/// -x log2 x - (1-x) log2 (1-x), zero at both ends.
double binary_entropy(double x);

/// Entropy of either reduced state of a normalized 2-qubit pure state.
double pure_eof(const Statevector &psi);

/// Wootters concurrence max(0, l1 - l2 - l3 - l4), l the decreasing eigenvalues of
/// R = sqrt(sqrt(rho) rho~ sqrt(rho)), rho~ = (Y x Y) rho* (Y x Y). Computed as the
/// singular values of the overlap matrix of the scaled eigenvectors with their spin
/// flips, which keeps the small values accurate for low-rank input.
double concurrence(const DensityMatrix &rho);
/// The same quantity evaluated literally through the R-matrix chain. Square roots of
/// rounding-level eigenvalues limit it to about 1e-8 on rank-deficient input.
double concurrence_r_matrix(const DensityMatrix &rho);
/// 2 |ad - bc| for psi = a|00> + b|10> + c|01> + d|11>.
double concurrence_pure(const Statevector &psi);

/// h((1 + sqrt(1 - c^2)) / 2).
double eof_from_concurrence(double c);

/// h(1/2 - sqrt(t (1 - t))) for t > 1/2, else 0.
double bennett_lower_bound(double theta_max);

enum class BellState : uint8_t { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

/// Bell vectors in the order Phi+, Phi-, Psi+, Psi-.
const std::array<Statevector, 4> &bell_basis();

struct BellDiagonalWeights {
    std::array<double, 4> theta;

    /// Throws InvalidArgument unless the weights are a probability vector.
    void validate() const;
    double theta_max() const;
};

DensityMatrix bell_diagonal_state(const BellDiagonalWeights &w);
/// <B_i| rho |B_i> in Bell-basis order.
BellDiagonalWeights bell_weights(const DensityMatrix &rho);
/// Largest overlap of rho with the four Bell vectors.
double fully_entangled_fraction(const DensityMatrix &rho);

enum class EntanglementMethod : uint8_t { WoottersExact, BennettBound, PureStateEntropy };

struct EntanglementReport {
    /// Fidelity to |Psi+>.
    double pair_fidelity;
    double concurrence;
    double eof;
    double eof_lower_bound;
    EntanglementMethod method;
};

EntanglementReport analyze_pair(const DensityMatrix &rho);

/// Which entanglement value weights each success branch of <E>.
enum class EofMeasure : uint8_t { Wootters, BennettBound };

double entanglement_of(const DensityMatrix &rho, EofMeasure measure);

/// Unconditional success probability: weak-round terms plus the strong term.
/// Throws DataError if a round's probabilities do not form a distribution.
double success_probability(const ProtocolResult &result);

/// EoF per success branch: weak[k-1][i] for party i's ancilla firing in round k,
/// strong for the pair left by the strong measurement.
struct BranchEof {
    std::vector<std::array<double, 3>> weak;
    double strong = 0;
};

BranchEof branch_eof(const ProtocolResult &result, EofMeasure measure);

/// Success probabilities weighted by per-branch entanglement. Branches with zero
/// probability may carry any value; a missing round is a DataError.
double expected_entanglement(const ProtocolResult &result, const BranchEof &eof);
double expected_entanglement(const ProtocolResult &result, EofMeasure measure = EofMeasure::Wootters);

/// How tabulated per-round probabilities relate to the full run.
/// Joint: every entry is already an unconditional probability of that event.
/// Conditional: entries are conditional on reaching the round (and on the
/// surviving W branch for the strong column).
enum class ProbabilityConvention : uint8_t { Joint, Conditional };

struct TabulatedRound {
    double p_w;
    double p_epr_weak;
    /// Only the last round carries a strong-measurement entry.
    double p_epr_strong;
};

struct TabulatedRun {
    std::vector<TabulatedRound> rounds;
    /// Party-averaged EoF by round: entry 0 is the single strong measurement
    /// without weak rounds, entry k the pair from round k. The strong term of an
    /// N-round run uses entry N.
    std::vector<double> eof_by_round;
};

double tabulated_success_probability(const TabulatedRun &run, ProbabilityConvention convention);
double tabulated_expected_entanglement(const TabulatedRun &run, ProbabilityConvention convention);

struct MixedEofEstimate {
    double value;
    bool converged;
};

struct MixedEofOptions {
    /// Number of pure states in the decomposition; 0 means max(rank, 4).
    size_t ensemble_size = 0;
    int restarts = 8;
    uint64_t seed = 1;
};

/// Minimizes the average pure-state entanglement over decompositions of rho,
/// parametrized by isometries acting on the scaled eigenvectors. An upper
/// estimate of the entanglement of formation.
MixedEofEstimate brute_force_mixed_eof(const DensityMatrix &rho, const MixedEofOptions &options = {});

}  // namespace wdistill

#endif
