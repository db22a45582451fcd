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

#ifndef WDISTILL_PROTOCOL_H
#define WDISTILL_PROTOCOL_H

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wdistill/circuit.h"
#include "wdistill/qstate.h"

namespace wdistill {

enum class Variant : uint8_t { Mcm, NoMcm, SpecificParty };

/// How the measurement-free variant keeps later rounds away from branches that
/// already produced a pair. Controlled conditions every later coupling on the
/// earlier record qubits being zero (coherent feed-forward). Static applies every
/// round unconditionally, so distilled pairs keep being coupled until the end.
enum class NoMcmGating : uint8_t { Controlled, Static };

std::string to_string(Variant v);

/// Maximizer of the final success probability when `remaining_rounds` weak rounds
/// (including the current one) precede the strong measurement: 1/sqrt(D + 3).
double optimal_epsilon(int remaining_rounds);
/// The schedule 1/sqrt(D + 5) as commonly quoted; kept for comparison runs.
double published_epsilon(int remaining_rounds);

/// Coupling strengths for an N-round run. Round k (1-based) has D = N - k + 1
/// remaining rounds.
class EpsilonSchedule {
   public:
    static EpsilonSchedule optimal(int rounds);
    static EpsilonSchedule published(int rounds);
    static EpsilonSchedule uniform(int rounds, double epsilon);
    /// Entry k-1 is the strength of round k.
    static EpsilonSchedule by_round(std::vector<double> per_round);

    int rounds() const {
        return static_cast<int>(per_round_.size());
    }
    double for_round(int k) const;
    double for_remaining(int remaining) const;
    const std::vector<double> &per_round() const {
        return per_round_;
    }

   private:
    explicit EpsilonSchedule(std::vector<double> per_round);
    std::vector<double> per_round_;
};

struct ProtocolConfig {
    int rounds = 1;
    EpsilonSchedule schedule = EpsilonSchedule::optimal(1);
    size_t strong_party = 0;
    Variant variant = Variant::Mcm;
    NoMcmGating gating = NoMcmGating::Controlled;
    /// Size of each party's ancilla chain in the measurement-free variant; 0 means `rounds`.
    int ancillas_per_party = 0;

    /// N rounds with the optimal schedule.
    static ProtocolConfig optimal(int rounds);
};

enum class OutcomeClass : uint8_t { Continue, Success, Fail };

struct Classification {
    OutcomeClass kind;
    /// Party whose ancilla fired (Success only).
    size_t party = 0;

    /// The two parties holding the pair (Success only).
    std::vector<size_t> pair() const;
    bool operator==(const Classification &) const = default;
};

/// Bit i of `bits` is the ancilla of party i.
Classification classify_outcome(uint64_t bits);

struct RoundRecord {
    int round_index;
    double epsilon;
    /// Probabilities conditional on entering the round.
    double p_w;
    std::array<double, 3> p_epr_by_party;
    double p_fail;
    /// Conditional probability of each ancilla pattern (bit i = party i).
    std::array<double, 8> outcome_probabilities;
    /// Pair left when party i's ancilla fired, on (other_parties(i)) in ascending order.
    std::array<std::optional<DensityMatrix>, 3> distilled_states;
    DensityMatrix w_state_before;
    /// Party state on the all-zero branch, before any between-round noise.
    std::optional<DensityMatrix> w_state_after;

    double p_epr_total() const {
        return p_epr_by_party[0] + p_epr_by_party[1] + p_epr_by_party[2];
    }
};

struct StrongRecord {
    size_t party = 0;
    bool reached = false;
    /// Conditional on reaching the strong measurement.
    double p_epr = 0;
    std::optional<DensityMatrix> input_state;
    std::optional<DensityMatrix> distilled_state;
};

struct ProtocolResult {
    Variant variant;
    int rounds_requested;
    std::vector<RoundRecord> rounds;
    StrongRecord strong;

    /// Probability of entering round k; k = rounds_requested + 1 is the strong stage.
    double reach_probability(int k) const;
};

/// Channel applied to the continuation state after `completed_rounds` weak rounds.
using ChannelHook = std::function<DensityMatrix(const DensityMatrix &, int completed_rounds)>;

/// Exact branch enumeration of the N-round protocol with mid-circuit measurements,
/// followed by the strong measurement on the surviving W branch.
ProtocolResult run_random_party(const ProtocolConfig &config, const DensityMatrix &initial,
                                const ChannelHook &between_rounds = {});

/// Single strong measurement by `party`.
ProtocolResult run_specific_party(const DensityMatrix &initial, size_t party = 0);

/// The measurement-free variant: every round couples to the first ancilla of each
/// party's chain and cascaded CNOTs shift the chain contents one place along so the
/// first ancilla is fresh for the next round. All readout happens at the end.
ProtocolResult run_no_mcm(const ProtocolConfig &config, const DensityMatrix &initial);

/// Dispatches on config.variant.
ProtocolResult run_protocol(const ProtocolConfig &config, const DensityMatrix &initial,
                            const ChannelHook &between_rounds = {});

/// Ancilla-chain layout of the measurement-free variant.
struct AncillaChains {
    int rounds;
    int per_party;

    size_t n_qubits() const {
        return 3 + 3 * static_cast<size_t>(per_party);
    }
    size_t qubit(size_t party, int slot) const {
        return 3 + party * static_cast<size_t>(per_party) + static_cast<size_t>(slot);
    }
    /// Slot holding round j's bit once round k (k >= j) has finished.
    int record_slot(int j, int k) const {
        return k < rounds ? k - j + 1 : rounds - j;
    }
};

/// Gates of round k of the measurement-free circuit (coupling then shift).
std::vector<CircuitOp> no_mcm_round_ops(const AncillaChains &chains, int k, double epsilon, NoMcmGating gating);

}  // namespace wdistill

#endif
