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

#include "wdistill/protocol.h"

#include <bit>
#include <cmath>

#include "wdistill/circuit.h"
#include "wdistill/errors.h"
#include "wdistill/tolerances.h"

namespace wdistill {

namespace {

constexpr size_t kMaxNoMcmQubits = 21;

const std::vector<size_t> kAncillae{kAncillaOffset, kAncillaOffset + 1, kAncillaOffset + 2};
const std::vector<size_t> kPartyQubits{0, 1, 2};

void check_initial(const DensityMatrix &initial) {
    if (initial.n_qubits() != kNumParties) {
        throw InvalidArgument("protocol input must be a 3-qubit state");
    }
}

void check_config(const ProtocolConfig &config) {
    if (config.rounds < 1) {
        throw ConfigError("protocol needs at least one weak round");
    }
    if (config.schedule.rounds() != config.rounds) {
        throw ConfigError("epsilon schedule has " + std::to_string(config.schedule.rounds()) +
                          " entries for " + std::to_string(config.rounds) + " rounds");
    }
    if (config.strong_party >= kNumParties) {
        throw ConfigError("strong_party must be 0, 1 or 2");
    }
}

StrongRecord strong_stage(const DensityMatrix &state, size_t party) {
    StrongRecord s;
    s.party = party;
    s.reached = true;
    s.input_state = state;
    for (auto &b : strong_measure_party(state, party)) {
        if (b.outcome == 1) {
            s.p_epr = b.probability;
            s.distilled_state = partial_trace(b.post_state, other_parties(party));
        }
    }
    return s;
}

}  // namespace

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Mcm:
            return "mcm";
        case Variant::NoMcm:
            return "no-mcm";
        case Variant::SpecificParty:
            return "specific";
    }
    return "unknown";
}

double optimal_epsilon(int remaining_rounds) {
    if (remaining_rounds < 1) {
        throw InvalidArgument("optimal_epsilon: remaining rounds must be at least 1");
    }
    return 1 / std::sqrt(remaining_rounds + 3.0);
}

double published_epsilon(int remaining_rounds) {
    if (remaining_rounds < 1) {
        throw InvalidArgument("published_epsilon: remaining rounds must be at least 1");
    }
    return 1 / std::sqrt(remaining_rounds + 5.0);
}

EpsilonSchedule::EpsilonSchedule(std::vector<double> per_round) : per_round_(std::move(per_round)) {
    for (double e : per_round_) {
        if (!(e >= 0 && e <= 1)) {
            throw ConfigError("epsilon schedule entries must lie in [0, 1]");
        }
    }
}

EpsilonSchedule EpsilonSchedule::optimal(int rounds) {
    std::vector<double> v;
    for (int k = 1; k <= rounds; k++) {
        v.push_back(optimal_epsilon(rounds - k + 1));
    }
    return EpsilonSchedule(std::move(v));
}

EpsilonSchedule EpsilonSchedule::published(int rounds) {
    std::vector<double> v;
    for (int k = 1; k <= rounds; k++) {
        v.push_back(published_epsilon(rounds - k + 1));
    }
    return EpsilonSchedule(std::move(v));
}

EpsilonSchedule EpsilonSchedule::uniform(int rounds, double epsilon) {
    return EpsilonSchedule(std::vector<double>(static_cast<size_t>(std::max(rounds, 0)), epsilon));
}

EpsilonSchedule EpsilonSchedule::by_round(std::vector<double> per_round) {
    return EpsilonSchedule(std::move(per_round));
}

double EpsilonSchedule::for_round(int k) const {
    if (k < 1 || k > rounds()) {
        throw InvalidArgument("round index out of schedule range");
    }
    return per_round_[static_cast<size_t>(k - 1)];
}

double EpsilonSchedule::for_remaining(int remaining) const {
    return for_round(rounds() - remaining + 1);
}

ProtocolConfig ProtocolConfig::optimal(int rounds) {
    ProtocolConfig c;
    c.rounds = rounds;
    c.schedule = EpsilonSchedule::optimal(rounds);
    return c;
}

std::vector<size_t> Classification::pair() const {
    if (kind != OutcomeClass::Success) {
        return {};
    }
    return other_parties(party);
}

Classification classify_outcome(uint64_t bits) {
    if (bits > 7) {
        throw InvalidArgument("ancilla outcome must be a 3-bit pattern");
    }
    switch (std::popcount(bits)) {
        case 0:
            return {OutcomeClass::Continue, 0};
        case 1:
            return {OutcomeClass::Success, static_cast<size_t>(std::countr_zero(bits))};
        default:
            return {OutcomeClass::Fail, 0};
    }
}

double ProtocolResult::reach_probability(int k) const {
    double reach = 1;
    for (int j = 1; j < k; j++) {
        if (j > static_cast<int>(rounds.size())) {
            return 0;
        }
        reach *= rounds[static_cast<size_t>(j - 1)].p_w;
    }
    return reach;
}

ProtocolResult run_random_party(const ProtocolConfig &config, const DensityMatrix &initial,
                                const ChannelHook &between_rounds) {
    check_config(config);
    check_initial(initial);
    ProtocolResult result{Variant::Mcm, config.rounds, {}, {}};
    result.strong.party = config.strong_party;

    const DensityMatrix ground = DensityMatrix::from_pure(Statevector(kNumParties));
    DensityMatrix state = initial;
    for (int k = 1; k <= config.rounds; k++) {
        double eps = config.schedule.for_round(k);
        DensityMatrix coupled = couple_all(tensor(state, ground), eps);

        RoundRecord rec{k, eps, 0, {0, 0, 0}, 0, {}, {}, state, std::nullopt};
        for (auto &b : measure(coupled, kAncillae)) {
            Classification cls = classify_outcome(b.outcome);
            rec.outcome_probabilities[b.outcome] = b.probability;
            switch (cls.kind) {
                case OutcomeClass::Continue:
                    rec.p_w = b.probability;
                    rec.w_state_after = partial_trace(b.post_state, kPartyQubits);
                    break;
                case OutcomeClass::Success:
                    rec.p_epr_by_party[cls.party] = b.probability;
                    rec.distilled_states[cls.party] = partial_trace(b.post_state, cls.pair());
                    break;
                case OutcomeClass::Fail:
                    rec.p_fail += b.probability;
                    break;
            }
        }
        result.rounds.push_back(rec);
        if (!rec.w_state_after) {
            return result;
        }
        state = between_rounds ? between_rounds(*rec.w_state_after, k) : *rec.w_state_after;
    }
    result.strong = strong_stage(state, config.strong_party);
    return result;
}

ProtocolResult run_specific_party(const DensityMatrix &initial, size_t party) {
    check_initial(initial);
    if (party >= kNumParties) {
        throw InvalidArgument("party must be 0, 1 or 2");
    }
    ProtocolResult result{Variant::SpecificParty, 0, {}, {}};
    result.strong = strong_stage(initial, party);
    return result;
}

std::vector<CircuitOp> no_mcm_round_ops(const AncillaChains &chains, int k, double epsilon, NoMcmGating gating) {
    std::vector<CircuitOp> ops;
    double theta = theta_from_epsilon(epsilon);
    for (size_t p = 0; p < kNumParties; p++) {
        CircuitOp op = cry(p, chains.qubit(p, 0), theta);
        if (gating == NoMcmGating::Controlled) {
            // Records of rounds 1..k-1 sit in slots 1..k-1 after the previous shift.
            for (size_t q = 0; q < kNumParties; q++) {
                for (int slot = 1; slot < k; slot++) {
                    op.anti_controls.push_back(chains.qubit(q, slot));
                }
            }
        }
        ops.push_back(std::move(op));
    }
    if (k < chains.rounds) {
        // Move slot j to slot j+1 for j = k-1 .. 0; slot j+1 is empty when it is written.
        for (size_t p = 0; p < kNumParties; p++) {
            for (int slot = k - 1; slot >= 0; slot--) {
                size_t from = chains.qubit(p, slot);
                size_t to = chains.qubit(p, slot + 1);
                ops.push_back(cnot(from, to));
                ops.push_back(cnot(to, from));
            }
        }
    }
    return ops;
}

namespace {

// Per-basis-index decoding of the record register after round `k`.
struct RecordDecoder {
    const AncillaChains &chains;
    int k;

    uint64_t bits(size_t index, int j) const {
        int slot = chains.record_slot(j, k);
        uint64_t b = 0;
        for (size_t p = 0; p < kNumParties; p++) {
            b |= uint64_t((index >> chains.qubit(p, slot)) & 1) << p;
        }
        return b;
    }

    /// First round with a nonzero record, or 0 if none.
    int first_fired(size_t index) const {
        for (int j = 1; j <= k; j++) {
            if (bits(index, j) != 0) {
                return j;
            }
        }
        return 0;
    }
};

struct Component {
    double weight;
    Statevector psi;
};

Statevector project(const Statevector &psi, const std::function<bool(size_t)> &keep) {
    Statevector out = psi;
    for (size_t i = 0; i < out.dim(); i++) {
        if (!keep(i)) {
            out[i] = 0;
        }
    }
    return out;
}

// Sum over components of weight * Tr_rest(P psi psi^dagger P); the trace is the probability.
std::optional<Matrix> reduced_mixture(const std::vector<Component> &components,
                                      const std::function<bool(size_t)> &keep,
                                      const std::vector<size_t> &qubits) {
    std::optional<Matrix> acc;
    for (const auto &c : components) {
        Statevector v = project(c.psi, keep);
        if (v.norm_squared() <= 0) {
            continue;
        }
        Matrix m = partial_trace(v, qubits).matrix();
        m *= c.weight;
        if (acc) {
            *acc += m;
        } else {
            acc = std::move(m);
        }
    }
    return acc;
}

}  // namespace

ProtocolResult run_no_mcm(const ProtocolConfig &config, const DensityMatrix &initial) {
    check_config(config);
    check_initial(initial);
    AncillaChains chains{config.rounds, config.ancillas_per_party ? config.ancillas_per_party : config.rounds};
    if (chains.per_party < config.rounds) {
        throw ConfigError("measurement-free variant needs at least one ancilla per party per round");
    }
    if (chains.n_qubits() > kMaxNoMcmQubits) {
        throw ConfigError("measurement-free register of " + std::to_string(chains.n_qubits()) +
                          " qubits exceeds the supported " + std::to_string(kMaxNoMcmQubits));
    }

    // Pure-state ensemble of the input, each component padded with empty chains.
    std::vector<Component> components;
    auto eig = hermitian_eigen(initial.matrix());
    const Statevector empty_chains(chains.n_qubits() - kNumParties);
    for (size_t j = 0; j < eig.values.size(); j++) {
        if (eig.values[j] <= tol::kPruneProbability) {
            continue;
        }
        std::vector<Complex> v(initial.dim());
        for (size_t r = 0; r < v.size(); r++) {
            v[r] = eig.vectors(r, j);
        }
        components.push_back({eig.values[j], tensor(Statevector::from_amplitudes(std::move(v)), empty_chains)});
    }

    ProtocolResult result{Variant::NoMcm, config.rounds, {}, {}};
    result.strong.party = config.strong_party;

    DensityMatrix entering = initial;
    for (int k = 1; k <= config.rounds; k++) {
        double eps = config.schedule.for_round(k);
        for (const auto &op : no_mcm_round_ops(chains, k, eps, config.gating)) {
            for (auto &c : components) {
                c.psi = apply(op, c.psi);
            }
        }
        RecordDecoder dec{chains, k};
        std::array<double, 8> joint{};
        double reach = 0;
        for (const auto &c : components) {
            for (size_t i = 0; i < c.psi.dim(); i++) {
                double w = c.weight * std::norm(c.psi[i]);
                if (w == 0) {
                    continue;
                }
                int fired = dec.first_fired(i);
                if (fired == 0 || fired == k) {
                    reach += w;
                    joint[dec.bits(i, k)] += w;
                }
            }
        }
        RoundRecord rec{k, eps, 0, {0, 0, 0}, 0, {}, {}, entering, std::nullopt};
        if (!(reach > tol::kPruneProbability)) {
            break;
        }
        for (uint64_t o = 0; o < 8; o++) {
            double p = joint[o] / reach;
            rec.outcome_probabilities[o] = p;
            Classification cls = classify_outcome(o);
            if (cls.kind == OutcomeClass::Continue) {
                rec.p_w = p;
            } else if (cls.kind == OutcomeClass::Success) {
                rec.p_epr_by_party[cls.party] = p;
            } else {
                rec.p_fail += p;
            }
        }
        if (rec.p_w > tol::kPruneProbability) {
            auto m = reduced_mixture(components, [&](size_t i) { return dec.first_fired(i) == 0; }, kPartyQubits);
            rec.w_state_after = DensityMatrix(std::move(*m)).normalized();
            entering = *rec.w_state_after;
        }
        result.rounds.push_back(rec);
        if (!rec.w_state_after) {
            break;
        }
    }

    // Deferred readout of every record at the end of the circuit.
    RecordDecoder final_dec{chains, config.rounds};
    for (auto &rec : result.rounds) {
        int k = rec.round_index;
        for (size_t p = 0; p < kNumParties; p++) {
            if (rec.p_epr_by_party[p] <= tol::kPruneProbability) {
                continue;
            }
            uint64_t want = uint64_t{1} << p;
            auto m = reduced_mixture(
                components,
                [&](size_t i) { return final_dec.first_fired(i) == k && final_dec.bits(i, k) == want; },
                other_parties(p));
            if (m) {
                rec.distilled_states[p] = DensityMatrix(std::move(*m)).normalized();
            }
        }
    }
    if (static_cast<int>(result.rounds.size()) == config.rounds && result.rounds.back().w_state_after) {
        // Strong measurement on the all-zero record branch.
        auto survivors = [&](size_t i) { return final_dec.first_fired(i) == 0; };
        auto all = reduced_mixture(components, survivors, kPartyQubits);
        result.strong = strong_stage(DensityMatrix(std::move(*all)).normalized(), config.strong_party);
        std::vector<size_t> pair_and_strong = other_parties(config.strong_party);
        auto m = reduced_mixture(
            components,
            [&](size_t i) { return survivors(i) && ((i >> config.strong_party) & 1); },
            pair_and_strong);
        if (m) {
            result.strong.distilled_state = DensityMatrix(std::move(*m)).normalized();
        }
    }
    return result;
}

ProtocolResult run_protocol(const ProtocolConfig &config, const DensityMatrix &initial,
                            const ChannelHook &between_rounds) {
    switch (config.variant) {
        case Variant::Mcm:
            return run_random_party(config, initial, between_rounds);
        case Variant::NoMcm:
            if (between_rounds) {
                throw ConfigError("the measurement-free variant does not support between-round noise");
            }
            return run_no_mcm(config, initial);
        case Variant::SpecificParty:
            return run_specific_party(initial, config.strong_party);
    }
    throw ConfigError("unknown variant");
}

}  // namespace wdistill
