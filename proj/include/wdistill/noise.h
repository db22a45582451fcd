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

#ifndef WDISTILL_NOISE_H
#define WDISTILL_NOISE_H

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "wdistill/protocol.h"
#include "wdistill/qstate.h"

namespace wdistill {

/// (1 - p)|W><W| + p I/8.
DensityMatrix noisy_w(double p);
/// Fidelity to |W> of noisy_w(p).
double noisy_w_fidelity(double p);
/// Inverse of noisy_w_fidelity; fidelity must lie in [1/8, 1].
double depolarizing_weight_for_fidelity(double fidelity);

/// (1 - p) rho + p I/d.
DensityMatrix degrade_between_rounds(const DensityMatrix &state, double p);

/// Between-round channel that depolarizes the continuation state after round k by
/// the k-th entry of `weights`; rounds past the end of the list are left alone.
ChannelHook depolarizing_schedule(std::vector<double> weights);

/// Between-round channel that brings the continuation state after round k down to
/// fidelity targets[k-1] with |W>. A state already at or below its target is left alone.
ChannelHook fidelity_targets(std::vector<double> targets);

/// Targets F0 - k * drop for k = 1..rounds, floored at 1/8.
std::vector<double> linear_fidelity_ramp(double initial_fidelity, double drop_per_round, int rounds);

/// Default per-round fidelity drop: takes F = 0.97 to 0.90 after one round.
inline constexpr double kDefaultFidelityDrop = 0.07;

struct QubitReadout {
    /// True 0 read as 1.
    double p01 = 0;
    /// True 1 read as 0.
    double p10 = 0;
};

/// Independent per-qubit readout errors.
class ReadoutModel {
   public:
    ReadoutModel() = default;
    explicit ReadoutModel(std::vector<QubitReadout> qubits);
    static ReadoutModel ideal(size_t n_qubits);

    /// Plain-text document: `qubits: [{p01: .., p10: ..}, ...]`.
    static ReadoutModel load(const std::filesystem::path &path);
    static ReadoutModel parse(const std::string &text);
    std::string dump() const;

    size_t n_qubits() const {
        return qubits_.size();
    }
    const QubitReadout &qubit(size_t q) const {
        return qubits_.at(q);
    }
    /// Column-stochastic [[1-p01, p10], [p01, 1-p10]] (row = read, column = true).
    std::array<double, 4> confusion(size_t q) const;
    /// Inverse of confusion(q).
    std::array<double, 4> mitigation(size_t q) const;

   private:
    std::vector<QubitReadout> qubits_;
};

/// Outcome counts keyed by bit string; character k is qubit k. Mitigated tables
/// hold real (possibly negative) weights.
struct CountsTable {
    size_t width = 0;
    std::map<std::string, double> counts;

    double total() const;
    void add(const std::string &outcome, double weight = 1);
    /// Fraction of the total carried by each outcome.
    std::map<std::string, double> distribution() const;
};

/// Flips each bit of each shot independently; shot s (in key order) uses its own seeded stream.
CountsTable apply_readout(const ReadoutModel &model, const CountsTable &counts, uint64_t rng_seed);

/// Applies the Kronecker product of per-qubit inverse confusion matrices.
CountsTable mitigate_readout(const ReadoutModel &model, const CountsTable &counts);

/// Drops negative weights and rescales to the original total.
CountsTable clamp_and_renormalize(const CountsTable &counts);

}  // namespace wdistill

#endif
