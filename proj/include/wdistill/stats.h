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

#ifndef WDISTILL_STATS_H
#define WDISTILL_STATS_H

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "wdistill/noise.h"
#include "wdistill/protocol.h"
#include "wdistill/qstate.h"

namespace wdistill {

struct ShotPlan {
    uint64_t shots_per_trial = 1000;
    uint64_t trials = 5;
    uint64_t master_seed = 0;
    /// Worker threads; 0 uses the hardware concurrency. Never changes the result.
    unsigned workers = 1;

    void validate() const;
};

/// Seed of the stream used by one shot.
uint64_t shot_seed(uint64_t master_seed, uint64_t trial, uint64_t shot);

struct EstimateWithError {
    double mean = 0;
    /// Sample standard deviation across trials; empty for a single trial.
    std::optional<double> sigma;
    uint64_t trials = 0;
    /// Binomial standard error of the pooled estimate, for diagnostics.
    double binomial_sigma = 0;
    /// Exact value rather than a sampled one.
    bool analytic = false;
};

/// Ancilla readouts of one trial. rounds[k-1][o] counts shots whose recorded bits
/// were all zero before round k and read pattern o in round k.
struct TrialCounts {
    uint64_t shots = 0;
    std::vector<std::array<uint64_t, 8>> rounds;
    uint64_t strong_attempts = 0;
    uint64_t strong_successes = 0;

    /// Round k readouts as a 3-bit table (character i = party i's ancilla).
    CountsTable round_table(int k) const;
    bool operator==(const TrialCounts &) const = default;
};

struct SampleSet {
    int rounds = 0;
    std::vector<TrialCounts> trials;

    bool operator==(const SampleSet &) const = default;
};

/// Samples shots from the exact branch distribution of `exact`. Each shot draws
/// the true ancilla pattern of every round it reaches, records it through the
/// optional ancilla readout model, and stops at the first nonzero true pattern.
/// The strong measurement runs on shots whose true and recorded patterns were all zero.
SampleSet sample_protocol(const ProtocolResult &exact, const ShotPlan &plan,
                          const std::optional<ReadoutModel> &ancilla_readout = std::nullopt);

/// Runs the exact enumeration of `config` on `initial` and samples it.
SampleSet sample_protocol(const ProtocolConfig &config, const DensityMatrix &initial, const ShotPlan &plan,
                          const ChannelHook &between_rounds = {},
                          const std::optional<ReadoutModel> &ancilla_readout = std::nullopt);

struct RateEstimates {
    /// Conditional on reaching round k, index k-1.
    std::vector<EstimateWithError> p_w;
    std::vector<EstimateWithError> p_epr;
    /// Conditional on reaching the strong measurement.
    EstimateWithError p_strong;
    EstimateWithError p_success;
    /// Per-trial unconditional success-term probabilities (weak rounds then strong),
    /// averaged over trials.
    std::vector<double> term_probabilities;
};

/// Per-trial rates chained into the success probability, then mean and spread
/// across trials. With `mitigated`, each round's readouts are first corrected with
/// `readout`. Throws UndefinedEstimate for a round with no shots.
RateEstimates estimate_rate(const SampleSet &samples, bool mitigated = false,
                            const std::optional<ReadoutModel> &readout = std::nullopt);

/// Exact conditional fidelity, flagged analytic.
EstimateWithError conditioned_fidelity(const DensityMatrix &conditioned, const Statevector &target);

/// Projective test of `post_selected[t]` conditioned copies against the target in
/// each trial t; the outcome frequencies estimate the fidelity.
EstimateWithError conditioned_fidelity(const DensityMatrix &conditioned, const Statevector &target,
                                       const std::vector<uint64_t> &post_selected, uint64_t seed);

/// Mean and spread of per-trial values.
EstimateWithError summarize(const std::vector<double> &per_trial, double pooled_binomial_sigma = 0);

}  // namespace wdistill

#endif
