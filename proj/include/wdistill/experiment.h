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

#ifndef WDISTILL_EXPERIMENT_H
#define WDISTILL_EXPERIMENT_H

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wdistill/measures.h"
#include "wdistill/noise.h"
#include "wdistill/protocol.h"

namespace wdistill {

inline constexpr const char *kVersion = "0.1.0";

enum class RunMode : uint8_t { Exact, MonteCarlo };
enum class ScheduleKind : uint8_t { Optimal, Published, Explicit };
enum class SweepAxis : uint8_t { Rounds, Epsilon, InitialFidelity, RoundFidelity };

struct NoiseConfig {
    double initial_fidelity = 1;
    /// Explicit W fidelity after each round; otherwise a linear ramp.
    std::vector<double> round_fidelity;
    double fidelity_drop = kDefaultFidelityDrop;
};

struct SweepConfig {
    SweepAxis axis = SweepAxis::Rounds;
    std::vector<double> values;
};

struct RunConfig {
    Variant variant = Variant::Mcm;
    int rounds = 1;
    ScheduleKind schedule = ScheduleKind::Optimal;
    std::vector<double> explicit_schedule;
    size_t strong_party = 0;
    NoMcmGating gating = NoMcmGating::Controlled;
    std::optional<NoiseConfig> noise;
    std::optional<std::filesystem::path> readout;
    RunMode mode = RunMode::Exact;
    uint64_t shots = 10000;
    uint64_t trials = 5;
    uint64_t seed = 0;
    unsigned workers = 1;
    EofMeasure eof_measure = EofMeasure::Wootters;
    bool mitigated = false;
    std::optional<SweepConfig> sweep;
    std::optional<std::filesystem::path> counts;

    /// Throws ConfigError on inconsistent settings.
    void validate() const;
    ProtocolConfig protocol(int rounds) const;
    DensityMatrix initial_state() const;
    ChannelHook channel(int rounds) const;
    std::string schedule_name() const;
};

/// Relative paths inside the document resolve against `base_dir`.
RunConfig parse_run_config(const std::string &text, const std::filesystem::path &base_dir = ".");
RunConfig load_run_config(const std::filesystem::path &path);

/// Fixed 12-significant-digit formatting used by every CSV.
std::string format_number(double x);

/// success.csv, fidelity.csv, entanglement.csv and manifest.yaml.
void cmd_run(const RunConfig &config, const std::filesystem::path &out_dir);
/// sweep.csv and manifest.yaml.
void cmd_sweep(const RunConfig &config, const std::filesystem::path &out_dir);
/// mitigated.csv and manifest.yaml from config.counts and config.readout.
void cmd_mitigate(const RunConfig &config, const std::filesystem::path &out_dir);
/// Plain-text summary of the CSVs in `out_dir`.
void cmd_report(const std::filesystem::path &out_dir, std::ostream &out);

/// Outcome counts from a two-column CSV (outcome,count) with a header row.
CountsTable read_counts_csv(const std::filesystem::path &path);

}  // namespace wdistill

#endif
