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

#include "wdistill/experiment.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "wdistill/circuit.h"
#include "wdistill/errors.h"
#include "wdistill/rng.h"
#include "wdistill/stats.h"

namespace wdistill {

namespace {

const std::set<std::string> kTopKeys{"variant",  "rounds",      "epsilon_schedule", "strong_party", "gating",
                                     "noise",    "readout",     "mode",             "shots",        "trials",
                                     "seed",     "workers",     "eof_measure",      "mitigated",    "sweep",
                                     "counts"};

template <class T>
T scalar(const YAML::Node &node, const std::string &key) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception &) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

std::vector<double> number_list(const YAML::Node &node, const std::string &key) {
    if (!node.IsSequence()) {
        throw ConfigError("config key '" + key + "' must be a list of numbers");
    }
    std::vector<double> out;
    for (const auto &v : node) {
        out.push_back(scalar<double>(v, key));
    }
    return out;
}

std::vector<double> sweep_values(const YAML::Node &node) {
    if (node.IsSequence()) {
        return number_list(node, "sweep.values");
    }
    if (!node.IsMap()) {
        throw ConfigError("sweep.values must be a list or {start, stop, step}");
    }
    double start = scalar<double>(node["start"], "sweep.values.start");
    double stop = scalar<double>(node["stop"], "sweep.values.stop");
    double step = scalar<double>(node["step"], "sweep.values.step");
    if (!(step > 0) || stop < start) {
        throw ConfigError("sweep range needs step > 0 and stop >= start");
    }
    std::vector<double> out;
    // Index-based grid so that the endpoint survives rounding.
    auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= count; i++) {
        out.push_back(start + static_cast<double>(i) * step);
    }
    return out;
}

SweepAxis parse_axis(const std::string &s) {
    if (s == "rounds") return SweepAxis::Rounds;
    if (s == "epsilon") return SweepAxis::Epsilon;
    if (s == "initial_fidelity") return SweepAxis::InitialFidelity;
    if (s == "round_fidelity") return SweepAxis::RoundFidelity;
    throw ConfigError("unknown sweep axis '" + s + "'");
}

std::string axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::Rounds:
            return "rounds";
        case SweepAxis::Epsilon:
            return "epsilon";
        case SweepAxis::InitialFidelity:
            return "initial_fidelity";
        case SweepAxis::RoundFidelity:
            return "round_fidelity";
    }
    return "unknown";
}

std::string gating_name(NoMcmGating g) {
    return g == NoMcmGating::Controlled ? "controlled" : "static";
}

std::string measure_name(EofMeasure m) {
    return m == EofMeasure::Wootters ? "wootters" : "bennett";
}

std::ofstream open_out(const std::filesystem::path &dir, const std::string &name) {
    std::filesystem::create_directories(dir);
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) {
        throw ConfigError("cannot write " + (dir / name).string());
    }
    return f;
}

void write_row(std::ostream &out, const std::vector<std::string> &fields) {
    for (size_t i = 0; i < fields.size(); i++) {
        out << (i ? "," : "") << fields[i];
    }
    out << '\n';
}

std::string sigma_field(const std::optional<double> &sigma) {
    return sigma ? format_number(*sigma) : "";
}

std::optional<ReadoutModel> ancilla_readout(const RunConfig &config) {
    if (!config.readout) {
        return std::nullopt;
    }
    ReadoutModel m = ReadoutModel::load(*config.readout);
    if (m.n_qubits() != 3) {
        throw ConfigError("readout model for a protocol run must describe the three ancillae");
    }
    return m;
}

ShotPlan plan_of(const RunConfig &config) {
    return ShotPlan{config.shots, config.trials, config.seed, config.workers};
}

// Probability-weighted average over the three parties of a per-pair quantity.
struct PairAverage {
    double pair_fidelity = 0;
    double eof_lower_bound = 0;
    double eof = 0;
    double weight = 0;

    void add(double p, const DensityMatrix &rho) {
        if (!(p > 0)) {
            return;
        }
        auto r = analyze_pair(rho);
        pair_fidelity += p * r.pair_fidelity;
        eof_lower_bound += p * r.eof_lower_bound;
        eof += p * r.eof;
        weight += p;
    }
    void finish() {
        if (weight > 0) {
            pair_fidelity /= weight;
            eof_lower_bound /= weight;
            eof /= weight;
        }
    }
};

struct PointResult {
    double p_success;
    std::optional<double> sigma;
    double expected_entanglement;
    ProtocolResult exact;
    std::optional<SampleSet> samples;
};

PointResult evaluate(const RunConfig &config, int rounds) {
    ProtocolConfig pc = config.protocol(rounds);
    ProtocolResult exact = run_protocol(pc, config.initial_state(), config.channel(rounds));
    BranchEof eof = branch_eof(exact, config.eof_measure);
    if (config.mode == RunMode::Exact) {
        return {success_probability(exact), 0.0, expected_entanglement(exact, eof), std::move(exact), std::nullopt};
    }
    auto readout = ancilla_readout(config);
    SampleSet samples = sample_protocol(exact, plan_of(config), readout);
    RateEstimates rates = estimate_rate(samples, config.mitigated, readout);
    double e = 0;
    for (size_t k = 0; k < exact.rounds.size(); k++) {
        const auto &r = exact.rounds[k];
        double branch = 0;
        if (r.p_epr_total() > 0) {
            for (size_t i = 0; i < 3; i++) {
                branch += r.p_epr_by_party[i] * eof.weak[k][i];
            }
            branch /= r.p_epr_total();
        }
        e += rates.term_probabilities[k] * branch;
    }
    e += rates.term_probabilities.back() * eof.strong;
    return {rates.p_success.mean, rates.p_success.sigma, e, std::move(exact), std::move(samples)};
}

std::vector<uint64_t> per_trial(const SampleSet &s, const std::function<uint64_t(const TrialCounts &)> &f) {
    std::vector<uint64_t> out;
    for (const auto &t : s.trials) {
        out.push_back(f(t));
    }
    return out;
}

std::optional<double> sampled_sigma(const DensityMatrix &state, const Statevector &target,
                                    const std::vector<uint64_t> &counts, uint64_t seed) {
    try {
        return conditioned_fidelity(state, target, counts, seed).sigma;
    } catch (const UndefinedEstimate &) {
        return std::nullopt;
    }
}

void write_manifest(const RunConfig &config, const std::string &command, const std::filesystem::path &out_dir,
                    const std::vector<std::pair<int, std::vector<double>>> &schedules) {
    YAML::Emitter y;
    y << YAML::BeginMap;
    y << YAML::Key << "tool" << YAML::Value << "wdistill";
    y << YAML::Key << "version" << YAML::Value << kVersion;
    y << YAML::Key << "command" << YAML::Value << command;
    y << YAML::Key << "variant" << YAML::Value << to_string(config.variant);
    y << YAML::Key << "rounds" << YAML::Value << config.rounds;
    y << YAML::Key << "schedule" << YAML::Value << config.schedule_name();
    y << YAML::Key << "strong_party" << YAML::Value << config.strong_party;
    y << YAML::Key << "gating" << YAML::Value << gating_name(config.gating);
    y << YAML::Key << "mode" << YAML::Value << (config.mode == RunMode::Exact ? "exact" : "mc");
    y << YAML::Key << "seed" << YAML::Value << config.seed;
    y << YAML::Key << "shots" << YAML::Value << config.shots;
    y << YAML::Key << "trials" << YAML::Value << config.trials;
    y << YAML::Key << "eof_measure" << YAML::Value << measure_name(config.eof_measure);
    y << YAML::Key << "mitigated" << YAML::Value << config.mitigated;
    if (config.noise) {
        y << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
        y << YAML::Key << "initial_fidelity" << YAML::Value << format_number(config.noise->initial_fidelity);
        if (config.noise->round_fidelity.empty()) {
            y << YAML::Key << "fidelity_drop" << YAML::Value << format_number(config.noise->fidelity_drop);
        } else {
            y << YAML::Key << "round_fidelity" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (double f : config.noise->round_fidelity) {
                y << format_number(f);
            }
            y << YAML::EndSeq;
        }
        y << YAML::EndMap;
    }
    if (config.readout) {
        y << YAML::Key << "readout" << YAML::Value << config.readout->string();
    }
    if (!schedules.empty()) {
        y << YAML::Key << "resolved_schedules" << YAML::Value << YAML::BeginSeq;
        for (const auto &[n, eps] : schedules) {
            y << YAML::Flow << YAML::BeginMap << YAML::Key << "rounds" << YAML::Value << n << YAML::Key << "epsilon"
              << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (double e : eps) {
                y << format_number(e);
            }
            y << YAML::EndSeq << YAML::EndMap;
        }
        y << YAML::EndSeq;
    }
    y << YAML::EndMap;
    auto f = open_out(out_dir, "manifest.yaml");
    f << y.c_str() << '\n';
}

std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read " + path.string());
    }
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            rows.push_back(split_csv(line));
        }
    }
    return rows;
}

}  // namespace

std::string format_number(double x) {
    if (x == 0) {
        return "0";  // no "-0"
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

void RunConfig::validate() const {
    if (variant != Variant::SpecificParty && rounds < 1) {
        throw ConfigError("rounds must be at least 1");
    }
    if (schedule == ScheduleKind::Explicit && static_cast<int>(explicit_schedule.size()) != rounds) {
        throw ConfigError("explicit epsilon schedule has " + std::to_string(explicit_schedule.size()) +
                          " entries for " + std::to_string(rounds) + " rounds");
    }
    for (double e : explicit_schedule) {
        if (!(e >= 0 && e <= 1)) {
            throw ConfigError("epsilon values must lie in [0, 1]");
        }
    }
    if (strong_party > 2) {
        throw ConfigError("strong_party must be 0, 1 or 2");
    }
    if (noise) {
        if (!(noise->initial_fidelity >= 0.125 && noise->initial_fidelity <= 1)) {
            throw ConfigError("noise.initial_fidelity must lie in [1/8, 1]");
        }
        for (double f : noise->round_fidelity) {
            if (!(f >= 0.125 && f <= 1)) {
                throw ConfigError("noise.round_fidelity entries must lie in [1/8, 1]");
            }
        }
        if (!noise->round_fidelity.empty() && static_cast<int>(noise->round_fidelity.size()) < rounds) {
            throw ConfigError("noise.round_fidelity needs one entry per round");
        }
        if (!(noise->fidelity_drop >= 0 && noise->fidelity_drop <= 1)) {
            throw ConfigError("noise.fidelity_drop must lie in [0, 1]");
        }
        if (variant == Variant::NoMcm && (!noise->round_fidelity.empty() || noise->fidelity_drop > 0)) {
            throw ConfigError("the no-mcm variant supports a noisy input only; set fidelity_drop: 0");
        }
    }
    if (shots < 1 || trials < 1) {
        throw ConfigError("shots and trials must be at least 1");
    }
    if (mitigated && (!readout || mode != RunMode::MonteCarlo)) {
        throw ConfigError("mitigated estimates need mode mc and a readout model");
    }
}

ProtocolConfig RunConfig::protocol(int n) const {
    ProtocolConfig pc;
    pc.variant = variant;
    pc.strong_party = strong_party;
    pc.gating = gating;
    if (variant == Variant::SpecificParty) {
        pc.rounds = 0;
        return pc;
    }
    pc.rounds = n;
    switch (schedule) {
        case ScheduleKind::Optimal:
            pc.schedule = EpsilonSchedule::optimal(n);
            break;
        case ScheduleKind::Published:
            pc.schedule = EpsilonSchedule::published(n);
            break;
        case ScheduleKind::Explicit:
            if (n != rounds) {
                throw ConfigError("an explicit schedule fixes the number of rounds");
            }
            pc.schedule = EpsilonSchedule::by_round(explicit_schedule);
            break;
    }
    return pc;
}

DensityMatrix RunConfig::initial_state() const {
    double f = noise ? noise->initial_fidelity : 1.0;
    return noisy_w(depolarizing_weight_for_fidelity(f));
}

ChannelHook RunConfig::channel(int n) const {
    if (!noise) {
        return {};
    }
    if (!noise->round_fidelity.empty()) {
        return fidelity_targets(noise->round_fidelity);
    }
    if (noise->fidelity_drop == 0) {
        return {};
    }
    return fidelity_targets(linear_fidelity_ramp(noise->initial_fidelity, noise->fidelity_drop, n));
}

std::string RunConfig::schedule_name() const {
    switch (schedule) {
        case ScheduleKind::Optimal:
            return "optimal";
        case ScheduleKind::Published:
            return "published";
        case ScheduleKind::Explicit:
            return "explicit";
    }
    return "unknown";
}

RunConfig parse_run_config(const std::string &text, const std::filesystem::path &base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception &e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    RunConfig c;
    if (root.IsNull()) {
        c.validate();
        return c;
    }
    if (!root.IsMap()) {
        throw ConfigError("config must be a key-value document");
    }
    for (const auto &kv : root) {
        auto key = kv.first.as<std::string>();
        if (!kTopKeys.count(key)) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    try {
        if (auto v = root["variant"]) {
            auto s = scalar<std::string>(v, "variant");
            if (s == "mcm") {
                c.variant = Variant::Mcm;
            } else if (s == "no-mcm") {
                c.variant = Variant::NoMcm;
            } else if (s == "specific") {
                c.variant = Variant::SpecificParty;
            } else {
                throw ConfigError("unknown variant '" + s + "'");
            }
        }
        if (auto v = root["rounds"]) c.rounds = scalar<int>(v, "rounds");
        if (auto v = root["epsilon_schedule"]) {
            if (v.IsSequence()) {
                c.schedule = ScheduleKind::Explicit;
                c.explicit_schedule = number_list(v, "epsilon_schedule");
            } else {
                auto s = scalar<std::string>(v, "epsilon_schedule");
                if (s == "optimal") {
                    c.schedule = ScheduleKind::Optimal;
                } else if (s == "published") {
                    c.schedule = ScheduleKind::Published;
                } else {
                    throw ConfigError("epsilon_schedule must be optimal, published or a list");
                }
            }
        }
        if (auto v = root["strong_party"]) c.strong_party = scalar<size_t>(v, "strong_party");
        if (auto v = root["gating"]) {
            auto s = scalar<std::string>(v, "gating");
            if (s == "controlled") {
                c.gating = NoMcmGating::Controlled;
            } else if (s == "static") {
                c.gating = NoMcmGating::Static;
            } else {
                throw ConfigError("gating must be controlled or static");
            }
        }
        if (auto v = root["noise"]) {
            if (!v.IsMap()) {
                throw ConfigError("noise must be a map");
            }
            NoiseConfig n;
            for (const auto &kv : v) {
                auto key = kv.first.as<std::string>();
                if (key != "initial_fidelity" && key != "round_fidelity" && key != "fidelity_drop") {
                    throw ConfigError("unknown noise key '" + key + "'");
                }
            }
            if (auto f = v["initial_fidelity"]) n.initial_fidelity = scalar<double>(f, "noise.initial_fidelity");
            if (auto f = v["round_fidelity"]) n.round_fidelity = number_list(f, "noise.round_fidelity");
            if (auto f = v["fidelity_drop"]) n.fidelity_drop = scalar<double>(f, "noise.fidelity_drop");
            c.noise = n;
        }
        if (auto v = root["readout"]) c.readout = base_dir / scalar<std::string>(v, "readout");
        if (auto v = root["counts"]) c.counts = base_dir / scalar<std::string>(v, "counts");
        if (auto v = root["mode"]) {
            auto s = scalar<std::string>(v, "mode");
            if (s == "exact") {
                c.mode = RunMode::Exact;
            } else if (s == "mc" || s == "montecarlo") {
                c.mode = RunMode::MonteCarlo;
            } else {
                throw ConfigError("mode must be exact or mc");
            }
        }
        if (auto v = root["shots"]) c.shots = scalar<uint64_t>(v, "shots");
        if (auto v = root["trials"]) c.trials = scalar<uint64_t>(v, "trials");
        if (auto v = root["seed"]) c.seed = scalar<uint64_t>(v, "seed");
        if (auto v = root["workers"]) c.workers = scalar<unsigned>(v, "workers");
        if (auto v = root["mitigated"]) c.mitigated = scalar<bool>(v, "mitigated");
        if (auto v = root["eof_measure"]) {
            auto s = scalar<std::string>(v, "eof_measure");
            if (s == "wootters") {
                c.eof_measure = EofMeasure::Wootters;
            } else if (s == "bennett") {
                c.eof_measure = EofMeasure::BennettBound;
            } else {
                throw ConfigError("eof_measure must be wootters or bennett");
            }
        }
        if (auto v = root["sweep"]) {
            if (!v.IsMap() || !v["axis"] || !v["values"]) {
                throw ConfigError("sweep needs axis and values");
            }
            c.sweep = SweepConfig{parse_axis(scalar<std::string>(v["axis"], "sweep.axis")), sweep_values(v["values"])};
        }
    } catch (const YAML::Exception &e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.parent_path());
}

void cmd_run(const RunConfig &config, const std::filesystem::path &out_dir) {
    config.validate();
    const Statevector w = prepare_w();
    const bool specific = config.variant == Variant::SpecificParty;
    const bool explicit_schedule = config.schedule == ScheduleKind::Explicit;
    const int first = specific ? 0 : (explicit_schedule ? config.rounds : 1);
    const int last = specific ? 0 : config.rounds;

    std::vector<std::pair<int, std::vector<double>>> schedules;
    std::optional<PointResult> full;
    {
        auto f = open_out(out_dir, "success.csv");
        write_row(f, {"rounds", "p_success", "sigma", "expected_entanglement", "mitigated_flag"});
        for (int n = first; n <= last; n++) {
            PointResult p = evaluate(config, n);
            write_row(f, {std::to_string(n), format_number(p.p_success), sigma_field(p.sigma),
                          format_number(p.expected_entanglement), config.mitigated ? "1" : "0"});
            schedules.emplace_back(n, config.protocol(n).schedule.per_round());
            if (specific) {
                schedules.back().second.clear();
            }
            if (n == last) {
                full = std::move(p);
            }
        }
    }
    const ProtocolResult &exact = full->exact;
    const std::optional<SampleSet> &samples = full->samples;
    auto seed_for = [&](uint64_t tag) { return stream_seed(config.seed, 0xf1de1171ULL, tag); };

    {
        auto f = open_out(out_dir, "fidelity.csv");
        write_row(f, {"round", "w_fidelity", "sigma"});
        std::vector<std::pair<int, DensityMatrix>> states{{0, config.initial_state()}};
        for (size_t k = 0; k < exact.rounds.size(); k++) {
            if (k + 1 < exact.rounds.size()) {
                states.emplace_back(static_cast<int>(k + 1), exact.rounds[k + 1].w_state_before);
            } else if (exact.strong.input_state) {
                states.emplace_back(static_cast<int>(k + 1), *exact.strong.input_state);
            } else if (exact.rounds[k].w_state_after) {
                states.emplace_back(static_cast<int>(k + 1), *exact.rounds[k].w_state_after);
            }
        }
        for (const auto &[k, state] : states) {
            std::optional<double> sigma = 0.0;
            if (samples) {
                auto counts = per_trial(*samples, [k = k](const TrialCounts &t) {
                    return k == 0 ? t.shots : t.rounds[static_cast<size_t>(k - 1)][0];
                });
                sigma = sampled_sigma(state, w, counts, seed_for(static_cast<uint64_t>(k)));
            }
            write_row(f, {std::to_string(k), format_number(fidelity(state, w)), sigma_field(sigma)});
        }
    }

    {
        auto f = open_out(out_dir, "entanglement.csv");
        write_row(f, {"round", "stage", "pair_fidelity", "eof_lower_bound", "eof", "sigma"});
        const Statevector target = psi_plus();
        for (size_t k = 0; k < exact.rounds.size(); k++) {
            const auto &r = exact.rounds[k];
            PairAverage avg;
            std::optional<DensityMatrix> representative;
            for (size_t i = 0; i < 3; i++) {
                if (r.distilled_states[i]) {
                    avg.add(r.p_epr_by_party[i], *r.distilled_states[i]);
                    representative = representative ? representative : r.distilled_states[i];
                }
            }
            if (avg.weight <= 0) {
                continue;
            }
            avg.finish();
            std::optional<double> sigma = 0.0;
            if (samples) {
                auto counts = per_trial(*samples, [k](const TrialCounts &t) {
                    return t.rounds[k][1] + t.rounds[k][2] + t.rounds[k][4];
                });
                sigma = sampled_sigma(*representative, target, counts, seed_for(0x100 + k));
            }
            write_row(f, {std::to_string(k + 1), "weak", format_number(avg.pair_fidelity),
                          format_number(avg.eof_lower_bound), format_number(avg.eof), sigma_field(sigma)});
        }
        if (exact.strong.distilled_state) {
            auto r = analyze_pair(*exact.strong.distilled_state);
            std::optional<double> sigma = 0.0;
            if (samples) {
                auto counts = per_trial(*samples, [](const TrialCounts &t) { return t.strong_successes; });
                sigma = sampled_sigma(*exact.strong.distilled_state, target, counts, seed_for(0x200));
            }
            write_row(f, {std::to_string(exact.rounds_requested), "strong", format_number(r.pair_fidelity),
                          format_number(r.eof_lower_bound), format_number(r.eof), sigma_field(sigma)});
        }
    }
    write_manifest(config, "run", out_dir, schedules);
}

void cmd_sweep(const RunConfig &config, const std::filesystem::path &out_dir) {
    config.validate();
    if (!config.sweep) {
        throw ConfigError("sweep command needs a sweep section");
    }
    const SweepConfig &sweep = *config.sweep;
    if (sweep.values.empty()) {
        throw ConfigError("sweep has no values");
    }
    auto f = open_out(out_dir, "sweep.csv");
    write_row(f, {axis_name(sweep.axis), "p_success", "sigma", "expected_entanglement_random",
                  "expected_entanglement_specific"});
    std::vector<std::pair<int, std::vector<double>>> schedules;
    for (double v : sweep.values) {
        RunConfig point = config;
        point.sweep.reset();
        switch (sweep.axis) {
            case SweepAxis::Rounds:
                if (config.schedule == ScheduleKind::Explicit) {
                    throw ConfigError("a rounds sweep needs the optimal or published schedule");
                }
                if (v < 1 || v != std::floor(v)) {
                    throw ConfigError("rounds sweep values must be positive integers");
                }
                point.rounds = static_cast<int>(v);
                if (point.noise && !point.noise->round_fidelity.empty()) {
                    throw ConfigError("a rounds sweep needs a fidelity_drop law, not explicit round fidelities");
                }
                break;
            case SweepAxis::Epsilon:
                point.schedule = ScheduleKind::Explicit;
                point.explicit_schedule.assign(static_cast<size_t>(point.rounds), v);
                break;
            case SweepAxis::InitialFidelity:
                if (!point.noise) {
                    point.noise = NoiseConfig{};
                }
                point.noise->initial_fidelity = v;
                break;
            case SweepAxis::RoundFidelity:
                if (!point.noise) {
                    point.noise = NoiseConfig{};
                }
                point.noise->round_fidelity.assign(static_cast<size_t>(point.rounds), v);
                break;
        }
        point.validate();
        PointResult p = evaluate(point, point.variant == Variant::SpecificParty ? 0 : point.rounds);
        ProtocolResult spec = run_specific_party(point.initial_state(), point.strong_party);
        double e_spec = expected_entanglement(spec, branch_eof(spec, point.eof_measure));
        write_row(f, {format_number(v), format_number(p.p_success), sigma_field(p.sigma),
                      format_number(p.expected_entanglement), format_number(e_spec)});
    }
    write_manifest(config, "sweep", out_dir, schedules);
}

CountsTable read_counts_csv(const std::filesystem::path &path) {
    auto rows = read_csv(path);
    if (rows.empty()) {
        throw ConfigError("counts file " + path.string() + " is empty");
    }
    CountsTable t;
    for (size_t i = 1; i < rows.size(); i++) {
        if (rows[i].size() < 2) {
            throw ConfigError("counts row " + std::to_string(i) + " needs outcome,count");
        }
        const std::string &outcome = rows[i][0];
        if (outcome.empty() || outcome.find_first_not_of("01") != std::string::npos) {
            throw ConfigError("counts row " + std::to_string(i) + " has outcome '" + outcome + "', not a bit string");
        }
        if (t.width == 0) {
            t.width = outcome.size();
        }
        double n;
        try {
            size_t used = 0;
            n = std::stod(rows[i][1], &used);
            if (used != rows[i][1].size()) {
                throw std::invalid_argument("trailing text");
            }
        } catch (const std::exception &) {
            throw ConfigError("counts row " + std::to_string(i) + " has a malformed count");
        }
        if (!(n >= 0) || !std::isfinite(n)) {
            throw ConfigError("counts row " + std::to_string(i) + " has a negative count");
        }
        try {
            t.add(outcome, n);
        } catch (const InvalidArgument &e) {
            throw ConfigError(e.what());
        }
    }
    return t;
}

void cmd_mitigate(const RunConfig &config, const std::filesystem::path &out_dir) {
    if (!config.counts || !config.readout) {
        throw ConfigError("mitigate needs a counts file and a readout model");
    }
    CountsTable raw = read_counts_csv(*config.counts);
    if (!(raw.total() > 0)) {
        throw UndefinedEstimate("counts file " + config.counts->string() + " holds no shots");
    }
    ReadoutModel model = ReadoutModel::load(*config.readout);
    if (model.n_qubits() != raw.width) {
        throw ConfigError("readout model width " + std::to_string(model.n_qubits()) + " does not match counts width " +
                          std::to_string(raw.width));
    }
    CountsTable mitigated = mitigate_readout(model, raw);
    CountsTable clamped = clamp_and_renormalize(mitigated);
    std::set<std::string> keys;
    for (const auto *t : {&raw, &mitigated}) {
        for (const auto &[k, v] : t->counts) {
            keys.insert(k);
        }
    }
    auto get = [](const CountsTable &t, const std::string &k) {
        auto it = t.counts.find(k);
        return it == t.counts.end() ? 0.0 : it->second;
    };
    auto f = open_out(out_dir, "mitigated.csv");
    write_row(f, {"outcome", "raw_count", "mitigated", "clamped"});
    for (const auto &k : keys) {
        write_row(f, {k, format_number(get(raw, k)), format_number(get(mitigated, k)), format_number(get(clamped, k))});
    }
    write_row(f, {"total", format_number(raw.total()), format_number(mitigated.total()),
                  format_number(clamped.total())});
    write_manifest(config, "mitigate", out_dir, {});
}

void cmd_report(const std::filesystem::path &out_dir, std::ostream &out) {
    bool any = false;
    for (const char *name : {"success.csv", "fidelity.csv", "entanglement.csv", "sweep.csv", "mitigated.csv"}) {
        auto path = out_dir / name;
        if (!std::filesystem::exists(path)) {
            continue;
        }
        any = true;
        auto rows = read_csv(path);
        out << "== " << name << " ==\n";
        std::vector<size_t> width;
        for (const auto &r : rows) {
            width.resize(std::max(width.size(), r.size()), 0);
            for (size_t i = 0; i < r.size(); i++) {
                width[i] = std::max(width[i], r[i].size());
            }
        }
        for (const auto &r : rows) {
            for (size_t i = 0; i < r.size(); i++) {
                out << (i ? "  " : "") << std::left << std::setw(static_cast<int>(width[i])) << r[i];
            }
            out << '\n';
        }
        if (std::string(name) == "sweep.csv" && rows.size() > 1) {
            // First point where the random-party column overtakes the specific-party one.
            std::optional<std::string> crossover;
            for (size_t i = 1; i < rows.size() && !crossover; i++) {
                if (rows[i].size() >= 5 && std::stod(rows[i][3]) > std::stod(rows[i][4])) {
                    crossover = rows[i][0];
                }
            }
            out << "crossover: " << (crossover ? *crossover : std::string("none")) << '\n';
        }
        out << '\n';
    }
    if (!any) {
        throw ConfigError("no result files in " + out_dir.string());
    }
}

}  // namespace wdistill
