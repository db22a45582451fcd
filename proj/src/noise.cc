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

#include "wdistill/noise.h"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "wdistill/circuit.h"
#include "wdistill/errors.h"
#include "wdistill/rng.h"
#include "wdistill/tolerances.h"

namespace wdistill {

namespace {

constexpr size_t kMaxMitigationWidth = 24;

void check_weight(double p, const char *what) {
    if (!(p >= 0 && p <= 1)) {
        throw InvalidArgument(std::string(what) + ": weight must lie in [0, 1]");
    }
}

size_t index_of(const std::string &bits) {
    size_t i = 0;
    for (size_t k = 0; k < bits.size(); k++) {
        if (bits[k] == '1') {
            i |= size_t{1} << k;
        } else if (bits[k] != '0') {
            throw InvalidArgument("outcome '" + bits + "' is not a bit string");
        }
    }
    return i;
}

void check_width(const ReadoutModel &model, const CountsTable &counts) {
    if (model.n_qubits() != counts.width) {
        throw InvalidArgument("readout model has " + std::to_string(model.n_qubits()) + " qubits, counts have width " +
                              std::to_string(counts.width));
    }
    for (const auto &[k, v] : counts.counts) {
        if (k.size() != counts.width) {
            throw InvalidArgument("outcome '" + k + "' does not match table width");
        }
    }
}

}  // namespace

DensityMatrix noisy_w(double p) {
    check_weight(p, "noisy_w");
    return degrade_between_rounds(DensityMatrix::from_pure(prepare_w()), p);
}

double noisy_w_fidelity(double p) {
    check_weight(p, "noisy_w_fidelity");
    return (1 - p) + p / 8;
}

double depolarizing_weight_for_fidelity(double fidelity) {
    if (!(fidelity >= 0.125 - tol::kClamp && fidelity <= 1 + tol::kClamp)) {
        throw InvalidArgument("W fidelity must lie in [1/8, 1]");
    }
    return std::clamp((1 - fidelity) / (7.0 / 8.0), 0.0, 1.0);
}

DensityMatrix degrade_between_rounds(const DensityMatrix &state, double p) {
    check_weight(p, "degrade_between_rounds");
    Matrix m = state.matrix();
    m *= 1 - p;
    const size_t d = state.dim();
    for (size_t i = 0; i < d; i++) {
        m(i, i) += p / static_cast<double>(d);
    }
    return DensityMatrix(std::move(m));
}

ChannelHook depolarizing_schedule(std::vector<double> weights) {
    for (double p : weights) {
        check_weight(p, "depolarizing_schedule");
    }
    return [weights = std::move(weights)](const DensityMatrix &state, int completed) {
        if (completed < 1 || completed > static_cast<int>(weights.size())) {
            return state;
        }
        return degrade_between_rounds(state, weights[static_cast<size_t>(completed - 1)]);
    };
}

ChannelHook fidelity_targets(std::vector<double> targets) {
    for (double f : targets) {
        if (!(f >= 0.125 && f <= 1)) {
            throw InvalidArgument("fidelity targets must lie in [1/8, 1]");
        }
    }
    const Statevector w = prepare_w();
    return [targets = std::move(targets), w](const DensityMatrix &state, int completed) {
        if (completed < 1 || completed > static_cast<int>(targets.size())) {
            return state;
        }
        double target = targets[static_cast<size_t>(completed - 1)];
        double current = fidelity(state, w);
        if (current <= target) {
            return state;
        }
        return degrade_between_rounds(state, (current - target) / (current - 0.125));
    };
}

std::vector<double> linear_fidelity_ramp(double initial_fidelity, double drop_per_round, int rounds) {
    std::vector<double> out;
    for (int k = 1; k <= rounds; k++) {
        out.push_back(std::max(0.125, initial_fidelity - k * drop_per_round));
    }
    return out;
}

ReadoutModel::ReadoutModel(std::vector<QubitReadout> qubits) : qubits_(std::move(qubits)) {
    for (const auto &q : qubits_) {
        if (!(q.p01 >= 0 && q.p01 < 0.5 && q.p10 >= 0 && q.p10 < 0.5)) {
            throw InvalidArgument("readout flip probabilities must lie in [0, 0.5)");
        }
    }
}

ReadoutModel ReadoutModel::ideal(size_t n_qubits) {
    return ReadoutModel(std::vector<QubitReadout>(n_qubits));
}

ReadoutModel ReadoutModel::load(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read readout model " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

ReadoutModel ReadoutModel::parse(const std::string &text) {
    std::vector<QubitReadout> qubits;
    try {
        YAML::Node root = YAML::Load(text);
        YAML::Node list = root["qubits"];
        if (!list || !list.IsSequence()) {
            throw ConfigError("readout model needs a 'qubits' list");
        }
        for (const auto &q : list) {
            qubits.push_back({q["p01"].as<double>(), q["p10"].as<double>()});
        }
    } catch (const YAML::Exception &e) {
        throw ConfigError(std::string("malformed readout model: ") + e.what());
    }
    try {
        return ReadoutModel(std::move(qubits));
    } catch (const InvalidArgument &e) {
        throw ConfigError(e.what());
    }
}

std::string ReadoutModel::dump() const {
    YAML::Emitter out;
    out << YAML::BeginMap << YAML::Key << "qubits" << YAML::Value << YAML::BeginSeq;
    for (const auto &q : qubits_) {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "p01" << YAML::Value << q.p01 << YAML::Key << "p10"
            << YAML::Value << q.p10 << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::array<double, 4> ReadoutModel::confusion(size_t q) const {
    const auto &r = qubits_.at(q);
    return {1 - r.p01, r.p10, r.p01, 1 - r.p10};
}

std::array<double, 4> ReadoutModel::mitigation(size_t q) const {
    auto c = confusion(q);
    double det = c[0] * c[3] - c[1] * c[2];
    if (!(std::abs(det) > 1e-12)) {
        throw NumericalDomainError("confusion matrix of qubit " + std::to_string(q) + " is singular");
    }
    return {c[3] / det, -c[1] / det, -c[2] / det, c[0] / det};
}

double CountsTable::total() const {
    double t = 0;
    for (const auto &[k, v] : counts) {
        t += v;
    }
    return t;
}

void CountsTable::add(const std::string &outcome, double weight) {
    if (outcome.size() != width) {
        throw InvalidArgument("outcome '" + outcome + "' does not match table width");
    }
    counts[outcome] += weight;
}

std::map<std::string, double> CountsTable::distribution() const {
    double t = total();
    if (!(t > 0)) {
        throw UndefinedEstimate("empty counts table");
    }
    std::map<std::string, double> out;
    for (const auto &[k, v] : counts) {
        out[k] = v / t;
    }
    return out;
}

CountsTable apply_readout(const ReadoutModel &model, const CountsTable &counts, uint64_t rng_seed) {
    check_width(model, counts);
    CountsTable out{counts.width, {}};
    uint64_t shot = 0;
    for (const auto &[outcome, weight] : counts.counts) {
        if (weight < 0 || weight != std::floor(weight)) {
            throw InvalidArgument("apply_readout needs non-negative integer counts");
        }
        for (uint64_t s = 0; s < static_cast<uint64_t>(weight); s++, shot++) {
            std::mt19937_64 gen(stream_seed(rng_seed, 0, shot));
            std::string read = outcome;
            for (size_t q = 0; q < read.size(); q++) {
                const auto &r = model.qubit(q);
                double flip = read[q] == '0' ? r.p01 : r.p10;
                if (uniform01(gen) < flip) {
                    read[q] = read[q] == '0' ? '1' : '0';
                }
            }
            out.counts[read] += 1;
        }
    }
    return out;
}

CountsTable mitigate_readout(const ReadoutModel &model, const CountsTable &counts) {
    check_width(model, counts);
    if (counts.width > kMaxMitigationWidth) {
        throw UnsupportedError("mitigation is limited to " + std::to_string(kMaxMitigationWidth) + " bits");
    }
    const size_t dim = size_t{1} << counts.width;
    std::vector<double> v(dim, 0.0);
    for (const auto &[k, w] : counts.counts) {
        v[index_of(k)] += w;
    }
    for (size_t q = 0; q < counts.width; q++) {
        auto m = model.mitigation(q);
        const size_t bit = size_t{1} << q;
        for (size_t i = 0; i < dim; i++) {
            if (i & bit) {
                continue;
            }
            double a = v[i], b = v[i | bit];
            v[i] = m[0] * a + m[1] * b;
            v[i | bit] = m[2] * a + m[3] * b;
        }
    }
    CountsTable out{counts.width, {}};
    for (size_t i = 0; i < dim; i++) {
        if (v[i] != 0) {
            out.counts[basis_label(i, counts.width)] = v[i];
        }
    }
    return out;
}

CountsTable clamp_and_renormalize(const CountsTable &counts) {
    double total = counts.total();
    double positive = 0;
    for (const auto &[k, v] : counts.counts) {
        positive += std::max(v, 0.0);
    }
    if (!(positive > 0)) {
        throw NumericalDomainError("no positive weight left after clamping");
    }
    CountsTable out{counts.width, {}};
    for (const auto &[k, v] : counts.counts) {
        out.counts[k] = v > 0 ? v * total / positive : 0.0;
    }
    return out;
}

}  // namespace wdistill
