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

#include "wdistill/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "wdistill/errors.h"
#include "wdistill/rng.h"

namespace wdistill {

namespace {

const char *const kPatterns[8] = {"000", "100", "010", "110", "001", "101", "011", "111"};

uint64_t sample_pattern(const std::array<double, 8> &p, double u) {
    double acc = 0;
    uint64_t last = 0;
    for (uint64_t o = 0; o < 8; o++) {
        if (p[o] <= 0) {
            continue;
        }
        acc += p[o];
        last = o;
        if (u < acc) {
            return o;
        }
    }
    return last;
}

uint64_t flip_readout(const ReadoutModel &model, uint64_t truth, std::mt19937_64 &gen) {
    uint64_t read = truth;
    for (size_t q = 0; q < 3; q++) {
        bool one = (truth >> q) & 1;
        double flip = one ? model.qubit(q).p10 : model.qubit(q).p01;
        if (uniform01(gen) < flip) {
            read ^= uint64_t{1} << q;
        }
    }
    return read;
}

void add_into(TrialCounts &into, const TrialCounts &part) {
    into.shots += part.shots;
    for (size_t k = 0; k < into.rounds.size(); k++) {
        for (size_t o = 0; o < 8; o++) {
            into.rounds[k][o] += part.rounds[k][o];
        }
    }
    into.strong_attempts += part.strong_attempts;
    into.strong_successes += part.strong_successes;
}

unsigned resolve_workers(unsigned requested) {
    if (requested == 0) {
        requested = std::max(1u, std::thread::hardware_concurrency());
    }
    return requested;
}

// Runs body(begin, end, partial) over [0, n) split into contiguous blocks, one per
// worker, and sums the integer partial counts.
template <class Body>
TrialCounts parallel_shots(uint64_t n, unsigned workers, size_t rounds, Body body) {
    auto blank = [&] {
        TrialCounts c;
        c.rounds.assign(rounds, std::array<uint64_t, 8>{});
        return c;
    };
    workers = static_cast<unsigned>(std::min<uint64_t>(workers, std::max<uint64_t>(n, 1)));
    std::vector<TrialCounts> parts(workers, blank());
    if (workers == 1) {
        body(0, n, parts[0]);
    } else {
        std::vector<std::thread> threads;
        for (unsigned w = 0; w < workers; w++) {
            uint64_t begin = n * w / workers;
            uint64_t end = n * (w + 1) / workers;
            threads.emplace_back([&, w, begin, end] { body(begin, end, parts[w]); });
        }
        for (auto &t : threads) {
            t.join();
        }
    }
    TrialCounts total = blank();
    for (const auto &p : parts) {
        add_into(total, p);
    }
    return total;
}

}  // namespace

void ShotPlan::validate() const {
    if (shots_per_trial < 1) {
        throw ConfigError("shots per trial must be at least 1");
    }
    if (trials < 1) {
        throw ConfigError("trials must be at least 1");
    }
}

uint64_t shot_seed(uint64_t master_seed, uint64_t trial, uint64_t shot) {
    return stream_seed(master_seed, trial, shot);
}

CountsTable TrialCounts::round_table(int k) const {
    if (k < 1 || k > static_cast<int>(rounds.size())) {
        throw InvalidArgument("round index out of range");
    }
    CountsTable t{3, {}};
    for (size_t o = 0; o < 8; o++) {
        if (rounds[static_cast<size_t>(k - 1)][o]) {
            t.counts[kPatterns[o]] = static_cast<double>(rounds[static_cast<size_t>(k - 1)][o]);
        }
    }
    return t;
}

SampleSet sample_protocol(const ProtocolResult &exact, const ShotPlan &plan,
                          const std::optional<ReadoutModel> &ancilla_readout) {
    plan.validate();
    if (ancilla_readout && ancilla_readout->n_qubits() != 3) {
        throw InvalidArgument("ancilla readout model must cover the three ancillae");
    }
    const size_t n_rounds = exact.rounds.size();
    SampleSet out;
    out.rounds = exact.rounds_requested;
    const unsigned workers = resolve_workers(plan.workers);
    for (uint64_t t = 0; t < plan.trials; t++) {
        auto body = [&](uint64_t begin, uint64_t end, TrialCounts &c) {
            for (uint64_t s = begin; s < end; s++) {
                std::mt19937_64 gen(shot_seed(plan.master_seed, t, s));
                c.shots++;
                bool alive = true;
                for (size_t k = 0; k < n_rounds && alive; k++) {
                    uint64_t truth = sample_pattern(exact.rounds[k].outcome_probabilities, uniform01(gen));
                    uint64_t read = ancilla_readout ? flip_readout(*ancilla_readout, truth, gen) : truth;
                    c.rounds[k][read]++;
                    alive = truth == 0 && read == 0;
                }
                if (alive && exact.strong.reached) {
                    c.strong_attempts++;
                    if (uniform01(gen) < exact.strong.p_epr) {
                        c.strong_successes++;
                    }
                }
            }
        };
        TrialCounts c = parallel_shots(plan.shots_per_trial, workers, n_rounds, body);
        c.rounds.resize(static_cast<size_t>(exact.rounds_requested), std::array<uint64_t, 8>{});
        out.trials.push_back(std::move(c));
    }
    return out;
}

SampleSet sample_protocol(const ProtocolConfig &config, const DensityMatrix &initial, const ShotPlan &plan,
                          const ChannelHook &between_rounds, const std::optional<ReadoutModel> &ancilla_readout) {
    return sample_protocol(run_protocol(config, initial, between_rounds), plan, ancilla_readout);
}

EstimateWithError summarize(const std::vector<double> &per_trial, double pooled_binomial_sigma) {
    if (per_trial.empty()) {
        throw UndefinedEstimate("no trials to summarize");
    }
    EstimateWithError e;
    e.trials = per_trial.size();
    e.mean = std::accumulate(per_trial.begin(), per_trial.end(), 0.0) / static_cast<double>(e.trials);
    if (e.trials > 1) {
        double ss = 0;
        for (double v : per_trial) {
            ss += (v - e.mean) * (v - e.mean);
        }
        e.sigma = std::sqrt(ss / static_cast<double>(e.trials - 1));
    }
    e.binomial_sigma = pooled_binomial_sigma;
    return e;
}

namespace {

double binomial_sigma(double p, double n) {
    return n > 0 ? std::sqrt(std::max(0.0, p * (1 - p)) / n) : 0.0;
}

}  // namespace

RateEstimates estimate_rate(const SampleSet &samples, bool mitigated, const std::optional<ReadoutModel> &readout) {
    if (samples.trials.empty()) {
        throw UndefinedEstimate("no trials");
    }
    if (mitigated && !readout) {
        throw ConfigError("mitigated estimates need a readout model");
    }
    const size_t n = static_cast<size_t>(samples.rounds);
    std::vector<std::vector<double>> pw(n), pe(n), terms(n + 1);
    std::vector<double> ps, success;
    std::vector<double> reached(n, 0.0);
    double strong_attempts = 0, total_shots = 0;
    for (const auto &trial : samples.trials) {
        double reach = 1, total = 0;
        for (size_t k = 0; k < n; k++) {
            CountsTable table = trial.round_table(static_cast<int>(k + 1));
            if (mitigated) {
                table = mitigate_readout(*readout, table);
            }
            double shots = table.total();
            if (!(shots > 0)) {
                throw UndefinedEstimate("round " + std::to_string(k + 1) + " has no shots");
            }
            auto get = [&](const char *key) {
                auto it = table.counts.find(key);
                return it == table.counts.end() ? 0.0 : it->second;
            };
            double w = get("000") / shots;
            double e = (get("100") + get("010") + get("001")) / shots;
            pw[k].push_back(w);
            pe[k].push_back(e);
            terms[k].push_back(reach * e);
            total += reach * e;
            reach *= w;
            reached[k] += shots;
        }
        if (trial.strong_attempts == 0) {
            throw UndefinedEstimate("no shots reached the strong measurement");
        }
        double s = static_cast<double>(trial.strong_successes) / static_cast<double>(trial.strong_attempts);
        ps.push_back(s);
        terms[n].push_back(reach * s);
        success.push_back(total + reach * s);
        strong_attempts += static_cast<double>(trial.strong_attempts);
        total_shots += static_cast<double>(trial.shots);
    }
    RateEstimates out;
    auto mean = [](const std::vector<double> &v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    for (size_t k = 0; k < n; k++) {
        out.p_w.push_back(summarize(pw[k], binomial_sigma(mean(pw[k]), reached[k])));
        out.p_epr.push_back(summarize(pe[k], binomial_sigma(mean(pe[k]), reached[k])));
        out.term_probabilities.push_back(mean(terms[k]));
    }
    out.term_probabilities.push_back(mean(terms[n]));
    out.p_strong = summarize(ps, binomial_sigma(mean(ps), strong_attempts));
    out.p_success = summarize(success, binomial_sigma(mean(success), total_shots));
    return out;
}

EstimateWithError conditioned_fidelity(const DensityMatrix &conditioned, const Statevector &target) {
    EstimateWithError e;
    e.mean = fidelity(conditioned, target);
    e.sigma = 0.0;
    e.trials = 1;
    e.analytic = true;
    return e;
}

EstimateWithError conditioned_fidelity(const DensityMatrix &conditioned, const Statevector &target,
                                       const std::vector<uint64_t> &post_selected, uint64_t seed) {
    if (post_selected.empty()) {
        throw UndefinedEstimate("no trials");
    }
    const double f = fidelity(conditioned, target);
    std::vector<double> per_trial;
    double pooled = 0;
    for (size_t t = 0; t < post_selected.size(); t++) {
        if (post_selected[t] == 0) {
            throw UndefinedEstimate("empty post-selection in trial " + std::to_string(t));
        }
        uint64_t hits = 0;
        for (uint64_t s = 0; s < post_selected[t]; s++) {
            std::mt19937_64 gen(shot_seed(seed, t, s));
            hits += uniform01(gen) < f;
        }
        per_trial.push_back(static_cast<double>(hits) / static_cast<double>(post_selected[t]));
        pooled += static_cast<double>(post_selected[t]);
    }
    return summarize(per_trial, binomial_sigma(f, pooled));
}

}  // namespace wdistill
