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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>
#include <string>

#include "readout_oracle.h"
#include "wdistill/circuit.h"
#include "wdistill/errors.h"
#include "wdistill/noise.h"
#include "wdistill/qstate.h"
#include "wdistill/stats.h"

using namespace wdistill;

namespace {

Statevector w_state_vector() {
    return prepare_w();
}

DensityMatrix w_state() {
    return DensityMatrix::from_pure(prepare_w());
}

double closed_form_success(int n) {
    return (n + 2.0) / (n + 3.0);
}

double pooled_sigma(double p, double shots) {
    return std::sqrt(p * (1 - p) / shots);
}

ShotPlan plan(uint64_t shots, uint64_t trials, uint64_t seed, unsigned workers = 1) {
    ShotPlan p;
    p.shots_per_trial = shots;
    p.trials = trials;
    p.master_seed = seed;
    p.workers = workers;
    return p;
}

}  // namespace

TEST(ShotPlan, Validation) {
    EXPECT_THROW(plan(0, 5, 1).validate(), ConfigError);
    EXPECT_THROW(plan(10, 0, 1).validate(), ConfigError);
    EXPECT_NO_THROW(plan(1, 1, 1).validate());
}

TEST(ShotSeed, DistinctStreams) {
    std::set<uint64_t> seen;
    for (uint64_t t = 0; t < 20; t++) {
        for (uint64_t s = 0; s < 500; s++) {
            seen.insert(shot_seed(42, t, s));
        }
    }
    EXPECT_EQ(seen.size(), 20u * 500u);
    EXPECT_NE(shot_seed(1, 0, 0), shot_seed(2, 0, 0));
    EXPECT_EQ(shot_seed(7, 3, 9), shot_seed(7, 3, 9));
}

TEST(Sampling, BitIdenticalAcrossWorkers) {
    auto config = ProtocolConfig::optimal(3);
    auto hook = fidelity_targets(linear_fidelity_ramp(0.97, 0.07, 3));
    auto initial = noisy_w(depolarizing_weight_for_fidelity(0.97));
    auto readout = ReadoutModel::parse("qubits:\n  - {p01: 0.02, p10: 0.05}\n  - {p01: 0.01, p10: 0.03}\n"
                                  "  - {p01: 0.03, p10: 0.04}\n");
    auto one = sample_protocol(config, initial, plan(3001, 4, 99, 1), hook, readout);
    for (unsigned w : {4u, 8u, 0u}) {
        auto many = sample_protocol(config, initial, plan(3001, 4, 99, w), hook, readout);
        EXPECT_EQ(one, many) << "workers=" << w;
        auto a = estimate_rate(one, true, readout), b = estimate_rate(many, true, readout);
        EXPECT_EQ(a.p_success.mean, b.p_success.mean);
        EXPECT_EQ(a.p_success.sigma, b.p_success.sigma);
    }
    auto other = sample_protocol(config, initial, plan(3001, 4, 100, 1), hook, readout);
    EXPECT_NE(one, other);
}

TEST(Sampling, ShotAccounting) {
    auto samples = sample_protocol(ProtocolConfig::optimal(2), w_state(), plan(2000, 3, 5));
    ASSERT_EQ(samples.trials.size(), 3u);
    EXPECT_EQ(samples.rounds, 2);
    for (const auto &t : samples.trials) {
        EXPECT_EQ(t.shots, 2000u);
        uint64_t r1 = 0;
        for (auto c : t.rounds[0]) {
            r1 += c;
        }
        EXPECT_EQ(r1, 2000u);
        uint64_t r2 = 0;
        for (auto c : t.rounds[1]) {
            r2 += c;
        }
        EXPECT_EQ(r2, t.rounds[0][0]);
        EXPECT_EQ(t.strong_attempts, t.rounds[1][0]);
        EXPECT_LE(t.strong_successes, t.strong_attempts);
        // Ideal W input: one party is always excited, so all three ancillae never fire.
        for (const auto &round : t.rounds) {
            EXPECT_EQ(round[7], 0u);
        }
        EXPECT_EQ(t.round_table(1).total(), 2000.0);
    }
}

TEST(Sampling, NoiselessMatchesClosedForm) {
    for (int n = 1; n <= 4; n++) {
        auto samples = sample_protocol(ProtocolConfig::optimal(n), w_state(), plan(20000, 5, 1000 + n));
        auto est = estimate_rate(samples);
        double exact = closed_form_success(n);
        double sigma = pooled_sigma(exact, 1e5);
        EXPECT_NEAR(est.p_success.mean, exact, 5 * sigma) << "N=" << n;
        EXPECT_NEAR(est.p_success.binomial_sigma, sigma, 0.05 * sigma);
        ASSERT_TRUE(est.p_success.sigma.has_value());
        EXPECT_EQ(est.p_success.trials, 5u);
        EXPECT_EQ(est.term_probabilities.size(), static_cast<size_t>(n + 1));
    }
}

TEST(Sampling, NoisyMatchesExactEnumeration) {
    for (int n = 1; n <= 4; n++) {
        auto config = ProtocolConfig::optimal(n);
        auto hook = fidelity_targets(linear_fidelity_ramp(0.95, 0.07, n));
        auto initial = noisy_w(depolarizing_weight_for_fidelity(0.95));
        auto exact_run = run_random_party(config, initial, hook);
        double exact = 0;
        for (int k = 1; k <= n; k++) {
            exact += exact_run.reach_probability(k) * exact_run.rounds[k - 1].p_epr_total();
        }
        exact += exact_run.reach_probability(n + 1) * exact_run.strong.p_epr;
        auto samples = sample_protocol(exact_run, plan(20000, 5, 2000 + n));
        auto est = estimate_rate(samples);
        EXPECT_NEAR(est.p_success.mean, exact, 5 * pooled_sigma(exact, 1e5)) << "N=" << n;
    }
}

TEST(Sampling, ZeroStrengthNeverFires) {
    ProtocolConfig config;
    config.rounds = 1;
    config.schedule = EpsilonSchedule::uniform(1, 0.0);
    auto samples = sample_protocol(config, w_state(), plan(30000, 1, 3));
    const auto &t = samples.trials[0];
    EXPECT_EQ(t.rounds[0][0], 30000u);
    EXPECT_EQ(t.strong_attempts, 30000u);
    double rate = static_cast<double>(t.strong_successes) / 30000.0;
    EXPECT_NEAR(rate, 2.0 / 3.0, 5 * pooled_sigma(2.0 / 3.0, 30000));
}

TEST(Sampling, AncillaReadoutBiasAndMitigation) {
    auto readout = ReadoutModel::parse("qubits:\n  - {p01: 0.03, p10: 0.03}\n  - {p01: 0.03, p10: 0.03}\n"
                                       "  - {p01: 0.03, p10: 0.03}\n");
    auto exact_run = run_random_party(ProtocolConfig::optimal(1), w_state());
    const double shots = 1e5;
    auto samples = sample_protocol(exact_run, plan(20000, 5, 11), readout);
    auto raw = estimate_rate(samples);
    auto mitigated = estimate_rate(samples, true, readout);

    std::map<std::string, double> truth;
    for (size_t o = 0; o < 8; o++) {
        truth[basis_label(o, 3)] = exact_run.rounds[0].outcome_probabilities[o];
    }
    auto sigma = readout_test::mitigated_sigma(readout, truth, shots);
    double p_w = exact_run.rounds[0].p_w;
    // Spurious ones move shots out of the all-zero pattern.
    EXPECT_LT(raw.p_w[0].mean, p_w - 5 * pooled_sigma(p_w, shots));
    EXPECT_NEAR(mitigated.p_w[0].mean, p_w, 5 * sigma[0]);
    // success = m_000 p_strong + sum of single-one terms; bound each deviation at 5 sigma.
    double p_strong = exact_run.strong.p_epr;
    double exact = closed_form_success(1);
    double bound = 5 * (sigma[0] * p_strong + sigma[1] + sigma[2] + sigma[4] +
                        p_w * pooled_sigma(p_strong, p_w * shots * 0.9));
    EXPECT_NEAR(mitigated.p_success.mean, exact, bound);
    EXPECT_THROW(estimate_rate(samples, true, std::nullopt), ConfigError);
}

TEST(Sampling, ReadoutWidthChecked) {
    EXPECT_THROW(sample_protocol(ProtocolConfig::optimal(1), w_state(), plan(10, 1, 1), {}, ReadoutModel::ideal(2)),
                 InvalidArgument);
}

TEST(EstimateRate, UndefinedCases) {
    SampleSet empty;
    empty.rounds = 1;
    EXPECT_THROW(estimate_rate(empty), UndefinedEstimate);

    SampleSet starved;
    starved.rounds = 2;
    TrialCounts t;
    t.shots = 10;
    t.rounds = {std::array<uint64_t, 8>{0, 10, 0, 0, 0, 0, 0, 0}, std::array<uint64_t, 8>{}};
    starved.trials.push_back(t);
    EXPECT_THROW(estimate_rate(starved), UndefinedEstimate);
}

TEST(EstimateRate, SingleTrialHasNoSpread) {
    auto samples = sample_protocol(ProtocolConfig::optimal(1), w_state(), plan(5000, 1, 8));
    auto est = estimate_rate(samples);
    EXPECT_FALSE(est.p_success.sigma.has_value());
    EXPECT_GT(est.p_success.binomial_sigma, 0.0);
}

TEST(Summarize, MeanAndSampleDeviation) {
    auto e = summarize({1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(e.mean, 2.5);
    ASSERT_TRUE(e.sigma.has_value());
    EXPECT_NEAR(*e.sigma, std::sqrt(5.0 / 3.0), 1e-15);
    EXPECT_THROW(summarize({}), UndefinedEstimate);
}

TEST(ConditionedFidelity, AnalyticAndSampled) {
    auto rho = noisy_w(0.2);
    double f = 0.8 + 0.2 / 8.0;
    auto analytic = conditioned_fidelity(rho, w_state_vector());
    EXPECT_TRUE(analytic.analytic);
    EXPECT_NEAR(analytic.mean, f, 1e-12);

    auto sampled = conditioned_fidelity(rho, w_state_vector(), {20000, 20000, 20000}, 4);
    EXPECT_FALSE(sampled.analytic);
    EXPECT_EQ(sampled.trials, 3u);
    EXPECT_NEAR(sampled.mean, f, 5 * pooled_sigma(f, 60000));
    auto again = conditioned_fidelity(rho, w_state_vector(), {20000, 20000, 20000}, 4);
    EXPECT_EQ(sampled.mean, again.mean);
    EXPECT_THROW(conditioned_fidelity(rho, w_state_vector(), {100, 0}, 4), UndefinedEstimate);
}
